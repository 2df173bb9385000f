#include "specop/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace specop::io {

namespace {

json complex_to_json(const Cplx& z) { return json::array({z.real(), z.imag()}); }

Cplx complex_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2)
        throw InputError("expected [re,im] pair in coefficient data");
    return {j[0].get<double>(), j[1].get<double>()};
}

json gain_to_json(double g) {
    if (std::isinf(g)) return json("inf");
    return json(g);
}

void require(bool cond, const char* what) {
    if (!cond) throw InputError(std::string("malformed file: ") + what);
}

}  // namespace

// ---- spectrum ------------------------------------------------------------------

json spectrum_to_json(const SpectrumModel& s) {
    json blocks = json::array();
    for (const auto& b : s.blocks()) {
        json jb{{"eigenvalue", b.eigenvalue}, {"multiplicity", b.multiplicity}};
        if (!b.label.empty()) jb["label"] = b.label;
        blocks.push_back(std::move(jb));
    }
    return json{{"manifold_dim", s.manifold_dim()},
                {"elliptic_order", s.elliptic_order()},
                {"blocks", std::move(blocks)}};
}

std::shared_ptr<const SpectrumModel> spectrum_from_json(const json& j) {
    require(j.is_object() && j.contains("manifold_dim") && j.contains("elliptic_order") &&
                j.contains("blocks") && j["blocks"].is_array(),
            "spectrum needs manifold_dim, elliptic_order and blocks");
    std::vector<BlockInfo> blocks;
    for (const auto& jb : j["blocks"]) {
        require(jb.contains("eigenvalue") && jb.contains("multiplicity"),
                "spectrum block needs eigenvalue and multiplicity");
        BlockInfo b;
        b.eigenvalue = jb["eigenvalue"].get<double>();
        b.multiplicity = jb["multiplicity"].get<int>();
        if (jb.contains("label")) b.label = jb["label"].get<std::string>();
        blocks.push_back(std::move(b));
    }
    return std::make_shared<SpectrumModel>(j["manifold_dim"].get<int>(),
                                           j["elliptic_order"].get<double>(), std::move(blocks));
}

// ---- field ---------------------------------------------------------------------

json field_to_json(const CoefficientField& u) {
    json blocks = json::array();
    for (int k = 0; k < u.size(); ++k) {
        json jb = json::array();
        const Vec& b = u.block(k);
        for (Eigen::Index i = 0; i < b.size(); ++i) jb.push_back(complex_to_json(b[i]));
        blocks.push_back(std::move(jb));
    }
    return json{{"spectrum_hash", u.spectrum().hash()}, {"blocks", std::move(blocks)}};
}

CoefficientField field_from_json(const json& j, std::shared_ptr<const SpectrumModel> spectrum) {
    require(j.is_object() && j.contains("spectrum_hash") && j.contains("blocks") &&
                j["blocks"].is_array(),
            "field needs spectrum_hash and blocks");
    if (j["spectrum_hash"].get<std::string>() != spectrum->hash())
        throw InputError("field file was written against a different spectrum");
    std::vector<Vec> blocks;
    for (const auto& jb : j["blocks"]) {
        require(jb.is_array(), "field block must be an array");
        Vec b(static_cast<Eigen::Index>(jb.size()));
        for (std::size_t i = 0; i < jb.size(); ++i)
            b[static_cast<Eigen::Index>(i)] = complex_from_json(jb[i]);
        blocks.push_back(std::move(b));
    }
    return CoefficientField(std::move(spectrum), std::move(blocks));
}

// ---- symbol / system -------------------------------------------------------------

json symbol_to_json(const InvariantSymbol& p) {
    json blocks = json::array();
    for (int k = 0; k < p.size(); ++k) {
        const Mat& b = p.block(k);
        json rows = json::array();
        for (Eigen::Index r = 0; r < b.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < b.cols(); ++c) row.push_back(complex_to_json(b(r, c)));
            rows.push_back(std::move(row));
        }
        blocks.push_back(std::move(rows));
    }
    return json{{"spectrum_hash", p.spectrum().hash()}, {"blocks", std::move(blocks)}};
}

InvariantSymbol symbol_from_json(const json& j, std::shared_ptr<const SpectrumModel> spectrum) {
    require(j.is_object() && j.contains("spectrum_hash") && j.contains("blocks") &&
                j["blocks"].is_array(),
            "symbol needs spectrum_hash and blocks");
    if (j["spectrum_hash"].get<std::string>() != spectrum->hash())
        throw InputError("symbol file was written against a different spectrum");
    std::vector<Mat> blocks;
    for (const auto& jb : j["blocks"]) {
        require(jb.is_array() && !jb.empty(), "symbol block must be a nonempty array of rows");
        const Eigen::Index rows = static_cast<Eigen::Index>(jb.size());
        Mat b(rows, rows);
        for (Eigen::Index r = 0; r < rows; ++r) {
            const auto& jrow = jb[static_cast<std::size_t>(r)];
            require(jrow.is_array() && static_cast<Eigen::Index>(jrow.size()) == rows,
                    "symbol block must be square");
            for (Eigen::Index c = 0; c < rows; ++c)
                b(r, c) = complex_from_json(jrow[static_cast<std::size_t>(c)]);
        }
        blocks.push_back(std::move(b));
    }
    return InvariantSymbol(std::move(spectrum), std::move(blocks));
}

json system_to_json(const SystemSymbol& s) {
    json ops = json::array();
    for (int j = 0; j < s.count(); ++j) ops.push_back(symbol_to_json(s.op(j)));
    return json{{"operators", std::move(ops)}};
}

SystemSymbol system_from_json(const json& j, std::shared_ptr<const SpectrumModel> spectrum,
                              const std::filesystem::path& base_dir) {
    require(j.is_object() && j.contains("operators") && j["operators"].is_array() &&
                !j["operators"].empty(),
            "system needs a nonempty operators array");
    std::vector<InvariantSymbol> ops;
    for (const auto& jop : j["operators"]) {
        if (jop.is_object() && jop.contains("file")) {
            const std::filesystem::path p = base_dir / jop["file"].get<std::string>();
            ops.push_back(symbol_from_json(load_json_file(p), spectrum));
        } else {
            ops.push_back(symbol_from_json(jop, spectrum));
        }
    }
    return SystemSymbol(std::move(ops));
}

// ---- reports ---------------------------------------------------------------------

json decay_to_json(const DecayReport& d) {
    return json{{"class", to_string(d.cls)},       {"slope", d.slope},
                {"intercept", d.intercept},        {"residual", d.residual},
                {"samples", d.samples},            {"window_slopes", d.window_slopes},
                {"note", d.note}};
}

json report_to_json(const DiagnosticReport& r) {
    json samples = json::array();
    for (const auto& s : r.curve.samples)
        samples.push_back(json{{"k", s.k},
                               {"lambda", s.lambda},
                               {"gain", gain_to_json(s.gain)},
                               {"kernel_dim", s.kernel_dim}});
    json fit;
    if (r.fit) {
        fit = json{{"C", r.fit->C},
                   {"gamma", r.fit->gamma},
                   {"residual", r.fit->residual},
                   {"window", {r.fit->window_lo, r.fit->window_hi}},
                   {"sample_count", r.fit->sample_count},
                   {"envelope_method", r.fit->envelope_method},
                   {"super_polynomial", r.fit->super_polynomial},
                   {"window_slopes", r.fit->window_slopes}};
    }
    return json{{"verdict", to_string(r.verdict)},
                {"exit_code", exit_code(r.verdict)},
                {"mode", r.mode},
                {"gh_pass", r.gh_pass},
                {"gs_pass", r.gs_pass},
                {"gs_determinate_fail", r.gs_determinate_fail},
                {"curve", json{{"samples", std::move(samples)}, {"zero_blocks", r.curve.zero_blocks}}},
                {"fit", std::move(fit)},
                {"z_census",
                 json{{"members", r.z_census.members},
                      {"kernel_dims", r.z_census.kernel_dims},
                      {"density_slope", r.z_census.density_slope},
                      {"tail_clear", r.z_census.tail_clear},
                      {"finite_looking", r.z_census.finite_looking}}},
                {"truncation_note", r.truncation_note},
                {"config_hash", r.config_hash}};
}

json outcome_to_json(const SolveOutcome& o, const RunConfig& cfg) {
    json failures = json::array();
    for (const auto& f : o.compat_failures)
        failures.push_back(json{{"k", f.k}, {"deficit", f.deficit}});
    return json{{"residuals", o.residuals},
                {"compat_failures", std::move(failures)},
                {"kernel_dims", o.kernel_dims},
                {"notes", o.notes},
                {"config_hash", cfg.hash()},
                {"seed", cfg.seed}};
}

json witness_log_to_json(const WitnessBundle& w, const RunConfig& cfg) {
    json entries = json::array();
    for (const auto& e : w.construction_log)
        entries.push_back(
            json{{"n", e.n}, {"k", e.k}, {"lambda", e.lambda}, {"gain", e.gain}});
    json image_decays = json::array();
    for (const auto& d : w.image_decays) image_decays.push_back(decay_to_json(d));
    return json{{"construction", std::move(entries)},
                {"u_decay", decay_to_json(w.u_decay)},
                {"image_decays", std::move(image_decays)},
                {"config_hash", cfg.hash()},
                {"seed", cfg.seed}};
}

// ---- files -----------------------------------------------------------------------

json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open file: " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError("cannot parse " + path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open file for writing: " + path.string());
    out << j.dump(1) << "\n";
}

void write_field_csv(const std::filesystem::path& path, const CoefficientField& u) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open file for writing: " + path.string());
    out << "k,lambda,norm\n";
    char buf[96];
    for (int k = 0; k < u.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", k, u.spectrum().eigenvalue(k),
                      u.block_norm(k));
        out << buf;
    }
}

void write_curve_csv(const std::filesystem::path& path, const GainCurve& curve) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open file for writing: " + path.string());
    out << "k,lambda,gain,kernel_dim\n";
    char buf[112];
    for (const auto& s : curve.samples) {
        if (std::isinf(s.gain))
            std::snprintf(buf, sizeof(buf), "%d,%.17g,inf,%d\n", s.k, s.lambda, s.kernel_dim);
        else
            std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%d\n", s.k, s.lambda, s.gain,
                          s.kernel_dim);
        out << buf;
    }
}

void write_residual_csv(const std::filesystem::path& path, const SpectrumModel& s,
                        const std::vector<double>& residuals) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open file for writing: " + path.string());
    out << "k,lambda,residual\n";
    char buf[96];
    for (std::size_t k = 0; k < residuals.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", k,
                      s.eigenvalue(static_cast<int>(k)), residuals[k]);
        out << buf;
    }
}

}  // namespace specop::io
