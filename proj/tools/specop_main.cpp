// specop — spectral diagnostics and solvers for invariant operator symbols.
//
// Subcommands: model, info, apply, diagnose, solve, witness, compare-oracle.
// Exit codes: diagnose maps its verdict to 0..3; malformed inputs exit 64,
// structural precondition failures 65, strict-mode compatibility failures 66.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "specop/diagnostics.hpp"
#include "specop/io.hpp"
#include "specop/models.hpp"
#include "specop/solvers.hpp"
#include "specop/witnesses.hpp"

namespace {

using namespace specop;
namespace fs = std::filesystem;

constexpr int kExitInput = 64;
constexpr int kExitStructural = 65;
constexpr int kExitStrict = 66;

struct CommonOpts {
    RunConfig cfg;
    std::string spectrum_path;
    std::string symbol_path;
    std::string system_path;
};

void add_tolerance_flags(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--ztol-abs", cfg.ztol.abs_tol, "absolute zero threshold");
    cmd->add_option("--ztol-rel", cfg.ztol.rel_tol, "relative zero threshold");
    cmd->add_option("--tol", cfg.compat_tol, "compatibility tolerance");
    cmd->add_option("--theta-min", cfg.theta_min, "transversality angle margin");
    cmd->add_option("--tail", cfg.tail_fraction, "tail fraction for fits");
    cmd->add_option("--nprobe", cfg.n_probe, "super-polynomial probe exponent");
    cmd->add_option("--seed", cfg.seed, "seed recorded in artifacts");
    cmd->add_flag("--strict", cfg.strict, "exit 66 on any compatibility failure");
}

std::shared_ptr<const SpectrumModel> load_spectrum(const std::string& path) {
    if (path.empty()) throw InputError("--spectrum is required");
    return io::spectrum_from_json(io::load_json_file(path));
}

SystemSymbol load_operators(const CommonOpts& opts,
                            std::shared_ptr<const SpectrumModel> spectrum) {
    if (!opts.symbol_path.empty() && !opts.system_path.empty())
        throw InputError("pass either --symbol or --system, not both");
    if (!opts.symbol_path.empty())
        return SystemSymbol({io::symbol_from_json(io::load_json_file(opts.symbol_path), spectrum)});
    if (!opts.system_path.empty())
        return io::system_from_json(io::load_json_file(opts.system_path), spectrum,
                                    fs::path(opts.system_path).parent_path());
    throw InputError("one of --symbol or --system is required");
}

std::vector<CoefficientField> load_fields(const std::vector<std::string>& paths,
                                          std::shared_ptr<const SpectrumModel> spectrum) {
    std::vector<CoefficientField> fields;
    for (const auto& p : paths)
        fields.push_back(io::field_from_json(io::load_json_file(p), spectrum));
    return fields;
}

// structural auto-detection: commuting normal > normal > stacked
std::string detect_mode(const SystemSymbol& sys) {
    if (sys.count() == 1) return "single";
    bool all_normal = true;
    for (int j = 0; j < sys.count() && all_normal; ++j)
        all_normal = is_normal(sys.op(j), 1e-10).all_normal;
    if (!all_normal) return "system";
    bool commuting = true;
    for (int i = 0; i < sys.count() && commuting; ++i)
        for (int j = i + 1; j < sys.count() && commuting; ++j) {
            const auto c = commutator(sys.op(i), sys.op(j));
            for (int k = 0; k < c.size() && commuting; ++k)
                if (c.block(k).norm() >
                    1e-10 * std::max(1.0, sys.op(i).block_norm(k) * sys.op(j).block_norm(k)))
                    commuting = false;
        }
    return commuting ? "commuting" : "normal";
}

int run_model(const std::string& kind, int dim, long long rsq, int degree,
              const std::vector<std::string>& coeffs, const std::string& recipe_token,
              const CommonOpts& opts, const std::string& spectrum_out,
              const std::string& symbol_out) {
    std::shared_ptr<const SpectrumModel> spectrum;
    std::optional<InvariantSymbol> symbol;
    if (kind == "torus") {
        const TorusModel torus = torus_spectrum(dim, rsq);
        spectrum = torus.spectrum;
        if (!coeffs.empty()) {
            std::vector<BigReal> a;
            for (const auto& c : coeffs) a.push_back(DiophantineCoefficient::parse(c).value);
            symbol = torus_vector_field(torus, a);
        }
    } else if (kind == "sphere") {
        const SphereModel sphere = sphere_spectrum(degree);
        spectrum = sphere.spectrum;
        symbol = sphere_rotation_field(sphere);
    } else if (kind == "synthetic") {
        spectrum = load_spectrum(opts.spectrum_path);
        const auto made =
            synthetic_symbol(spectrum, SyntheticRecipe::parse(recipe_token), opts.cfg.seed);
        symbol = made.symbol;
    } else {
        throw InputError("unknown model kind: " + kind);
    }
    if (!spectrum_out.empty()) io::write_json_file(spectrum_out, io::spectrum_to_json(*spectrum));
    if (!symbol_out.empty()) {
        if (!symbol) throw InputError("no symbol produced (torus needs --a coefficients)");
        io::write_json_file(symbol_out, io::symbol_to_json(*symbol));
    }
    std::printf("model %s: %d blocks, lambda_max=%.6g\n", kind.c_str(), spectrum->size(),
                spectrum->eigenvalue(spectrum->size() - 1));
    return 0;
}

int run_info(const CommonOpts& opts) {
    auto spectrum = load_spectrum(opts.spectrum_path);
    const auto [growth_c, worst_k] = spectrum->multiplicity_growth_constant();
    std::printf("spectrum: dim=%d nu=%.6g blocks=%d lambda_max=%.6g hash=%s\n",
                spectrum->manifold_dim(), spectrum->elliptic_order(), spectrum->size(),
                spectrum->eigenvalue(spectrum->size() - 1), spectrum->hash().c_str());
    std::printf("multiplicity growth constant C=%.6g at k=%d\n", growth_c, worst_k);
    if (!opts.symbol_path.empty() || !opts.system_path.empty()) {
        const SystemSymbol sys = load_operators(opts, spectrum);
        for (int j = 0; j < sys.count(); ++j) {
            const auto normal = is_normal(sys.op(j), 1e-10);
            double order = std::numeric_limits<double>::quiet_NaN();
            try {
                order = estimate_order(sys.op(j), opts.cfg.tail_fraction);
            } catch (const StructuralError&) {
            }
            std::printf("operator %d: normal=%s estimated_order=%.4g\n", j,
                        normal.all_normal ? "yes" : "no", order);
        }
        std::printf("detected mode: %s\n", detect_mode(sys).c_str());
    }
    return 0;
}

int run_apply(const CommonOpts& opts, const std::string& field_path, const std::string& out,
              const std::string& csv_out) {
    auto spectrum = load_spectrum(opts.spectrum_path);
    const SystemSymbol sys = load_operators(opts, spectrum);
    if (sys.count() != 1) throw StructuralError("apply expects a single --symbol");
    const auto f = io::field_from_json(io::load_json_file(field_path), spectrum);
    const auto image = sys.op(0).apply(f);
    if (!out.empty()) io::write_json_file(out, io::field_to_json(image));
    if (!csv_out.empty()) io::write_field_csv(csv_out, image);
    std::printf("apply: |Pu|_L2 = %.12g\n", image.l2_norm());
    return 0;
}

int run_diagnose(const CommonOpts& opts, std::string mode, const std::string& report_out,
                 const std::string& csv_out) {
    auto spectrum = load_spectrum(opts.spectrum_path);
    const SystemSymbol sys = load_operators(opts, spectrum);
    if (mode == "auto") mode = detect_mode(sys);

    DiagnosticReport rep;
    if (mode == "single" || mode == "gh") {
        if (sys.count() != 1) throw StructuralError("mode gh needs a single operator");
        rep = diagnose_gh_single(sys.op(0), opts.cfg);
    } else if (mode == "gs") {
        if (sys.count() != 1) throw StructuralError("mode gs needs a single operator");
        rep = diagnose_gs_single(sys.op(0), opts.cfg);
    } else if (mode == "system") {
        rep = diagnose_system(sys, false, opts.cfg);
    } else if (mode == "system-restricted") {
        rep = diagnose_system(sys, true, opts.cfg);
    } else if (mode == "normal") {
        rep = diagnose_normal_system(sys, opts.cfg);
    } else if (mode == "commuting") {
        rep = diagnose_commuting(sys, opts.cfg);
    } else {
        throw InputError("unknown diagnostic mode: " + mode);
    }

    if (!report_out.empty()) io::write_json_file(report_out, io::report_to_json(rep));
    if (!csv_out.empty()) io::write_curve_csv(csv_out, rep.curve);
    std::printf("mode=%s verdict=%s", rep.mode.c_str(), to_string(rep.verdict).c_str());
    if (rep.fit)
        std::printf(" gamma=%.6g C=%.6g%s", rep.fit->gamma, rep.fit->C,
                    rep.fit->super_polynomial ? " (super-polynomial decay)" : "");
    std::printf(" |Z|=%zu\n", rep.z_census.members.size());
    std::printf("%s\n", rep.truncation_note.c_str());
    return exit_code(rep.verdict);
}

int run_solve(const CommonOpts& opts, const std::vector<std::string>& field_paths,
              std::string method, const std::string& out, const std::string& residual_csv,
              const std::string& log_out) {
    auto spectrum = load_spectrum(opts.spectrum_path);
    const SystemSymbol sys = load_operators(opts, spectrum);
    const auto fields = load_fields(field_paths, spectrum);
    if (method == "auto") {
        const std::string detected = detect_mode(sys);
        method = detected == "single" ? "single" : detected == "system" ? "lsq" : detected;
    }

    SolveOutcome outcome = [&] {
        if (method == "single") {
            if (sys.count() != 1 || fields.size() != 1)
                throw StructuralError("method single needs one operator and one field");
            return solve_single(sys.op(0), fields[0], opts.cfg);
        }
        if (method == "lsq") return solve_system_lsq(sys, fields, opts.cfg);
        if (method == "normal") return solve_system_normal(sys, fields, opts.cfg);
        if (method == "commuting") return solve_system_commuting(sys, fields, opts.cfg);
        throw InputError("unknown solve method: " + method);
    }();

    if (!out.empty()) io::write_json_file(out, io::field_to_json(outcome.solution));
    if (!residual_csv.empty()) io::write_residual_csv(residual_csv, *spectrum, outcome.residuals);
    if (!log_out.empty()) io::write_json_file(log_out, io::outcome_to_json(outcome, opts.cfg));
    double max_res = 0.0;
    for (double r : outcome.residuals) max_res = std::max(max_res, r);
    std::printf("solve method=%s max_residual=%.6g compat_failures=%zu\n", method.c_str(),
                max_res, outcome.compat_failures.size());
    if (opts.cfg.strict && !outcome.compat_failures.empty()) return kExitStrict;
    return 0;
}

int run_witness(const CommonOpts& opts, const std::string& kind, int count, double s, double rho,
                const std::string& prefix) {
    auto spectrum = load_spectrum(opts.spectrum_path);
    const SystemSymbol sys = load_operators(opts, spectrum);
    WitnessBundle bundle = [&] {
        if (kind == "kernel") return kernel_witness(sys, opts.cfg);
        if (kind == "gh") return gh_failure_witness(sys, count, opts.cfg);
        if (kind == "agh") {
            if (sys.count() != 1) throw StructuralError("witness agh needs a single operator");
            return agh_failure_witness(sys.op(0), s, rho, count, opts.cfg);
        }
        throw InputError("unknown witness kind: " + kind);
    }();

    io::write_json_file(prefix + ".u.json", io::field_to_json(bundle.u));
    io::write_field_csv(prefix + ".u.csv", bundle.u);
    for (std::size_t j = 0; j < bundle.images.size(); ++j) {
        const std::string stem = prefix + ".image" + std::to_string(j);
        io::write_json_file(stem + ".json", io::field_to_json(bundle.images[j]));
        io::write_field_csv(stem + ".csv", bundle.images[j]);
    }
    io::write_json_file(prefix + ".log.json", io::witness_log_to_json(bundle, opts.cfg));
    std::printf("witness %s: %zu blocks selected, u decay %s\n", kind.c_str(),
                bundle.construction_log.size(), to_string(bundle.u_decay.cls).c_str());
    return 0;
}

int run_compare_oracle(const CommonOpts& opts, const std::vector<std::string>& field_paths,
                       const std::string& out) {
    auto spectrum = load_spectrum(opts.spectrum_path);
    const SystemSymbol sys = load_operators(opts, spectrum);
    const auto fields = load_fields(field_paths, spectrum);
    const std::string mode = detect_mode(sys);
    if (mode == "system")
        throw StructuralError("compare-oracle needs a normal (or commuting) system");

    const auto lsq = solve_system_lsq(sys, fields, opts.cfg);
    auto deviation = [&](const SolveOutcome& other) {
        double worst = 0.0;
        for (int k = 0; k < spectrum->size(); ++k) {
            const double scale = std::max(1.0, lsq.solution.block(k).norm());
            worst = std::max(worst,
                             (other.solution.block(k) - lsq.solution.block(k)).norm() / scale);
        }
        return worst;
    };

    io::json report{{"config_hash", opts.cfg.hash()}};
    const auto normal = solve_system_normal(sys, fields, opts.cfg);
    report["normal_vs_lsq"] = deviation(normal);
    std::printf("normal vs lsq: max blockwise deviation %.3e\n", deviation(normal));
    if (mode == "commuting") {
        const auto comm = solve_system_commuting(sys, fields, opts.cfg);
        report["commuting_vs_lsq"] = deviation(comm);
        std::printf("commuting vs lsq: max blockwise deviation %.3e\n", deviation(comm));
    }
    if (!out.empty()) io::write_json_file(out, report);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral diagnostics and solvers for invariant operator symbols"};
    app.require_subcommand(1);

    CommonOpts opts;

    // model
    auto* model = app.add_subcommand("model", "emit built-in spectra and symbols");
    std::string model_kind;
    int dim = 2, degree = 10;
    long long rsq = 100;
    std::vector<std::string> coeffs;
    std::string recipe_token = "normal", spectrum_out, symbol_out;
    model->add_option("kind", model_kind, "torus | sphere | synthetic")->required();
    model->add_option("--dim", dim, "torus dimension (1..3)");
    model->add_option("--rsq", rsq, "torus |xi|^2 cutoff");
    model->add_option("--degree", degree, "sphere maximal degree");
    model->add_option("--a", coeffs,
                      "direction coefficients (decimal, golden, liouville[:N], rational:p/q)");
    model->add_option("--recipe", recipe_token,
                      "synthetic recipe: profile-pow:G | profile-exp:R | normal | general | planted:G");
    model->add_option("--spectrum", opts.spectrum_path, "spectrum file (synthetic input)");
    model->add_option("--spectrum-out", spectrum_out, "spectrum output path");
    model->add_option("--symbol-out", symbol_out, "symbol output path");
    add_tolerance_flags(model, opts.cfg);

    // info
    auto* info = app.add_subcommand("info", "summarize a spectrum and operators");
    info->add_option("--spectrum", opts.spectrum_path)->required();
    info->add_option("--symbol", opts.symbol_path);
    info->add_option("--system", opts.system_path);
    add_tolerance_flags(info, opts.cfg);

    // apply
    auto* apply_cmd = app.add_subcommand("apply", "apply a symbol to a field");
    std::string field_path, out_path, csv_out;
    apply_cmd->add_option("--spectrum", opts.spectrum_path)->required();
    apply_cmd->add_option("--symbol", opts.symbol_path)->required();
    apply_cmd->add_option("--field", field_path)->required();
    apply_cmd->add_option("--out", out_path);
    apply_cmd->add_option("--csv-out", csv_out);
    add_tolerance_flags(apply_cmd, opts.cfg);

    // diagnose
    auto* diag = app.add_subcommand("diagnose", "run GH/GS diagnostics");
    std::string mode = "auto", report_out, diag_csv;
    diag->add_option("--spectrum", opts.spectrum_path)->required();
    diag->add_option("--symbol", opts.symbol_path);
    diag->add_option("--system", opts.system_path);
    diag->add_option("--mode", mode,
                     "auto | gh | gs | system | system-restricted | normal | commuting");
    diag->add_option("--report-out", report_out);
    diag->add_option("--csv-out", diag_csv);
    add_tolerance_flags(diag, opts.cfg);

    // solve
    auto* solve = app.add_subcommand("solve", "solve Pu = f or a stacked system");
    std::vector<std::string> field_paths;
    std::string method = "auto", solution_out, residual_csv, log_out;
    solve->add_option("--spectrum", opts.spectrum_path)->required();
    solve->add_option("--symbol", opts.symbol_path);
    solve->add_option("--system", opts.system_path);
    solve->add_option("--field", field_paths)->required();
    solve->add_option("--method", method, "auto | single | lsq | normal | commuting");
    solve->add_option("--out", solution_out);
    solve->add_option("--residual-csv", residual_csv);
    solve->add_option("--log-out", log_out);
    add_tolerance_flags(solve, opts.cfg);

    // witness
    auto* witness = app.add_subcommand("witness", "construct counterexample distributions");
    std::string witness_kind = "kernel", prefix = "witness";
    int count = 20;
    double sobolev_s = 0.0, rho = 3.0;
    witness->add_option("--spectrum", opts.spectrum_path)->required();
    witness->add_option("--symbol", opts.symbol_path);
    witness->add_option("--system", opts.system_path);
    witness->add_option("--kind", witness_kind, "kernel | gh | agh")->required();
    witness->add_option("--count", count);
    witness->add_option("--sobolev-s", sobolev_s, "Sobolev index s for agh");
    witness->add_option("--rho", rho, "excess regularity for agh (> manifold dim)");
    witness->add_option("--out-prefix", prefix);
    add_tolerance_flags(witness, opts.cfg);

    // compare-oracle
    auto* compare = app.add_subcommand("compare-oracle",
                                       "normal/commuting solvers against stacked least squares");
    std::string compare_out;
    compare->add_option("--spectrum", opts.spectrum_path)->required();
    compare->add_option("--symbol", opts.symbol_path);
    compare->add_option("--system", opts.system_path);
    compare->add_option("--field", field_paths)->required();
    compare->add_option("--out", compare_out);
    add_tolerance_flags(compare, opts.cfg);

    CLI11_PARSE(app, argc, argv);

    try {
        opts.cfg.validate();
        if (model->parsed())
            return run_model(model_kind, dim, rsq, degree, coeffs, recipe_token, opts,
                             spectrum_out, symbol_out);
        if (info->parsed()) return run_info(opts);
        if (apply_cmd->parsed()) return run_apply(opts, field_path, out_path, csv_out);
        if (diag->parsed()) return run_diagnose(opts, mode, report_out, diag_csv);
        if (solve->parsed())
            return run_solve(opts, field_paths, method, solution_out, residual_csv, log_out);
        if (witness->parsed())
            return run_witness(opts, witness_kind, count, sobolev_s, rho, prefix);
        if (compare->parsed()) return run_compare_oracle(opts, field_paths, compare_out);
    } catch (const InputError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kExitInput;
    } catch (const StructuralError& e) {
        std::fprintf(stderr, "structural error: %s\n", e.what());
        return kExitStructural;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    }
    return 0;
}
