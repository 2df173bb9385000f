#include "specop/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "specop/fit.hpp"

namespace specop {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::gh_consistent: return "GH_consistent";
        case Verdict::gs_not_gh_consistent: return "GS_not_GH_consistent";
        case Verdict::not_gs_consistent: return "not_GS_consistent";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "unknown";
}

int exit_code(Verdict v) {
    switch (v) {
        case Verdict::gh_consistent: return 0;
        case Verdict::gs_not_gh_consistent: return 1;
        case Verdict::not_gs_consistent: return 2;
        case Verdict::inconclusive: return 3;
    }
    return 3;
}

namespace {

constexpr double kLsResidualSwitch = 0.5;  // log-scale rms above which the fit
                                           // switches to lower-record regression

std::vector<LogSample> positive_samples(const GainCurve& curve) {
    std::vector<LogSample> out;
    for (const auto& s : curve.samples)
        if (std::isfinite(s.gain) && s.gain > 0.0)
            out.push_back({s.k, std::log(1.0 + s.lambda), std::log(s.gain)});
    return out;
}

}  // namespace

std::optional<PolyBoundFit> fit_poly_bound(const GainCurve& curve, double tail_fraction,
                                           double n_probe) {
    const int total = static_cast<int>(curve.samples.size());
    if (total == 0) return std::nullopt;
    const int window = std::max(1, static_cast<int>(std::ceil(tail_fraction * total)));
    const int k_lo = curve.samples.front().k + (total - window);

    const std::vector<LogSample> all = positive_samples(curve);
    std::vector<LogSample> tail;
    for (const auto& s : all)
        if (s.k >= k_lo) tail.push_back(s);
    if (static_cast<int>(tail.size()) < 8) return std::nullopt;

    auto ls_of = [](std::span<const LogSample> pts) {
        std::vector<double> xs, ys;
        xs.reserve(pts.size());
        ys.reserve(pts.size());
        for (const auto& p : pts) {
            xs.push_back(p.x);
            ys.push_back(p.y);
        }
        return fit_line(xs, ys);
    };

    PolyBoundFit fit;
    fit.window_lo = k_lo;
    fit.window_hi = curve.samples.back().k;

    const LineFit tail_ls = ls_of(tail);
    std::vector<LogSample> contacts;
    if (tail_ls.rms_residual <= kLsResidualSwitch) {
        fit.gamma = tail_ls.slope;
        fit.residual = tail_ls.rms_residual;
        fit.envelope_method = false;
        contacts = tail;
        fit.window_slopes = shrinking_window_slopes(tail, 1.0, 8);
    } else {
        // scattered curve: the lower bound lives on the running minima, not
        // on the bulk of the scatter
        const std::vector<LogSample> records = lower_record_points(all);
        if (records.size() >= 2) {
            const LineFit env = ls_of(records);
            fit.gamma = env.slope;
            fit.residual = env.rms_residual;
            fit.envelope_method = true;
            contacts = records;
            fit.window_slopes = shrinking_window_slopes(records, 1.0, 3);
        } else {
            fit.gamma = tail_ls.slope;
            fit.residual = tail_ls.rms_residual;
            fit.envelope_method = false;
            contacts = tail;
            fit.window_slopes = shrinking_window_slopes(tail, 1.0, 8);
        }
    }
    fit.sample_count = static_cast<int>(contacts.size());
    fit.super_polynomial = slopes_diverge_down(fit.window_slopes, n_probe);

    // envelope shift: largest C with C(1+lambda)^gamma <= g on the window
    double log_c = std::numeric_limits<double>::infinity();
    for (const auto& s : tail) log_c = std::min(log_c, s.y - fit.gamma * s.x);
    fit.C = std::exp(log_c);
    return fit;
}

ZCensus census_from_curve(const GainCurve& curve, int total_blocks) {
    ZCensus z;
    for (const auto& s : curve.samples) {
        if (s.kernel_dim > 0) {
            z.members.push_back(s.k);
            z.kernel_dims.push_back(s.kernel_dim);
        }
    }
    const int quarter_lo = total_blocks - std::max(1, static_cast<int>(std::ceil(0.25 * total_blocks)));
    z.tail_clear = std::none_of(z.members.begin(), z.members.end(),
                                [quarter_lo](int k) { return k >= quarter_lo; });

    // cumulative member count against block index over the last half
    std::vector<double> xs, ys;
    int cum = 0;
    std::size_t next = 0;
    const int half_lo = total_blocks - std::max(1, total_blocks / 2);
    for (int k = 0; k < total_blocks; ++k) {
        while (next < z.members.size() && z.members[next] <= k) {
            ++cum;
            ++next;
        }
        if (k >= half_lo) {
            xs.push_back(static_cast<double>(k));
            ys.push_back(static_cast<double>(cum));
        }
    }
    z.density_slope = xs.size() >= 2 ? fit_line(xs, ys).slope : 0.0;
    z.finite_looking = z.tail_clear && z.density_slope < 0.1;
    return z;
}

namespace {

std::string truncation_note(const SpectrumModel& spec) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "verdict at truncation K=%d blocks (lambda_max=%.6g); behavior beyond "
                  "stored blocks is not certified",
                  spec.size(), spec.eigenvalue(spec.size() - 1));
    return std::string(buf);
}

// Shared verdict assembly from the two gates.
void finalize(DiagnosticReport& rep, const std::optional<PolyBoundFit>& gh_fit,
              const std::optional<PolyBoundFit>& gs_fit, const SpectrumModel& spec,
              const RunConfig& cfg) {
    rep.gh_pass = gh_fit.has_value() && !gh_fit->super_polynomial && rep.z_census.finite_looking;
    rep.gs_pass = gs_fit.has_value() && !gs_fit->super_polynomial;
    rep.gs_determinate_fail = gs_fit.has_value() && gs_fit->super_polynomial;
    if (rep.gh_pass)
        rep.verdict = Verdict::gh_consistent;
    else if (rep.gs_pass)
        rep.verdict = Verdict::gs_not_gh_consistent;
    else if (rep.gs_determinate_fail)
        rep.verdict = Verdict::not_gs_consistent;
    else
        rep.verdict = Verdict::inconclusive;
    rep.truncation_note = truncation_note(spec);
    rep.config_hash = cfg.hash();
}

struct SingleCurves {
    GainCurve full;
    GainCurve restricted;
};

SingleCurves single_curves(const InvariantSymbol& p, const ZeroTol& ztol) {
    SingleCurves out;
    const auto& spec = p.spectrum();
    for (int k = 0; k < spec.size(); ++k) {
        const auto svs = linalg::singular_values(p.block(k));
        const int d = spec.multiplicity(k);
        const double tau = ztol.threshold(svs.empty() ? 0.0 : svs.front(), d);
        const int kernel_dim =
            static_cast<int>(std::count_if(svs.begin(), svs.end(),
                                           [tau](double v) { return v <= tau; }));
        double restricted = kInfGain;
        for (double v : svs)
            if (v > tau) restricted = std::min(restricted, v);
        const double lambda = spec.eigenvalue(k);
        out.full.samples.push_back({k, lambda, svs.empty() ? 0.0 : svs.back(), kernel_dim});
        out.restricted.samples.push_back({k, lambda, restricted, kernel_dim});
        if (kernel_dim > 0) {
            out.full.zero_blocks.push_back(k);
            out.restricted.zero_blocks.push_back(k);
        }
    }
    return out;
}

DiagnosticReport diagnose_single_impl(const InvariantSymbol& p, const RunConfig& cfg,
                                      bool primary_restricted) {
    cfg.validate();
    SingleCurves curves = single_curves(p, cfg.ztol);
    const auto gh_fit = fit_poly_bound(curves.full, cfg.tail_fraction, cfg.n_probe);
    const auto gs_fit = fit_poly_bound(curves.restricted, cfg.tail_fraction, cfg.n_probe);
    DiagnosticReport rep;
    rep.z_census = census_from_curve(curves.full, p.spectrum().size());
    rep.mode = primary_restricted ? "single-gs" : "single-gh";
    if (primary_restricted) {
        rep.curve = std::move(curves.restricted);
        rep.fit = gs_fit;
    } else {
        rep.curve = std::move(curves.full);
        rep.fit = gh_fit;
    }
    finalize(rep, gh_fit, gs_fit, p.spectrum(), cfg);
    return rep;
}

}  // namespace

DiagnosticReport diagnose_gh_single(const InvariantSymbol& p, const RunConfig& cfg) {
    return diagnose_single_impl(p, cfg, /*primary_restricted=*/false);
}

DiagnosticReport diagnose_gs_single(const InvariantSymbol& p, const RunConfig& cfg) {
    return diagnose_single_impl(p, cfg, /*primary_restricted=*/true);
}

DiagnosticReport diagnose_system(const SystemSymbol& s, bool restricted, const RunConfig& cfg) {
    cfg.validate();
    const auto& spec = s.spectrum();
    GainCurve unres, res;
    for (int k = 0; k < spec.size(); ++k) {
        const StackedGain gu = stacked_gain(s, k, /*restricted=*/false, cfg.ztol);
        const StackedGain gr = stacked_gain(s, k, /*restricted=*/true, cfg.ztol);
        const double lambda = spec.eigenvalue(k);
        unres.samples.push_back({k, lambda, gu.gain, gu.kernel_dim});
        res.samples.push_back({k, lambda, gr.gain, gr.kernel_dim});
        if (gu.kernel_dim > 0) {
            unres.zero_blocks.push_back(k);
            res.zero_blocks.push_back(k);
        }
    }
    const auto gh_fit = fit_poly_bound(unres, cfg.tail_fraction, cfg.n_probe);
    const auto gs_fit = fit_poly_bound(res, cfg.tail_fraction, cfg.n_probe);
    DiagnosticReport rep;
    rep.z_census = census_from_curve(unres, spec.size());
    rep.mode = restricted ? "system-restricted" : "system";
    if (restricted) {
        rep.curve = std::move(res);
        rep.fit = gs_fit;
    } else {
        rep.curve = std::move(unres);
        rep.fit = gh_fit;
    }
    finalize(rep, gh_fit, gs_fit, spec, cfg);
    return rep;
}

DiagnosticReport diagnose_normal_system(const SystemSymbol& s, const RunConfig& cfg) {
    cfg.validate();
    const auto& spec = s.spectrum();
    GainCurve dc;
    for (int k = 0; k < spec.size(); ++k) {
        double gain = kInfGain;
        for (int j = 0; j < s.count(); ++j) {
            const auto fac = factor_normal_block(s.op(j), k, 1e-10);
            const double tau =
                cfg.ztol.threshold(s.op(j).block_norm(k), spec.multiplicity(k));
            for (const Cplx& mu : fac.mu) {
                const double a = std::abs(mu);
                if (a > tau) gain = std::min(gain, a);
            }
        }
        const StackedGain sg = stacked_gain(s, k, /*restricted=*/false, cfg.ztol);
        dc.samples.push_back({k, spec.eigenvalue(k), gain, sg.kernel_dim});
        if (sg.kernel_dim > 0) dc.zero_blocks.push_back(k);
    }
    const auto dc_fit = fit_poly_bound(dc, cfg.tail_fraction, cfg.n_probe);
    DiagnosticReport rep;
    rep.z_census = census_from_curve(dc, spec.size());
    rep.mode = "system-normal";
    rep.curve = std::move(dc);
    rep.fit = dc_fit;
    // (DC) is the GS gate; GH additionally needs a tail-empty census
    finalize(rep, dc_fit, dc_fit, spec, cfg);
    return rep;
}

DiagnosticReport diagnose_commuting(const SystemSymbol& s, const RunConfig& cfg) {
    cfg.validate();
    const auto& spec = s.spectrum();
    GainCurve curve;
    for (int k = 0; k < spec.size(); ++k) {
        const JointFactorization jf = joint_factor_commuting(s, k, 1e-10);
        const int d = spec.multiplicity(k);
        std::vector<double> taus(static_cast<std::size_t>(s.count()));
        for (int j = 0; j < s.count(); ++j)
            taus[static_cast<std::size_t>(j)] = cfg.ztol.threshold(s.op(j).block_norm(k), d);
        double gain = kInfGain;
        int zero_dirs = 0;
        for (int l = 0; l < d; ++l) {
            double score = 0.0;
            bool any_nonzero = false;
            for (int j = 0; j < s.count(); ++j) {
                const double a = std::abs(jf.mu[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)]);
                score = std::max(score, a);
                if (a > taus[static_cast<std::size_t>(j)]) any_nonzero = true;
            }
            if (any_nonzero)
                gain = std::min(gain, score);
            else
                ++zero_dirs;
        }
        curve.samples.push_back({k, spec.eigenvalue(k), gain, zero_dirs});
        if (zero_dirs > 0) curve.zero_blocks.push_back(k);
    }
    const auto fit = fit_poly_bound(curve, cfg.tail_fraction, cfg.n_probe);
    DiagnosticReport rep;
    rep.z_census = census_from_curve(curve, spec.size());
    rep.mode = "system-commuting";
    rep.curve = std::move(curve);
    rep.fit = fit;
    finalize(rep, fit, fit, spec, cfg);
    return rep;
}

}  // namespace specop
