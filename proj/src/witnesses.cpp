#include "specop/witnesses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace specop {

namespace {

Mat stack_blocks(const SystemSymbol& s, int k) {
    const int d = s.spectrum().multiplicity(k);
    Mat a(static_cast<Eigen::Index>(s.count()) * d, d);
    for (int j = 0; j < s.count(); ++j)
        a.middleRows(static_cast<Eigen::Index>(j) * d, d) = s.op(j).block(k);
    return a;
}

WitnessBundle finish_bundle(const SystemSymbol& s, CoefficientField u,
                            std::vector<WitnessBundle::LogEntry> log, const RunConfig& cfg) {
    WitnessBundle bundle{std::move(u), {}, {}, {}, std::move(log)};
    for (int j = 0; j < s.count(); ++j) {
        bundle.images.push_back(s.op(j).apply(bundle.u));
        bundle.image_decays.push_back(
            decay_classify(bundle.images.back(), cfg.tail_fraction, cfg.n_probe));
    }
    bundle.u_decay = decay_classify(bundle.u, cfg.tail_fraction, cfg.n_probe);
    return bundle;
}

}  // namespace

WitnessBundle kernel_witness(const SystemSymbol& s, const RunConfig& cfg) {
    cfg.validate();
    const auto& spec = s.spectrum();
    CoefficientField u = CoefficientField::zero(s.spectrum_ptr());
    std::vector<WitnessBundle::LogEntry> log;
    int hits = 0;
    for (int k = 0; k < spec.size(); ++k) {
        const Mat a = stack_blocks(s, k);
        const double tau = cfg.ztol.threshold(linalg::spectral_norm(a), spec.multiplicity(k));
        const Mat basis = linalg::kernel_basis(a, tau);
        if (basis.cols() == 0) continue;
        u.mutable_block(k) = basis.col(0);
        log.push_back({++hits, k, spec.eigenvalue(k), 0.0});
    }
    if (hits == 0)
        throw StructuralError("kernel_witness: Z is empty at truncation (no joint kernel block)");
    return finish_bundle(s, std::move(u), std::move(log), cfg);
}

WitnessBundle gh_failure_witness(const SystemSymbol& s, int count, const RunConfig& cfg) {
    cfg.validate();
    if (count < 1) throw InputError("gh_failure_witness: count must be positive");
    const DiagnosticReport rep = diagnose_system(s, /*restricted=*/false, cfg);
    if (rep.verdict == Verdict::gh_consistent)
        throw StructuralError(
            "gh_failure_witness: system is GH-consistent at truncation, no decaying subsequence");

    const auto& spec = s.spectrum();
    // rank blocks by how fast the stacked gain decays against polynomial
    // scales; zero-gain blocks rank first
    struct Cand {
        int k;
        double exponent;  // -log g / log(1+lambda); +inf for kernel blocks
        double gain;
    };
    std::vector<Cand> cands;
    for (const auto& sample : rep.curve.samples) {
        const double lambda = sample.lambda;
        if (sample.kernel_dim > 0) {
            cands.push_back({sample.k, std::numeric_limits<double>::infinity(), 0.0});
        } else if (lambda > 0.0 && sample.gain > 0.0 && std::isfinite(sample.gain)) {
            cands.push_back({sample.k, -std::log(sample.gain) / std::log(1.0 + lambda),
                             sample.gain});
        }
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.exponent != b.exponent) return a.exponent > b.exponent;
        return a.k < b.k;
    });
    if (cands.empty())
        throw StructuralError("gh_failure_witness: no decaying subsequence found");

    const int take = std::min<int>(count, static_cast<int>(cands.size()));
    std::vector<Cand> chosen(cands.begin(), cands.begin() + take);
    std::sort(chosen.begin(), chosen.end(), [](const Cand& a, const Cand& b) { return a.k < b.k; });

    CoefficientField u = CoefficientField::zero(s.spectrum_ptr());
    std::vector<WitnessBundle::LogEntry> log;
    int n = 0;
    for (const Cand& c : chosen) {
        const Mat a = stack_blocks(s, c.k);
        u.mutable_block(c.k) = linalg::smallest_singular_vector(a);
        log.push_back({++n, c.k, spec.eigenvalue(c.k), c.gain});
    }
    return finish_bundle(s, std::move(u), std::move(log), cfg);
}

WitnessBundle agh_failure_witness(const InvariantSymbol& p, double s, double rho, int count,
                                  const RunConfig& cfg) {
    cfg.validate();
    if (count < 1) throw InputError("agh_failure_witness: count must be positive");
    const auto& spec = p.spectrum();
    if (!(rho > spec.manifold_dim()))
        throw StructuralError("agh_failure_witness: rho must exceed the manifold dimension");
    const DiagnosticReport rep = diagnose_gs_single(p, cfg);
    if (rep.verdict != Verdict::not_gs_consistent)
        throw StructuralError(
            "agh_failure_witness: restricted gains admit a polynomial bound at truncation "
            "(no decaying subsequence)");

    const double nu = spec.elliptic_order();
    const double amp_exp = -(s + rho / 2.0) / nu;

    CoefficientField u = CoefficientField::zero(p.spectrum_ptr());
    std::vector<WitnessBundle::LogEntry> log;
    SystemSymbol sys({p});

    // escalating probe: the l-th selected block must beat (1+lambda)^{-N_l},
    // N_l = min(l, n_probe); stop when blocks run out
    int selected = 0;
    double probe = 1.0;
    for (int k = 0; k < spec.size() && selected < count; ++k) {
        const double gain = restricted_gain(p, k, cfg.ztol);
        if (!std::isfinite(gain)) continue;  // zero block: vacuous
        const double lambda = spec.eigenvalue(k);
        if (lambda <= 0.0) continue;
        if (gain >= std::pow(1.0 + lambda, -probe)) continue;
        const Mat& block = p.block(k);
        const double tau = cfg.ztol.threshold(linalg::spectral_norm(block), spec.multiplicity(k));
        const Vec phi = linalg::smallest_restricted_singular_vector(block, tau);
        if (phi.size() == 0) continue;
        const double amplitude = std::pow(1.0 + lambda, amp_exp);
        u.mutable_block(k) = amplitude * phi;
        log.push_back({++selected, k, lambda, gain});
        probe = std::min(probe + 1.0, cfg.n_probe);
    }
    if (selected == 0)
        throw StructuralError("agh_failure_witness: no decaying subsequence at truncation");
    return finish_bundle(sys, std::move(u), std::move(log), cfg);
}

}  // namespace specop
