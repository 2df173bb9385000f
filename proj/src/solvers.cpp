#include "specop/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

namespace specop {

namespace {

void check_data(const SystemSymbol& s, const std::vector<CoefficientField>& f) {
    if (static_cast<int>(f.size()) != s.count())
        throw StructuralError("solver: expected " + std::to_string(s.count()) +
                              " data fields, got " + std::to_string(f.size()));
    for (const auto& fj : f)
        if (!same_spectrum(s.spectrum(), fj.spectrum()))
            throw StructuralError("solver: data field lives on a different spectrum");
}

Mat stack_blocks(const SystemSymbol& s, int k) {
    const int d = s.spectrum().multiplicity(k);
    Mat a(static_cast<Eigen::Index>(s.count()) * d, d);
    for (int j = 0; j < s.count(); ++j)
        a.middleRows(static_cast<Eigen::Index>(j) * d, d) = s.op(j).block(k);
    return a;
}

Vec stack_data(const std::vector<CoefficientField>& f, int k, int d) {
    Vec b(static_cast<Eigen::Index>(f.size()) * d);
    for (std::size_t j = 0; j < f.size(); ++j)
        b.segment(static_cast<Eigen::Index>(j) * d, d) = f[j].block(k);
    return b;
}

double block_residual(const SystemSymbol& s, int k, const Vec& u,
                      const std::vector<CoefficientField>& f) {
    double sum = 0.0;
    for (int j = 0; j < s.count(); ++j)
        sum += (s.op(j).block(k) * u - f[j].block(k)).squaredNorm();
    return std::sqrt(sum);
}

}  // namespace

SolveOutcome solve_single(const InvariantSymbol& p, const CoefficientField& f,
                          const RunConfig& cfg) {
    cfg.validate();
    SystemSymbol sys({p});
    return solve_system_lsq(sys, {f}, cfg);
}

SolveOutcome solve_system_lsq(const SystemSymbol& s, const std::vector<CoefficientField>& f,
                              const RunConfig& cfg) {
    cfg.validate();
    check_data(s, f);
    const auto& spec = s.spectrum();
    std::vector<Vec> blocks;
    std::vector<double> residuals;
    std::vector<SolveOutcome::CompatFailure> failures;
    std::vector<int> kernel_dims;
    for (int k = 0; k < spec.size(); ++k) {
        const int d = spec.multiplicity(k);
        const Mat a = stack_blocks(s, k);
        const Vec b = stack_data(f, k, d);
        const double tau = cfg.ztol.threshold(linalg::spectral_norm(a), d);
        int rank = 0;
        Vec u = linalg::pinv_solve(a, b, tau, &rank);
        const double r = (a * u - b).norm();
        blocks.push_back(std::move(u));
        residuals.push_back(r);
        kernel_dims.push_back(d - rank);
        if (r > cfg.compat_tol * std::max(1.0, b.norm())) failures.push_back({k, r});
    }
    SolveOutcome out{CoefficientField(s.spectrum_ptr(), std::move(blocks)),
                     std::move(residuals), std::move(failures), std::move(kernel_dims), {}};
    return out;
}

// ---- normal-system algorithm ---------------------------------------------------
//
// Per block (joint kernel trivial): factor the working operator j,
// divide the transformed data by its nonzero eigenvalues, then resolve the
// coefficients along ker sigma_j through the other operators. Each kernel
// direction must admit an operator whose kernel is transversal to it
// (j_m selection); otherwise the block reports a structural failure.

SolveOutcome solve_system_normal(const SystemSymbol& s, const std::vector<CoefficientField>& f,
                                 const RunConfig& cfg) {
    cfg.validate();
    check_data(s, f);
    const auto& spec = s.spectrum();
    const int n = s.count();

    std::vector<Vec> blocks;
    std::vector<double> residuals;
    std::vector<SolveOutcome::CompatFailure> failures;
    std::vector<int> kernel_dims;
    std::vector<std::string> notes;

    for (int k = 0; k < spec.size(); ++k) {
        const int d = spec.multiplicity(k);

        std::vector<NormalBlockFactorization> fac;
        fac.reserve(static_cast<std::size_t>(n));
        std::vector<double> taus(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) {
            fac.push_back(factor_normal_block(s.op(j), k, 1e-10));  // throws if non-normal
            taus[static_cast<std::size_t>(j)] =
                cfg.ztol.threshold(s.op(j).block_norm(k), d);
        }
        auto nonzero = [&](int j, int m) {
            return std::abs(fac[static_cast<std::size_t>(j)].mu[static_cast<std::size_t>(m)]) >
                   taus[static_cast<std::size_t>(j)];
        };

        // joint kernel dimension via the stacked block
        const Mat a_stack = stack_blocks(s, k);
        const Vec b_stack = stack_data(f, k, d);
        const double tau_stack = cfg.ztol.threshold(linalg::spectral_norm(a_stack), d);
        const auto sv_stack = linalg::singular_values(a_stack);
        const int joint_kernel =
            static_cast<int>(std::count_if(sv_stack.begin(), sv_stack.end(),
                                           [tau_stack](double v) { return v <= tau_stack; }));
        kernel_dims.push_back(joint_kernel);

        if (joint_kernel > 0) {
            // block in Z: solve in the complement, kernel component zero
            Vec u = linalg::pinv_solve(a_stack, b_stack, tau_stack, nullptr);
            const double r = (a_stack * u - b_stack).norm();
            if (r > cfg.compat_tol * std::max(1.0, b_stack.norm())) failures.push_back({k, r});
            notes.push_back("block " + std::to_string(k) + ": joint kernel dim " +
                            std::to_string(joint_kernel) + ", solved in complement");
            residuals.push_back(block_residual(s, k, u, f));
            blocks.push_back(std::move(u));
            continue;
        }

        // working operator: most eigenvalues above threshold, smallest index on ties
        int jw = 0;
        int best_count = -1;
        for (int j = 0; j < n; ++j) {
            int cnt = 0;
            for (int m = 0; m < d; ++m)
                if (nonzero(j, m)) ++cnt;
            if (cnt > best_count) {
                best_count = cnt;
                jw = j;
            }
        }
        const auto& fw = fac[static_cast<std::size_t>(jw)];
        const Vec g_w = fw.q * f[static_cast<std::size_t>(jw)].block(k);

        Vec w = Vec::Zero(d);
        std::vector<int> zdirs;
        for (int m = 0; m < d; ++m) {
            if (nonzero(jw, m))
                w[m] = g_w[m] / fw.mu[static_cast<std::size_t>(m)];
            else
                zdirs.push_back(m);
        }

        bool structural_failure = false;
        if (!zdirs.empty()) {
            // kernel directions of the working operator, expressed in the
            // original basis: psi_m = Q^* e_m
            Mat kernel_vecs(d, static_cast<Eigen::Index>(zdirs.size()));
            for (std::size_t c = 0; c < zdirs.size(); ++c)
                kernel_vecs.col(static_cast<Eigen::Index>(c)) =
                    fw.q.adjoint().col(zdirs[c]);

            // j_m selection: smallest operator index whose kernel misses the
            // direction by at least the angle margin
            for (std::size_t c = 0; c < zdirs.size(); ++c) {
                const Vec psi = kernel_vecs.col(static_cast<Eigen::Index>(c));
                int jm = -1;
                for (int j = 0; j < n && jm < 0; ++j) {
                    if (j == jw) continue;
                    double proj_sq = 0.0;
                    const auto& fj = fac[static_cast<std::size_t>(j)];
                    const Vec coords = fj.q * psi;
                    for (int m = 0; m < d; ++m)
                        if (!nonzero(j, m)) proj_sq += std::norm(coords[m]);
                    const double sin_angle = std::sqrt(std::max(0.0, 1.0 - proj_sq));
                    if (sin_angle >= std::sin(cfg.theta_min)) jm = j;
                }
                if (jm < 0) {
                    structural_failure = true;
                    notes.push_back("block " + std::to_string(k) + ": no admissible switch for kernel direction " +
                                    std::to_string(zdirs[c]) + " (joint kernel contradiction)");
                } else {
                    notes.push_back("block " + std::to_string(k) + ": direction " +
                                    std::to_string(zdirs[c]) + " resolved through operator " +
                                    std::to_string(jm));
                }
            }

            if (structural_failure)
                throw StructuralError(
                    "solve_system_normal: kernel direction with no transversal operator at block " +
                    std::to_string(k) + " (block belongs to Z contrary to the joint-kernel check)");

            // resolve the kernel coefficients through the remaining equations:
            // stack sigma_j * kernel_vecs against the leftover data
            const Eigen::Index z = static_cast<Eigen::Index>(zdirs.size());
            Mat m_rest(static_cast<Eigen::Index>(n - 1) * d, z);
            Vec rhs_rest(static_cast<Eigen::Index>(n - 1) * d);
            const Vec u_known = fw.q.adjoint() * w;
            Eigen::Index row = 0;
            for (int j = 0; j < n; ++j) {
                if (j == jw) continue;
                const Mat& sigma = s.op(j).block(k);
                m_rest.middleRows(row, d) = sigma * kernel_vecs;
                rhs_rest.segment(row, d) =
                    f[static_cast<std::size_t>(j)].block(k) - sigma * u_known;
                row += d;
            }
            const double tau_rest = cfg.ztol.threshold(linalg::spectral_norm(m_rest),
                                                       static_cast<int>(z));
            const Vec wz = linalg::pinv_solve(m_rest, rhs_rest, tau_rest, nullptr);
            for (std::size_t c = 0; c < zdirs.size(); ++c)
                w[zdirs[c]] = wz[static_cast<Eigen::Index>(c)];
        }

        Vec u = fw.q.adjoint() * w;
        const double r = block_residual(s, k, u, f);
        residuals.push_back(r);
        if (r > cfg.compat_tol * std::max(1.0, b_stack.norm())) failures.push_back({k, r});
        blocks.push_back(std::move(u));
    }

    SolveOutcome out{CoefficientField(s.spectrum_ptr(), std::move(blocks)),
                     std::move(residuals), std::move(failures), std::move(kernel_dims),
                     std::move(notes)};
    return out;
}

SolveOutcome solve_system_commuting(const SystemSymbol& s, const std::vector<CoefficientField>& f,
                                    const RunConfig& cfg) {
    cfg.validate();
    check_data(s, f);
    const auto& spec = s.spectrum();
    const int n = s.count();

    std::vector<Vec> blocks;
    std::vector<double> residuals;
    std::vector<SolveOutcome::CompatFailure> failures;
    std::vector<int> kernel_dims;

    for (int k = 0; k < spec.size(); ++k) {
        const int d = spec.multiplicity(k);
        const JointFactorization jf = joint_factor_commuting(s, k, 1e-10);  // throws if unsuitable
        std::vector<double> taus(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j)
            taus[static_cast<std::size_t>(j)] = cfg.ztol.threshold(s.op(j).block_norm(k), d);

        std::vector<Vec> g(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) g[static_cast<std::size_t>(j)] = jf.q * f[static_cast<std::size_t>(j)].block(k);

        Vec w = Vec::Zero(d);
        int zero_dirs = 0;
        for (int l = 0; l < d; ++l) {
            int j_star = -1;
            double best = 0.0;
            for (int j = 0; j < n; ++j) {
                const double a =
                    std::abs(jf.mu[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)]);
                if (a > taus[static_cast<std::size_t>(j)] && a > best) {
                    best = a;
                    j_star = j;
                }
            }
            if (j_star >= 0) {
                w[l] = g[static_cast<std::size_t>(j_star)][l] /
                       jf.mu[static_cast<std::size_t>(j_star)][static_cast<std::size_t>(l)];
            } else {
                ++zero_dirs;
                double worst = 0.0;
                for (int j = 0; j < n; ++j)
                    worst = std::max(worst, std::abs(g[static_cast<std::size_t>(j)][l]));
                double scale = 1.0;
                for (int j = 0; j < n; ++j)
                    scale = std::max(scale, f[static_cast<std::size_t>(j)].block(k).norm());
                if (worst > cfg.compat_tol * scale) failures.push_back({k, worst});
                // minimal-norm choice along the dead direction
                w[l] = 0.0;
            }
        }
        kernel_dims.push_back(zero_dirs);
        Vec u = jf.q.adjoint() * w;
        residuals.push_back(block_residual(s, k, u, f));
        blocks.push_back(std::move(u));
    }

    SolveOutcome out{CoefficientField(s.spectrum_ptr(), std::move(blocks)),
                     std::move(residuals), std::move(failures), std::move(kernel_dims), {}};
    return out;
}

std::vector<double> residual(const SystemSymbol& s, const CoefficientField& u,
                             const std::vector<CoefficientField>& f) {
    check_data(s, f);
    if (!same_spectrum(s.spectrum(), u.spectrum()))
        throw StructuralError("residual: solution lives on a different spectrum");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(s.spectrum().size()));
    for (int k = 0; k < s.spectrum().size(); ++k)
        out.push_back(block_residual(s, k, u.block(k), f));
    return out;
}

}  // namespace specop
