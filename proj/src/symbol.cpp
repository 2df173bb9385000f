#include "specop/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "specop/fit.hpp"

namespace specop {

namespace {

void validate_blocks(const SpectrumModel& spec, const std::vector<Mat>& blocks) {
    if (static_cast<int>(blocks.size()) != spec.size())
        throw InputError("InvariantSymbol: expected " + std::to_string(spec.size()) +
                         " blocks, got " + std::to_string(blocks.size()));
    for (int k = 0; k < spec.size(); ++k) {
        const Mat& b = blocks[static_cast<std::size_t>(k)];
        const int d = spec.multiplicity(k);
        if (b.rows() != d || b.cols() != d)
            throw InputError("InvariantSymbol: block " + std::to_string(k) + " is " +
                             std::to_string(b.rows()) + "x" + std::to_string(b.cols()) +
                             ", expected " + std::to_string(d) + "x" + std::to_string(d));
        if (!b.allFinite())
            throw InputError("InvariantSymbol: non-finite entry in block " + std::to_string(k));
    }
}

std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return std::mt19937_64(z ^ (z >> 31));
}

}  // namespace

// ---- linalg helpers ----------------------------------------------------------

namespace linalg {

bool exactly_diagonal(const Mat& m) {
    if (m.rows() != m.cols()) return false;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (i != j && (m(i, j).real() != 0.0 || m(i, j).imag() != 0.0)) return false;
    return true;
}

namespace {

// Columns exactly orthogonal (gram matrix diagonal in floating point);
// diagonal blocks and stacks of diagonal blocks land here, where singular
// values reduce to exact column norms.
bool gram_diagonal(const Mat& m, Eigen::VectorXd* col_norms) {
    const Mat g = m.adjoint() * m;
    for (Eigen::Index i = 0; i < g.rows(); ++i)
        for (Eigen::Index j = 0; j < g.cols(); ++j)
            if (i != j && (g(i, j).real() != 0.0 || g(i, j).imag() != 0.0)) return false;
    if (col_norms) {
        col_norms->resize(m.cols());
        for (Eigen::Index i = 0; i < m.cols(); ++i) (*col_norms)[i] = m.col(i).norm();
    }
    return true;
}

Eigen::VectorXd svd_values(const Mat& m) {
    if (m.rows() <= 32 && m.cols() <= 32)
        return Eigen::JacobiSVD<Mat>(m).singularValues();
    return Eigen::BDCSVD<Mat>(m).singularValues();
}

struct ThinSvd {
    Eigen::VectorXd s;
    Mat u, v;
};

ThinSvd svd_thin(const Mat& m) {
    ThinSvd r;
    if (m.rows() <= 32 && m.cols() <= 32) {
        Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        r.s = svd.singularValues();
        r.u = svd.matrixU();
        r.v = svd.matrixV();
    } else {
        Eigen::BDCSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        r.s = svd.singularValues();
        r.u = svd.matrixU();
        r.v = svd.matrixV();
    }
    return r;
}

void canonical_phase(Eigen::Ref<Vec> v) {
    Eigen::Index pivot = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double a = std::abs(v[i]);
        if (a > best) {
            best = a;
            pivot = i;
        }
    }
    if (best <= 0.0) return;
    const Cplx phase = v[pivot] / best;
    v *= std::conj(phase);
}

}  // namespace

std::vector<double> singular_values(const Mat& m) {
    Eigen::VectorXd norms;
    if (gram_diagonal(m, &norms)) {
        std::vector<double> s(norms.data(), norms.data() + norms.size());
        std::sort(s.begin(), s.end(), std::greater<>());
        return s;
    }
    const Eigen::VectorXd sv = svd_values(m);
    return std::vector<double>(sv.data(), sv.data() + sv.size());
}

double spectral_norm(const Mat& m) {
    if (m.size() == 0) return 0.0;
    const auto s = singular_values(m);
    return s.empty() ? 0.0 : s.front();
}

Mat kernel_basis(const Mat& m, double threshold) {
    Eigen::VectorXd norms;
    if (gram_diagonal(m, &norms)) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index i = 0; i < norms.size(); ++i)
            if (norms[i] <= threshold) idx.push_back(i);
        Mat basis = Mat::Zero(m.cols(), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t c = 0; c < idx.size(); ++c) basis(idx[c], static_cast<Eigen::Index>(c)) = 1.0;
        return basis;
    }
    const ThinSvd svd = svd_thin(m);
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < svd.s.size(); ++i)
        if (svd.s[i] <= threshold) idx.push_back(i);
    Mat basis(m.cols(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) {
        Vec col = svd.v.col(idx[c]);
        canonical_phase(col);
        basis.col(static_cast<Eigen::Index>(c)) = col;
    }
    return basis;
}

Vec pinv_solve(const Mat& m, const Vec& rhs, double threshold, int* rank_out) {
    Eigen::VectorXd norms;
    if (gram_diagonal(m, &norms)) {
        Vec x = Vec::Zero(m.cols());
        int rank = 0;
        for (Eigen::Index i = 0; i < m.cols(); ++i) {
            if (norms[i] > threshold) {
                x[i] = m.col(i).dot(rhs) / (norms[i] * norms[i]);
                ++rank;
            }
        }
        if (rank_out) *rank_out = rank;
        return x;
    }
    const ThinSvd svd = svd_thin(m);
    Vec x = Vec::Zero(m.cols());
    int rank = 0;
    for (Eigen::Index i = 0; i < svd.s.size(); ++i) {
        if (svd.s[i] > threshold) {
            x += svd.v.col(i) * (svd.u.col(i).dot(rhs) / svd.s[i]);
            ++rank;
        }
    }
    if (rank_out) *rank_out = rank;
    return x;
}

Vec smallest_singular_vector(const Mat& m) {
    Eigen::VectorXd norms;
    if (gram_diagonal(m, &norms)) {
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < norms.size(); ++i)
            if (norms[i] < norms[best]) best = i;
        Vec v = Vec::Zero(m.cols());
        v[best] = 1.0;
        return v;
    }
    const ThinSvd svd = svd_thin(m);
    Vec v = svd.v.col(svd.s.size() - 1);  // singular values descend
    canonical_phase(v);
    return v;
}

Vec smallest_restricted_singular_vector(const Mat& m, double threshold) {
    Eigen::VectorXd norms;
    if (gram_diagonal(m, &norms)) {
        Eigen::Index best = -1;
        for (Eigen::Index i = 0; i < norms.size(); ++i)
            if (norms[i] > threshold && (best < 0 || norms[i] < norms[best])) best = i;
        if (best < 0) return Vec();
        Vec v = Vec::Zero(m.cols());
        v[best] = 1.0;
        return v;
    }
    const ThinSvd svd = svd_thin(m);
    Eigen::Index best = -1;
    for (Eigen::Index i = 0; i < svd.s.size(); ++i)
        if (svd.s[i] > threshold) best = i;  // values descend: last above threshold is smallest
    if (best < 0) return Vec();
    Vec v = svd.v.col(best);
    canonical_phase(v);
    return v;
}

namespace {

// Orthonormal basis of span(V) built from projections of the input basis
// vectors taken in order, each phase-fixed at its largest-modulus entry.
Mat canonical_subspace_basis(const Mat& v) {
    const Eigen::Index d = v.rows();
    const Eigen::Index m = v.cols();
    if (m == 0) return v;
    Mat out(d, m);
    Eigen::Index got = 0;
    for (Eigen::Index i = 0; i < d && got < m; ++i) {
        Vec w = v * (v.adjoint() * Vec::Unit(d, i));
        for (Eigen::Index b = 0; b < got; ++b) w -= out.col(b) * out.col(b).dot(w);
        const double n = w.norm();
        if (n > 1e-6) {
            out.col(got) = w / n;
            ++got;
        }
    }
    if (got < m) {
        // projections degenerate: keep the incoming basis
        out = v;
    }
    for (Eigen::Index c = 0; c < m; ++c) {
        Vec col = out.col(c);
        canonical_phase(col);
        out.col(c) = col;
    }
    return out;
}

void refine_clusters(const std::vector<Mat>& ops, std::size_t t, const Mat& v, double cluster_tol,
                     std::vector<Mat>& leaves) {
    const Eigen::Index m = v.cols();
    if (m == 1 || t == ops.size()) {
        leaves.push_back(canonical_subspace_basis(v));
        return;
    }
    Mat a = v.adjoint() * ops[t] * v;
    a = (a + a.adjoint()) / 2.0;  // compression of a Hermitian op stays Hermitian
    Eigen::SelfAdjointEigenSolver<Mat> es(a);
    const Eigen::VectorXd vals = es.eigenvalues();
    const Mat vecs = es.eigenvectors();
    const double scale = std::max(1.0, vals.cwiseAbs().maxCoeff());
    const double gap = cluster_tol * scale;
    Eigen::Index start = 0;
    for (Eigen::Index i = 1; i <= m; ++i) {
        if (i == m || vals[i] - vals[i - 1] > gap) {
            const Mat w = v * vecs.middleCols(start, i - start);
            refine_clusters(ops, t + 1, w, cluster_tol, leaves);
            start = i;
        }
    }
}

}  // namespace

Mat joint_hermitian_basis(const std::vector<Mat>& ops, double cluster_tol,
                          std::uint64_t fallback_seed) {
    if (ops.empty()) throw StructuralError("joint_hermitian_basis: no operators");
    const Eigen::Index d = ops.front().rows();
    std::vector<Mat> work = ops;
    if (fallback_seed != 0) {
        // single random Hermitian combination splits stalled degeneracies
        auto rng = seeded_rng(fallback_seed, 0xC0FFEE);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        Mat combo = Mat::Zero(d, d);
        for (const Mat& op : ops) combo += u(rng) * op;
        work.insert(work.begin(), (combo + combo.adjoint()) / 2.0);
    }
    std::vector<Mat> leaves;
    refine_clusters(work, 0, Mat::Identity(d, d), cluster_tol, leaves);
    Mat basis(d, d);
    Eigen::Index col = 0;
    for (const Mat& leaf : leaves) {
        basis.middleCols(col, leaf.cols()) = leaf;
        col += leaf.cols();
    }
    return basis;
}

}  // namespace linalg

// ---- InvariantSymbol / SystemSymbol ------------------------------------------

InvariantSymbol::InvariantSymbol(std::shared_ptr<const SpectrumModel> spectrum,
                                 std::vector<Mat> blocks)
    : spectrum_(std::move(spectrum)), blocks_(std::move(blocks)) {
    if (!spectrum_) throw InputError("InvariantSymbol: null spectrum");
    validate_blocks(*spectrum_, blocks_);
}

InvariantSymbol InvariantSymbol::identity(std::shared_ptr<const SpectrumModel> spectrum) {
    if (!spectrum) throw InputError("InvariantSymbol::identity: null spectrum");
    std::vector<Mat> blocks;
    blocks.reserve(static_cast<std::size_t>(spectrum->size()));
    for (int k = 0; k < spectrum->size(); ++k) {
        const int d = spectrum->multiplicity(k);
        blocks.push_back(Mat::Identity(d, d));
    }
    return InvariantSymbol(std::move(spectrum), std::move(blocks));
}

InvariantSymbol InvariantSymbol::zero(std::shared_ptr<const SpectrumModel> spectrum) {
    if (!spectrum) throw InputError("InvariantSymbol::zero: null spectrum");
    std::vector<Mat> blocks;
    blocks.reserve(static_cast<std::size_t>(spectrum->size()));
    for (int k = 0; k < spectrum->size(); ++k) {
        const int d = spectrum->multiplicity(k);
        blocks.push_back(Mat::Zero(d, d));
    }
    return InvariantSymbol(std::move(spectrum), std::move(blocks));
}

const Mat& InvariantSymbol::block(int k) const {
    spectrum_->block(k);
    return blocks_[static_cast<std::size_t>(k)];
}

double InvariantSymbol::block_norm(int k) const { return linalg::spectral_norm(block(k)); }

CoefficientField InvariantSymbol::apply(const CoefficientField& u) const {
    if (!same_spectrum(*spectrum_, u.spectrum()))
        throw StructuralError("apply: symbol and field live on different spectra");
    std::vector<Vec> blocks;
    blocks.reserve(static_cast<std::size_t>(size()));
    for (int k = 0; k < size(); ++k) blocks.push_back(block(k) * u.block(k));
    return CoefficientField(u.spectrum_ptr(), std::move(blocks));
}

SystemSymbol::SystemSymbol(std::vector<InvariantSymbol> operators)
    : operators_(std::move(operators)) {
    if (operators_.empty()) throw InputError("SystemSymbol: at least one operator required");
    for (std::size_t j = 1; j < operators_.size(); ++j)
        if (!same_spectrum(operators_[0].spectrum(), operators_[j].spectrum()))
            throw StructuralError("SystemSymbol: operators live on different spectra");
}

const InvariantSymbol& SystemSymbol::op(int j) const {
    if (j < 0 || j >= count())
        throw InputError("SystemSymbol: operator index out of range");
    return operators_[static_cast<std::size_t>(j)];
}

// ---- blockwise algebra -------------------------------------------------------

namespace {

InvariantSymbol blockwise(const InvariantSymbol& p, const InvariantSymbol& q,
                          const char* what, Mat (*op)(const Mat&, const Mat&)) {
    if (!same_spectrum(p.spectrum(), q.spectrum()))
        throw StructuralError(std::string(what) + ": symbols live on different spectra");
    std::vector<Mat> blocks;
    blocks.reserve(static_cast<std::size_t>(p.size()));
    for (int k = 0; k < p.size(); ++k) blocks.push_back(op(p.block(k), q.block(k)));
    return InvariantSymbol(p.spectrum_ptr(), std::move(blocks));
}

}  // namespace

InvariantSymbol compose(const InvariantSymbol& p, const InvariantSymbol& q) {
    return blockwise(p, q, "compose", [](const Mat& a, const Mat& b) -> Mat { return a * b; });
}

InvariantSymbol adjoint(const InvariantSymbol& p) {
    std::vector<Mat> blocks;
    blocks.reserve(static_cast<std::size_t>(p.size()));
    for (int k = 0; k < p.size(); ++k) blocks.push_back(p.block(k).adjoint());
    return InvariantSymbol(p.spectrum_ptr(), std::move(blocks));
}

InvariantSymbol commutator(const InvariantSymbol& p, const InvariantSymbol& q) {
    return blockwise(p, q, "commutator",
                     [](const Mat& a, const Mat& b) -> Mat { return a * b - b * a; });
}

// ---- structural checks -------------------------------------------------------

NormalityReport is_normal(const InvariantSymbol& p, double tol) {
    NormalityReport rep;
    rep.block_normal.resize(static_cast<std::size_t>(p.size()));
    rep.defects.resize(static_cast<std::size_t>(p.size()));
    for (int k = 0; k < p.size(); ++k) {
        const Mat& s = p.block(k);
        const Mat defect = s * s.adjoint() - s.adjoint() * s;
        const double norm_s = linalg::spectral_norm(s);
        const double rel = linalg::spectral_norm(defect) / std::max(1.0, norm_s * norm_s);
        rep.defects[static_cast<std::size_t>(k)] = rel;
        const bool ok = rel <= tol;
        rep.block_normal[static_cast<std::size_t>(k)] = ok;
        if (!ok) rep.all_normal = false;
    }
    return rep;
}

double estimate_order(const InvariantSymbol& p, double tail_fraction) {
    const auto& spec = p.spectrum();
    const int total = spec.size();
    const int window = std::max(1, static_cast<int>(std::ceil(tail_fraction * total)));
    std::vector<double> xs, ys;
    for (int k = total - window; k < total; ++k) {
        const double n = p.block_norm(k);
        if (n > 0.0) {
            xs.push_back(std::log(1.0 + spec.eigenvalue(k)));
            ys.push_back(std::log(n));
        }
    }
    if (static_cast<int>(xs.size()) < 8)
        throw StructuralError("estimate_order: fewer than 8 positive tail samples");
    return fit_line(xs, ys).slope * spec.elliptic_order();
}

// ---- gains -------------------------------------------------------------------

double full_gain(const InvariantSymbol& p, int k) {
    const auto s = linalg::singular_values(p.block(k));
    return s.empty() ? 0.0 : s.back();
}

double restricted_gain(const InvariantSymbol& p, int k, const ZeroTol& ztol) {
    const Mat& b = p.block(k);
    const auto s = linalg::singular_values(b);
    if (s.empty()) return kInfGain;
    const double tau = ztol.threshold(s.front(), static_cast<int>(b.cols()));
    double best = kInfGain;
    for (double v : s)
        if (v > tau) best = std::min(best, v);
    return best;
}

namespace {

Mat stack_blocks(const SystemSymbol& s, int k) {
    const int d = s.spectrum().multiplicity(k);
    Mat a(static_cast<Eigen::Index>(s.count()) * d, d);
    for (int j = 0; j < s.count(); ++j) a.middleRows(static_cast<Eigen::Index>(j) * d, d) = s.op(j).block(k);
    return a;
}

}  // namespace

StackedGain stacked_gain(const SystemSymbol& s, int k, bool restricted, const ZeroTol& ztol) {
    const Mat a = stack_blocks(s, k);
    const auto sv = linalg::singular_values(a);
    StackedGain out;
    if (sv.empty()) return out;
    const double tau = ztol.threshold(sv.front(), static_cast<int>(a.cols()));
    out.kernel_dim = static_cast<int>(std::count_if(sv.begin(), sv.end(),
                                                    [tau](double v) { return v <= tau; }));
    if (restricted) {
        double best = kInfGain;
        for (double v : sv)
            if (v > tau) best = std::min(best, v);
        out.gain = best;
    } else {
        out.gain = sv.back();
    }
    return out;
}

// ---- unitary factorizations ---------------------------------------------------

namespace {

struct Direction {
    Vec vec;
    std::vector<Cplx> mu;  // eigenvalues per operator
};

bool mu_less(const std::vector<Cplx>& a, const std::vector<Cplx>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].real() != b[i].real()) return a[i].real() < b[i].real();
        if (a[i].imag() != b[i].imag()) return a[i].imag() < b[i].imag();
    }
    return false;
}

// Shared assembly: given the unsorted eigenvector basis, compute per-operator
// eigenvalues, sort directions by the lexicographic (Re, Im) tuple and pack
// Q = V^H (rows are conjugated eigenvectors).
std::pair<Mat, std::vector<std::vector<Cplx>>> pack_directions(
    const Mat& basis, const std::vector<const Mat*>& symbols) {
    const Eigen::Index d = basis.rows();
    std::vector<Direction> dirs(static_cast<std::size_t>(d));
    for (Eigen::Index i = 0; i < d; ++i) {
        dirs[static_cast<std::size_t>(i)].vec = basis.col(i);
        for (const Mat* s : symbols)
            dirs[static_cast<std::size_t>(i)].mu.push_back(
                basis.col(i).dot((*s) * basis.col(i)));
    }
    std::stable_sort(dirs.begin(), dirs.end(),
                     [](const Direction& a, const Direction& b) { return mu_less(a.mu, b.mu); });
    Mat v(d, d);
    std::vector<std::vector<Cplx>> mu(symbols.size(), std::vector<Cplx>(static_cast<std::size_t>(d)));
    for (Eigen::Index i = 0; i < d; ++i) {
        v.col(i) = dirs[static_cast<std::size_t>(i)].vec;
        for (std::size_t j = 0; j < symbols.size(); ++j)
            mu[j][static_cast<std::size_t>(i)] = dirs[static_cast<std::size_t>(i)].mu[j];
    }
    return {v.adjoint(), std::move(mu)};
}

// Exact path for exactly diagonal families: directions are coordinate
// vectors, Q a permutation.
std::pair<Mat, std::vector<std::vector<Cplx>>> pack_diagonal(
    const std::vector<const Mat*>& symbols) {
    const Eigen::Index d = symbols.front()->rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    auto key = [&](Eigen::Index i) {
        std::vector<Cplx> t;
        t.reserve(symbols.size());
        for (const Mat* s : symbols) t.push_back((*s)(i, i));
        return t;
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return mu_less(key(a), key(b)); });
    Mat q = Mat::Zero(d, d);
    std::vector<std::vector<Cplx>> mu(symbols.size(), std::vector<Cplx>(static_cast<std::size_t>(d)));
    for (Eigen::Index r = 0; r < d; ++r) {
        q(r, order[static_cast<std::size_t>(r)]) = 1.0;
        for (std::size_t j = 0; j < symbols.size(); ++j)
            mu[j][static_cast<std::size_t>(r)] = (*symbols[j])(order[static_cast<std::size_t>(r)],
                                                               order[static_cast<std::size_t>(r)]);
    }
    return {std::move(q), std::move(mu)};
}

constexpr double kClusterTol = 1e-8;

std::vector<Mat> hermitian_parts(const Mat& s) {
    const Cplx two_i(0.0, 2.0);
    return {(s + s.adjoint()) / 2.0, (s - s.adjoint()) / two_i};
}

double offdiag_mass(const Mat& m) {
    Mat e = m;
    e.diagonal().setZero();
    return e.norm();  // Frobenius
}

}  // namespace

NormalBlockFactorization factor_normal_block(const InvariantSymbol& p, int k, double tol) {
    const Mat& s = p.block(k);
    {
        const Mat defect = s * s.adjoint() - s.adjoint() * s;
        const double norm_s = linalg::spectral_norm(s);
        if (linalg::spectral_norm(defect) > tol * std::max(1.0, norm_s * norm_s))
            throw StructuralError("factor_normal_block: block " + std::to_string(k) +
                                  " is not normal at tolerance");
    }
    NormalBlockFactorization out;
    out.k = k;
    std::vector<const Mat*> symbols{&s};
    if (linalg::exactly_diagonal(s)) {
        auto [q, mu] = pack_diagonal(symbols);
        out.q = std::move(q);
        out.mu = std::move(mu.front());
        return out;
    }
    const Mat basis = linalg::joint_hermitian_basis(hermitian_parts(s), kClusterTol, 0);
    auto [q, mu] = pack_directions(basis, symbols);
    out.q = std::move(q);
    out.mu = std::move(mu.front());
    return out;
}

JointFactorization joint_factor_commuting(const SystemSymbol& s, int k, double tol) {
    const int n = s.count();
    std::vector<const Mat*> symbols;
    symbols.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) symbols.push_back(&s.op(j).block(k));

    for (int j = 0; j < n; ++j) {
        const Mat& a = *symbols[static_cast<std::size_t>(j)];
        const Mat defect = a * a.adjoint() - a.adjoint() * a;
        const double norm_a = linalg::spectral_norm(a);
        if (linalg::spectral_norm(defect) > tol * std::max(1.0, norm_a * norm_a))
            throw StructuralError("joint_factor_commuting: operator " + std::to_string(j) +
                                  " not normal at block " + std::to_string(k));
        for (int i = 0; i < j; ++i) {
            const Mat& b = *symbols[static_cast<std::size_t>(i)];
            const Mat comm = a * b - b * a;
            const double scale = std::max(1.0, norm_a * linalg::spectral_norm(b));
            if (linalg::spectral_norm(comm) > tol * scale)
                throw StructuralError("joint_factor_commuting: operators " + std::to_string(i) +
                                      " and " + std::to_string(j) + " do not commute at block " +
                                      std::to_string(k));
        }
    }

    JointFactorization out;
    out.k = k;
    bool all_diag = true;
    for (const Mat* m : symbols)
        if (!linalg::exactly_diagonal(*m)) all_diag = false;
    if (all_diag) {
        auto [q, mu] = pack_diagonal(symbols);
        out.q = std::move(q);
        out.mu = std::move(mu);
        return out;
    }

    std::vector<Mat> herms;
    for (const Mat* m : symbols)
        for (Mat& h : hermitian_parts(*m)) herms.push_back(std::move(h));

    auto attempt = [&](std::uint64_t fallback_seed) {
        const Mat basis = linalg::joint_hermitian_basis(herms, kClusterTol, fallback_seed);
        return pack_directions(basis, symbols);
    };

    auto acceptable = [&](const Mat& q) {
        for (int j = 0; j < n; ++j) {
            const Mat diag = q * (*symbols[static_cast<std::size_t>(j)]) * q.adjoint();
            const double scale =
                std::max(1.0, linalg::spectral_norm(*symbols[static_cast<std::size_t>(j)]));
            if (offdiag_mass(diag) > 1e-9 * scale) return false;
        }
        return true;
    };

    auto [q, mu] = attempt(0);
    if (!acceptable(q)) {
        // near-degenerate cluster stalled: retry with a random Hermitian combination
        std::uint64_t salt = 0x5EED0000ULL + static_cast<std::uint64_t>(k);
        for (int round = 0; round < 3 && !acceptable(q); ++round)
            std::tie(q, mu) = attempt(salt + static_cast<std::uint64_t>(round + 1));
    }
    if (!acceptable(q))
        throw StructuralError("joint_factor_commuting: refinement failed to diagonalize block " +
                              std::to_string(k));
    out.q = std::move(q);
    out.mu = std::move(mu);
    return out;
}

}  // namespace specop
