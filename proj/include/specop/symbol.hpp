// symbol.hpp — matrix symbols of strongly invariant operators and systems.
//
// An InvariantSymbol stores one complex d_k x d_k matrix per block k; a
// SystemSymbol is an ordered family sharing one spectrum. All gain
// quantities used by the diagnostics (smallest singular value, smallest
// nonzero singular value, stacked system gains) live here, along with the
// deterministic unitary factorizations used by the normal/commuting solvers.

#pragma once

#include <limits>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "specop/field.hpp"

namespace specop {

using Mat = Eigen::MatrixXcd;

class InvariantSymbol {
  public:
    InvariantSymbol(std::shared_ptr<const SpectrumModel> spectrum, std::vector<Mat> blocks);

    static InvariantSymbol identity(std::shared_ptr<const SpectrumModel> spectrum);
    static InvariantSymbol zero(std::shared_ptr<const SpectrumModel> spectrum);

    const SpectrumModel& spectrum() const noexcept { return *spectrum_; }
    const std::shared_ptr<const SpectrumModel>& spectrum_ptr() const noexcept { return spectrum_; }
    int size() const noexcept { return static_cast<int>(blocks_.size()); }
    const Mat& block(int k) const;

    // Spectral (2-)norm of block k, computed exactly per block.
    double block_norm(int k) const;

    CoefficientField apply(const CoefficientField& u) const;

  private:
    std::shared_ptr<const SpectrumModel> spectrum_;
    std::vector<Mat> blocks_;
};

class SystemSymbol {
  public:
    explicit SystemSymbol(std::vector<InvariantSymbol> operators);

    int count() const noexcept { return static_cast<int>(operators_.size()); }
    const InvariantSymbol& op(int j) const;
    const std::vector<InvariantSymbol>& operators() const noexcept { return operators_; }
    const SpectrumModel& spectrum() const noexcept { return operators_.front().spectrum(); }
    const std::shared_ptr<const SpectrumModel>& spectrum_ptr() const noexcept {
        return operators_.front().spectrum_ptr();
    }

  private:
    std::vector<InvariantSymbol> operators_;
};

// ---- blockwise algebra ------------------------------------------------------

InvariantSymbol compose(const InvariantSymbol& p, const InvariantSymbol& q);
InvariantSymbol adjoint(const InvariantSymbol& p);
InvariantSymbol commutator(const InvariantSymbol& p, const InvariantSymbol& q);

// ---- structural checks ------------------------------------------------------

struct NormalityReport {
    std::vector<bool> block_normal;
    std::vector<double> defects;  // |ss* - s*s| / max(1, |s|^2), spectral norms
    bool all_normal{true};
};

NormalityReport is_normal(const InvariantSymbol& p, double tol = 1e-10);

// Least-squares slope of log|sigma(k)| vs log(1+lambda_k) over the tail,
// scaled by nu: the estimated order of the symbol.
double estimate_order(const InvariantSymbol& p, double tail_fraction = 0.5);

// ---- gains ------------------------------------------------------------------

inline constexpr double kInfGain = std::numeric_limits<double>::infinity();

// Smallest singular value of sigma(k): min |sigma(k) phi| over unit phi.
double full_gain(const InvariantSymbol& p, int k);

// Smallest singular value strictly above the zero threshold; +inf when the
// block vanishes (infimum over an empty set).
double restricted_gain(const InvariantSymbol& p, int k, const ZeroTol& ztol = {});

struct StackedGain {
    double gain{0.0};    // +inf possible in restricted mode
    int kernel_dim{0};   // dim of the joint kernel of the stacked block
};

// Gain of the stacked (n*d_k) x d_k matrix [sigma_1(k); ...; sigma_n(k)]:
// unrestricted = smallest singular value; restricted = smallest above the
// zero threshold. kernel_dim counts singular values at/below the threshold.
StackedGain stacked_gain(const SystemSymbol& s, int k, bool restricted,
                         const ZeroTol& ztol = {});

// ---- unitary factorizations -------------------------------------------------

// sigma(k) = Q* diag(mu) Q with Q unitary. Deterministic convention:
// eigenvalues sorted lexicographically by (Re, Im); each eigenvector's
// largest-modulus entry made real positive; degenerate eigenspaces
// orthonormalized in input-basis order.
struct NormalBlockFactorization {
    int k{0};
    Mat q;                  // rows are the conjugated eigenvectors
    std::vector<Cplx> mu;   // eigenvalues in convention order
};

NormalBlockFactorization factor_normal_block(const InvariantSymbol& p, int k,
                                             double tol = 1e-10);

// One unitary Q with Q sigma_j(k) Q* diagonal for every operator of a
// commuting normal family. Row j of `mu` holds the eigenvalues of sigma_j
// along the shared eigendirections, in the same deterministic order.
struct JointFactorization {
    int k{0};
    Mat q;
    std::vector<std::vector<Cplx>> mu;  // [j][direction]
};

JointFactorization joint_factor_commuting(const SystemSymbol& s, int k,
                                          double tol = 1e-10);

// ---- low-level helpers (exposed for solvers/diagnostics/tests) --------------

namespace linalg {

bool exactly_diagonal(const Mat& m);

// Singular values in descending order; diagonal blocks take an exact path.
std::vector<double> singular_values(const Mat& m);

double spectral_norm(const Mat& m);

// Orthonormal basis of the numerical kernel (right singular vectors with
// singular value <= threshold). Columns; may be 0-width.
Mat kernel_basis(const Mat& m, double threshold);

// Minimal-norm least-squares solve via SVD with the given rank threshold.
Vec pinv_solve(const Mat& m, const Vec& rhs, double threshold, int* rank_out = nullptr);

// Right singular vector of the smallest singular value (deterministic phase).
Vec smallest_singular_vector(const Mat& m);

// Right singular vector attaining the smallest singular value above the
// threshold; empty when none exists.
Vec smallest_restricted_singular_vector(const Mat& m, double threshold);

// Simultaneous unitary diagonalization of commuting Hermitian matrices by
// recursive eigenspace refinement. Returns the matrix of orthonormal
// columns (the eigenvector basis before the convention sort).
Mat joint_hermitian_basis(const std::vector<Mat>& ops, double cluster_tol,
                          std::uint64_t fallback_seed);

}  // namespace linalg

}  // namespace specop
