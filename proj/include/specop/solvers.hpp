// solvers.hpp — per-block solution of P u = f and of stacked systems.
//
// Four routes: minimal-norm single-operator solve, stacked least squares
// (the oracle), the explicit normal-system algorithm with operator
// switching on kernel directions, and the commuting recipe on the shared
// eigenbasis. All routes report per-block residuals and record
// compatibility failures instead of aborting.

#pragma once

#include <string>
#include <vector>

#include "specop/symbol.hpp"

namespace specop {

struct SolveOutcome {
    CoefficientField solution;
    std::vector<double> residuals;       // per block, against all equations
    struct CompatFailure {
        int k{0};
        double deficit{0.0};
    };
    std::vector<CompatFailure> compat_failures;
    std::vector<int> kernel_dims;        // per block (joint kernel for systems)
    std::vector<std::string> notes;      // structural notes (j_m switches, ...)
};

// Per block: project f(k) on range sigma(k), record any out-of-range deficit
// beyond tol, return the minimal-norm preimage (component in ker^perp).
SolveOutcome solve_single(const InvariantSymbol& p, const CoefficientField& f,
                          const RunConfig& cfg = {});

// Minimal-norm least squares on the stacked block system. n == 1 reduces to
// solve_single.
SolveOutcome solve_system_lsq(const SystemSymbol& s, const std::vector<CoefficientField>& f,
                              const RunConfig& cfg = {});

// Explicit algorithm for systems of normal operators: pick a working
// operator j per block, divide by its nonzero eigenvalues, and resolve its
// kernel directions through the other operators (j_m selection with a
// transversality margin). Blocks with nontrivial joint kernel are solved in
// the complement with kernel component zero.
SolveOutcome solve_system_normal(const SystemSymbol& s, const std::vector<CoefficientField>& f,
                                 const RunConfig& cfg = {});

// Commuting normal systems: one joint eigenbasis per block; per direction
// divide by the largest-modulus eigenvalue across operators.
SolveOutcome solve_system_commuting(const SystemSymbol& s,
                                    const std::vector<CoefficientField>& f,
                                    const RunConfig& cfg = {});

// Per block ( sum_j |sigma_j(k) u(k) - f_j(k)|^2 )^{1/2}.
std::vector<double> residual(const SystemSymbol& s, const CoefficientField& u,
                             const std::vector<CoefficientField>& f);

}  // namespace specop
