// witnesses.hpp — explicit counterexample distributions.
//
// When a diagnostic says GH or solvability fails at truncation, these
// constructions exhibit the failure: a kernel-supported distribution with
// vanishing images, a unit-amplitude sequence whose images decay at the
// gain's rate, and the Sobolev-calibrated sequence showing a distribution
// whose image is smooth-classified while no kernel correction smooths it.

#pragma once

#include <vector>

#include "specop/diagnostics.hpp"

namespace specop {

struct WitnessBundle {
    CoefficientField u;
    std::vector<CoefficientField> images;   // one per operator, recomputed
    DecayReport u_decay;
    std::vector<DecayReport> image_decays;
    struct LogEntry {
        int n{0};         // position in the selected subsequence
        int k{0};         // block index
        double lambda{0.0};
        double gain{0.0}; // achieved gain at selection time
    };
    std::vector<LogEntry> construction_log;
};

// u(k) = unit joint-kernel vector on each k in Z, zero elsewhere.
// Throws StructuralError when Z is empty at truncation.
WitnessBundle kernel_witness(const SystemSymbol& s, const RunConfig& cfg = {});

// Picks `count` blocks where the unrestricted stacked gain decays fastest
// relative to polynomial scales (zero-gain blocks first) and places the
// minimizing unit singular vector there. Requires the system diagnosis to
// be non-GH at truncation.
WitnessBundle gh_failure_witness(const SystemSymbol& s, int count, const RunConfig& cfg = {});

// Prop-style almost-GH failure: blocks k_l with super-polynomially small
// restricted gain carry (1+lambda_{k_l})^{-(s+rho/2)/nu} times the
// minimizing ker-perpendicular unit vector. Requires rho > manifold_dim and
// a not-GS diagnosis at truncation.
WitnessBundle agh_failure_witness(const InvariantSymbol& p, double s, double rho, int count,
                                  const RunConfig& cfg = {});

}  // namespace specop
