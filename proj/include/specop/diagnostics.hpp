// diagnostics.hpp — finite-truncation tests for global hypoellipticity (GH)
// and global solvability (GS) of invariant operators and systems.
//
// Every diagnostic assembles a per-block gain curve, fits a polynomial
// lower bound g(k) >= C (1+lambda_k)^gamma over the tail, censuses the
// kernel blocks, and reduces the evidence to a verdict. All verdicts are
// statements at truncation K and carry that caveat in the report.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "specop/symbol.hpp"

namespace specop {

enum class Verdict {
    gh_consistent,          // exit 0
    gs_not_gh_consistent,   // exit 1
    not_gs_consistent,      // exit 2
    inconclusive,           // exit 3
};

std::string to_string(Verdict v);
int exit_code(Verdict v);

struct GainCurve {
    struct Sample {
        int k{0};
        double lambda{0.0};
        double gain{0.0};   // may be +inf (restricted gain of a zero block)
        int kernel_dim{0};
    };
    std::vector<Sample> samples;     // one per stored block
    std::vector<int> zero_blocks;    // blocks with gain at/below threshold
};

struct PolyBoundFit {
    double C{0.0};          // largest constant with C(1+lambda)^gamma <= g on the window
    double gamma{0.0};      // signed exponent
    double residual{0.0};   // rms about the fitted line over its contact set
    int window_lo{0};       // first block index of the tail window
    int window_hi{0};       // last block index
    int sample_count{0};
    bool envelope_method{false};     // lower-record regression (vs plain LS)
    bool super_polynomial{false};    // windowed slopes diverge past -n_probe
    std::vector<double> window_slopes;
};

struct ZCensus {
    std::vector<int> members;        // blocks with nontrivial (joint) kernel
    std::vector<int> kernel_dims;    // matching kernel dimensions
    double density_slope{0.0};       // tail slope of the cumulative count
    bool tail_clear{true};           // no members in the final quarter of blocks
    bool finite_looking{true};       // tail_clear && density_slope < 0.1
};

struct DiagnosticReport {
    GainCurve curve;                   // primary evidence curve of this diagnostic
    std::optional<PolyBoundFit> fit;   // absent when samples are insufficient
    ZCensus z_census;
    Verdict verdict{Verdict::inconclusive};
    bool gh_pass{false};
    bool gs_pass{false};
    bool gs_determinate_fail{false};   // super-polynomial decay detected
    std::string mode;                  // single-gh | single-gs | system | ...
    std::string truncation_note;
    std::string config_hash;
};

// Envelope fit over the positive samples of a gain curve. Plain least
// squares when the tail is log-linear; lower-record regression otherwise,
// so recurring envelope contacts (not the scatter above them) set the
// bound. The intercept is always envelope-shifted: C is the largest
// constant with C(1+lambda_k)^gamma <= g(k) on the window.
std::optional<PolyBoundFit> fit_poly_bound(const GainCurve& curve, double tail_fraction,
                                           double n_probe = 10.0);

ZCensus census_from_curve(const GainCurve& curve, int total_blocks);

// Single operator, unrestricted gains (Theorem-KM style characterization).
DiagnosticReport diagnose_gh_single(const InvariantSymbol& p, const RunConfig& cfg = {});

// Single operator, restricted gains m(sigma_P(k)) (solvability bound).
DiagnosticReport diagnose_gs_single(const InvariantSymbol& p, const RunConfig& cfg = {});

// System of operators via stacked gains; `restricted` selects the
// ker-perpendicular variant.
DiagnosticReport diagnose_system(const SystemSymbol& s, bool restricted,
                                 const RunConfig& cfg = {});

// Normal systems: per-block smallest nonzero eigenvalue modulus across all
// operators; GS from the fit, GH additionally requires a tail-empty census.
DiagnosticReport diagnose_normal_system(const SystemSymbol& s, const RunConfig& cfg = {});

// Commuting normal systems: per-direction scores max_j |mu_j(k)_l|, curve
// of minima over nonzero scores, census of directions with zero score.
DiagnosticReport diagnose_commuting(const SystemSymbol& s, const RunConfig& cfg = {});

}  // namespace specop
