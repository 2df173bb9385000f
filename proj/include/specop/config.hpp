// config.hpp — run configuration, shared tolerances, error types, hashing.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace specop {

// Thrown on malformed input files / invalid data. CLI exit code 64.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown on structural precondition failures (non-normal block passed to a
// normal-only routine, witness preconditions unmet, spectrum mismatch, ...).
// CLI exit code 65.
struct StructuralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Scale-aware zero threshold for rank decisions on a single block:
//   tau = abs_tol + rel_tol * |block| * dim
// where |block| is the spectral norm of the matrix under inspection.
struct ZeroTol {
    double abs_tol{1e-12};
    double rel_tol{1e-10};

    double threshold(double block_norm, int dim) const noexcept {
        return abs_tol + rel_tol * block_norm * static_cast<double>(dim);
    }
};

struct RunConfig {
    ZeroTol ztol{};
    double compat_tol{1e-9};     // relative compatibility tolerance for solvers
    double theta_min{1e-6};      // transversality angle margin (radians)
    double tail_fraction{0.5};   // fraction of blocks used for tail fits
    double n_probe{10.0};        // super-polynomial probe exponent
    std::uint64_t seed{0};
    bool strict{false};

    void validate() const {
        if (ztol.abs_tol <= 0.0 || ztol.rel_tol <= 0.0)
            throw InputError("RunConfig: zero-thresholds must be positive");
        if (compat_tol <= 0.0 || theta_min <= 0.0 || n_probe <= 0.0)
            throw InputError("RunConfig: tolerances must be positive");
        if (!(tail_fraction > 0.0 && tail_fraction < 1.0))
            throw InputError("RunConfig: tail_fraction must lie in (0,1)");
    }

    std::string canonical_string() const;
    std::string hash() const;
};

// FNV-1a over a byte string, returned as fixed-width hex.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace specop
