// models.hpp — built-in concrete instances.
//
// Flat-torus spectra (E = -Laplacian, lambda = |xi|^2, nu = 2) with
// directional-derivative symbols form the small-divisor laboratory; the
// sphere spectrum carries the rotation field; synthetic generators produce
// scalar-profile, random and planted-gain symbols for oracle tests.
// Diophantine coefficients are held in extended precision and rounded only
// when symbol entries are formed.

#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "specop/symbol.hpp"

namespace specop {

// ~664 bits of mantissa: enough for the 10^{-120} term of the five-term
// Liouville constant with wide margin.
using BigReal = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<200>>;

struct DiophantineCoefficient {
    enum class Kind { rational, quadratic_irrational, liouville, decimal };

    Kind kind{Kind::decimal};
    BigReal value{0};
    std::string description;

    static DiophantineCoefficient rational(long long p, long long q);
    static DiophantineCoefficient golden_ratio();                 // (1+sqrt 5)/2
    static DiophantineCoefficient liouville(int terms = 5);       // sum 10^{-j!}
    static DiophantineCoefficient from_decimal(const std::string& text);

    // Parse a CLI token: a decimal string, "golden", "liouville",
    // "liouville:N", or "rational:p/q".
    static DiophantineCoefficient parse(const std::string& token);
};

struct TorusModel {
    int dim{2};
    long long radius_sq_max{0};
    std::shared_ptr<const SpectrumModel> spectrum;
    // Per block, the lattice points xi with |xi|^2 = lambda_k, sorted
    // lexicographically; unused coordinates are zero.
    std::vector<std::vector<std::array<int, 3>>> basis;
};

// One block per attained value of |xi|^2 <= rsq, dim in {1,2,3}.
TorusModel torus_spectrum(int dim, long long rsq);

// Directional derivative a . grad: diagonal blocks with entries i (a . xi)
// per lattice point, formed in extended precision and rounded once.
InvariantSymbol torus_vector_field(const TorusModel& model, const std::vector<BigReal>& a);

struct SphereModel {
    int degree_max{0};
    std::shared_ptr<const SpectrumModel> spectrum;
};

// lambda_k = k(k+1), d_k = 2k+1, manifold_dim 2, nu 2, degrees 0..degree_max.
SphereModel sphere_spectrum(int degree_max);

// Azimuthal rotation field: diag(i m), m = -k..k ascending.
InvariantSymbol sphere_rotation_field(const SphereModel& model);

// ---- synthetic symbols ------------------------------------------------------

struct SyntheticRecipe {
    enum class Kind {
        profile_power,   // c (1+lambda)^gamma * I
        profile_exp,     // c exp(-rate*lambda) * I
        random_normal,   // seeded unitary-conjugated random diagonal
        random_general,  // seeded dense complex entries
        planted_gain,    // prescribed smallest singular value (1+lambda)^gamma
    };
    Kind kind{Kind::profile_power};
    double coef{1.0};
    double exponent{0.0};  // gamma for profiles / planted gains
    double rate{1.0};      // for profile_exp
    double spread{1.0};    // relative spread of the non-minimal planted singular values

    static SyntheticRecipe parse(const std::string& token);
    std::string to_string() const;
};

struct SyntheticSymbol {
    InvariantSymbol symbol;
    std::vector<double> planted_gains;  // exact gains for oracle tests (may be empty)
};

SyntheticSymbol synthetic_symbol(std::shared_ptr<const SpectrumModel> spectrum,
                                 const SyntheticRecipe& recipe, std::uint64_t seed);

namespace detail {

// Continued-fraction convergents p/q of x with q <= max_q (internal helper
// for small-divisor experiments).
std::vector<std::pair<long long, long long>> convergents(const BigReal& x, long long max_q,
                                                         int max_terms = 64);

}  // namespace detail

}  // namespace specop
