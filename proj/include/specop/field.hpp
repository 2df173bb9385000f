// field.hpp — coefficient-space representation of functions/distributions.
//
// A CoefficientField stores one complex vector per block k (length d_k) up
// to the spectrum truncation, together with Plancherel/Sobolev norms and a
// tail-decay classifier that separates smooth-like from distribution-like
// coefficient behavior at finite truncation.

#pragma once

#include <complex>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "specop/spectrum.hpp"

namespace specop {

using Cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;

enum class DecayClass {
    rapid_decay,       // windowed slopes steepen past the probe exponent
    polynomial,        // slope stabilizes: estimate of the (signed) order
    non_tempered,      // slope grows without stabilizing
    inconclusive,      // not enough nonzero tail samples
};

std::string to_string(DecayClass c);

struct DecayReport {
    DecayClass cls{DecayClass::inconclusive};
    double slope{0.0};      // fitted d log|u(k)| / d log(1+lambda_k) on the tail
    double intercept{0.0};
    double residual{0.0};   // rms residual of the tail fit
    int samples{0};
    std::vector<double> window_slopes;  // slopes over shrinking tail windows
    std::string note;
};

class CoefficientField {
  public:
    CoefficientField(std::shared_ptr<const SpectrumModel> spectrum, std::vector<Vec> blocks);

    static CoefficientField zero(std::shared_ptr<const SpectrumModel> spectrum);

    const SpectrumModel& spectrum() const noexcept { return *spectrum_; }
    const std::shared_ptr<const SpectrumModel>& spectrum_ptr() const noexcept { return spectrum_; }
    int size() const noexcept { return static_cast<int>(blocks_.size()); }
    const Vec& block(int k) const;
    Vec& mutable_block(int k);

    double block_norm(int k) const;        // Euclidean norm of u(k)
    double l2_norm() const;                // ( sum_k |u(k)|^2 )^{1/2}
    double sobolev_norm(double s) const;   // [ sum_k (1+lambda_k)^{2s/nu} |u(k)|^2 ]^{1/2}

  private:
    std::shared_ptr<const SpectrumModel> spectrum_;
    std::vector<Vec> blocks_;
};

// Blockwise alpha*a + beta*b. Both fields must live on the same spectrum.
CoefficientField combine(const CoefficientField& a, Cplx alpha,
                         const CoefficientField& b, Cplx beta);

// Least-squares fit of log|u(k)| against log(1+lambda_k) over the last
// tail_fraction of blocks, skipping zero blocks. Classification per the
// shrinking-window slope test with probe exponent n_probe.
DecayReport decay_classify(const CoefficientField& u, double tail_fraction = 0.5,
                           double n_probe = 10.0);

// True when the two models are the same object or have identical content.
bool same_spectrum(const SpectrumModel& a, const SpectrumModel& b);

}  // namespace specop
