// fit.hpp — log-log regression helpers shared by decay classification,
// order estimation and the polynomial gain-bound fits.

#pragma once

#include <span>
#include <vector>

namespace specop {

struct LineFit {
    double slope{0.0};
    double intercept{0.0};
    double rms_residual{0.0};
    int n{0};
};

// Plain least squares y ~ slope*x + intercept. Requires x.size() == y.size().
LineFit fit_line(std::span<const double> x, std::span<const double> y);

struct LogSample {
    int k{0};       // block index
    double x{0.0};  // log(1 + lambda_k)
    double y{0.0};  // log(value)
};

// Cumulative minima of y scanning k ascending. Ties within rel_tie of the
// running minimum are kept, so flat lower envelopes keep all their contacts.
std::vector<LogSample> lower_record_points(std::span<const LogSample> samples,
                                           double rel_tie = 1e-12);

// Shrinking-window slope sequence: least-squares slope over the last
// fraction, fraction/2, fraction/4, fraction/8 of `samples` (by x-order),
// stopping when a window holds fewer than min_samples points.
std::vector<double> shrinking_window_slopes(std::span<const LogSample> samples,
                                            double fraction, int min_samples);

// True when the slope sequence steepens monotonically (each step more
// negative by a margin) and ends at or below -n_probe.
bool slopes_diverge_down(std::span<const double> slopes, double n_probe);

// Mirror image: slopes grow monotonically and end at or above +n_probe.
bool slopes_diverge_up(std::span<const double> slopes, double n_probe);

}  // namespace specop
