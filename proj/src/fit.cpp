#include "specop/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace specop {

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("fit_line: size mismatch");
    LineFit f;
    f.n = static_cast<int>(x.size());
    if (f.n == 0) return f;
    // flat data fits the horizontal line exactly; avoids accumulation noise
    // polluting an exact-zero slope
    if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); })) {
        f.intercept = y.front();
        return f;
    }
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < f.n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= f.n;
    my /= f.n;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < f.n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    double rss = 0.0;
    for (int i = 0; i < f.n; ++i) {
        const double r = y[i] - (f.slope * x[i] + f.intercept);
        rss += r * r;
    }
    f.rms_residual = std::sqrt(rss / f.n);
    return f;
}

std::vector<LogSample> lower_record_points(std::span<const LogSample> samples, double rel_tie) {
    std::vector<LogSample> records;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : samples) {
        if (s.y <= best + std::abs(rel_tie)) {  // y is already log-scale: ties are additive
            records.push_back(s);
            best = std::min(best, s.y);
        }
    }
    return records;
}

std::vector<double> shrinking_window_slopes(std::span<const LogSample> samples, double fraction,
                                            int min_samples) {
    std::vector<double> slopes;
    if (samples.empty()) return slopes;
    const double x_lo = samples.front().x;
    const double x_hi = samples.back().x;
    double f = fraction;
    for (int step = 0; step < 4; ++step, f /= 2.0) {
        const double cut = x_hi - f * (x_hi - x_lo);
        std::vector<double> xs, ys;
        for (const auto& s : samples) {
            if (s.x >= cut) {
                xs.push_back(s.x);
                ys.push_back(s.y);
            }
        }
        if (static_cast<int>(xs.size()) < min_samples) break;
        slopes.push_back(fit_line(xs, ys).slope);
    }
    return slopes;
}

namespace {

bool step_down(double prev, double next) {
    return next <= prev - std::max(0.25, 0.02 * std::abs(prev));
}

}  // namespace

bool slopes_diverge_down(std::span<const double> slopes, double n_probe) {
    if (slopes.size() < 2) return false;
    for (std::size_t i = 1; i < slopes.size(); ++i)
        if (!step_down(slopes[i - 1], slopes[i])) return false;
    return slopes.back() <= -n_probe;
}

bool slopes_diverge_up(std::span<const double> slopes, double n_probe) {
    if (slopes.size() < 2) return false;
    for (std::size_t i = 1; i < slopes.size(); ++i)
        if (!step_down(-slopes[i - 1], -slopes[i])) return false;
    return slopes.back() >= n_probe;
}

}  // namespace specop
