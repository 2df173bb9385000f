#include "specop/field.hpp"

#include <algorithm>
#include <cmath>

#include "specop/fit.hpp"

namespace specop {

std::string to_string(DecayClass c) {
    switch (c) {
        case DecayClass::rapid_decay: return "rapid_decay";
        case DecayClass::polynomial: return "polynomial";
        case DecayClass::non_tempered: return "non_tempered";
        case DecayClass::inconclusive: return "inconclusive";
    }
    return "unknown";
}

bool same_spectrum(const SpectrumModel& a, const SpectrumModel& b) {
    return &a == &b || a.hash() == b.hash();
}

CoefficientField::CoefficientField(std::shared_ptr<const SpectrumModel> spectrum,
                                   std::vector<Vec> blocks)
    : spectrum_(std::move(spectrum)), blocks_(std::move(blocks)) {
    if (!spectrum_) throw InputError("CoefficientField: null spectrum");
    if (static_cast<int>(blocks_.size()) != spectrum_->size())
        throw InputError("CoefficientField: expected " + std::to_string(spectrum_->size()) +
                         " blocks, got " + std::to_string(blocks_.size()));
    for (int k = 0; k < spectrum_->size(); ++k) {
        const auto& b = blocks_[static_cast<std::size_t>(k)];
        if (b.size() != spectrum_->multiplicity(k))
            throw InputError("CoefficientField: block " + std::to_string(k) + " has length " +
                             std::to_string(b.size()) + ", expected " +
                             std::to_string(spectrum_->multiplicity(k)));
        for (Eigen::Index i = 0; i < b.size(); ++i)
            if (!std::isfinite(b[i].real()) || !std::isfinite(b[i].imag()))
                throw InputError("CoefficientField: non-finite entry in block " +
                                 std::to_string(k));
    }
}

CoefficientField CoefficientField::zero(std::shared_ptr<const SpectrumModel> spectrum) {
    if (!spectrum) throw InputError("CoefficientField::zero: null spectrum");
    std::vector<Vec> blocks;
    blocks.reserve(static_cast<std::size_t>(spectrum->size()));
    for (int k = 0; k < spectrum->size(); ++k)
        blocks.push_back(Vec::Zero(spectrum->multiplicity(k)));
    return CoefficientField(std::move(spectrum), std::move(blocks));
}

const Vec& CoefficientField::block(int k) const {
    spectrum_->block(k);  // range check
    return blocks_[static_cast<std::size_t>(k)];
}

Vec& CoefficientField::mutable_block(int k) {
    spectrum_->block(k);
    return blocks_[static_cast<std::size_t>(k)];
}

double CoefficientField::block_norm(int k) const { return block(k).norm(); }

double CoefficientField::l2_norm() const {
    double sum = 0.0;
    for (int k = 0; k < size(); ++k) sum += blocks_[static_cast<std::size_t>(k)].squaredNorm();
    return std::sqrt(sum);
}

double CoefficientField::sobolev_norm(double s) const {
    double sum = 0.0;
    for (int k = 0; k < size(); ++k) {
        const double w = spectrum_->sobolev_weight(k, s);
        sum += w * w * blocks_[static_cast<std::size_t>(k)].squaredNorm();
    }
    return std::sqrt(sum);
}

CoefficientField combine(const CoefficientField& a, Cplx alpha, const CoefficientField& b,
                         Cplx beta) {
    if (!same_spectrum(a.spectrum(), b.spectrum()))
        throw StructuralError("combine: fields live on different spectra");
    std::vector<Vec> blocks;
    blocks.reserve(static_cast<std::size_t>(a.size()));
    for (int k = 0; k < a.size(); ++k) blocks.push_back(alpha * a.block(k) + beta * b.block(k));
    return CoefficientField(a.spectrum_ptr(), std::move(blocks));
}

DecayReport decay_classify(const CoefficientField& u, double tail_fraction, double n_probe) {
    DecayReport rep;
    const auto& spec = u.spectrum();
    const int total = spec.size();
    const int window = std::max(1, static_cast<int>(std::ceil(tail_fraction * total)));
    const int k_lo = total - window;

    std::vector<LogSample> tail;
    bool any_nonzero_tail = false;
    for (int k = k_lo; k < total; ++k) {
        const double norm = u.block_norm(k);
        if (norm > 0.0) {
            any_nonzero_tail = true;
            tail.push_back({k, std::log(1.0 + spec.eigenvalue(k)), std::log(norm)});
        }
    }

    if (!any_nonzero_tail) {
        // tail entirely zero: finite-support convention
        rep.cls = DecayClass::rapid_decay;
        rep.note = "tail entirely zero (finite support)";
        return rep;
    }
    if (static_cast<int>(tail.size()) < 8) {
        rep.cls = DecayClass::inconclusive;
        rep.samples = static_cast<int>(tail.size());
        rep.note = "fewer than 8 nonzero tail samples";
        return rep;
    }

    std::vector<double> xs, ys;
    xs.reserve(tail.size());
    ys.reserve(tail.size());
    for (const auto& s : tail) {
        xs.push_back(s.x);
        ys.push_back(s.y);
    }
    const LineFit fit = fit_line(xs, ys);
    rep.slope = fit.slope;
    rep.intercept = fit.intercept;
    rep.residual = fit.rms_residual;
    rep.samples = fit.n;
    rep.window_slopes = shrinking_window_slopes(tail, 1.0, 8);

    if (slopes_diverge_down(rep.window_slopes, n_probe)) {
        rep.cls = DecayClass::rapid_decay;
    } else if (slopes_diverge_up(rep.window_slopes, n_probe)) {
        rep.cls = DecayClass::non_tempered;
    } else {
        rep.cls = DecayClass::polynomial;
    }
    return rep;
}

}  // namespace specop
