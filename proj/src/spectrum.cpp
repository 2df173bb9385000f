#include "specop/spectrum.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

namespace specop {

namespace {

std::string canonical_content(int d, double nu, const std::vector<BlockInfo>& blocks) {
    std::string s;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "d=%d;nu=%.17g;", d, nu);
    s += buf;
    for (const auto& b : blocks) {
        std::snprintf(buf, sizeof(buf), "%.17g:%d;", b.eigenvalue, b.multiplicity);
        s += buf;
    }
    return s;
}

}  // namespace

SpectrumModel::SpectrumModel(int manifold_dim, double elliptic_order,
                             std::vector<BlockInfo> blocks)
    : manifold_dim_(manifold_dim), elliptic_order_(elliptic_order), blocks_(std::move(blocks)) {
    if (manifold_dim_ < 1) throw InputError("SpectrumModel: manifold_dim must be positive");
    if (!(elliptic_order_ > 0.0)) throw InputError("SpectrumModel: elliptic_order must be positive");
    if (blocks_.empty()) throw InputError("SpectrumModel: at least one block required");
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
        auto& b = blocks_[k];
        b.index = static_cast<int>(k);
        if (!std::isfinite(b.eigenvalue) || b.eigenvalue < 0.0)
            throw InputError("SpectrumModel: eigenvalue at block " + std::to_string(k) +
                             " must be finite and >= 0");
        if (b.multiplicity < 1)
            throw InputError("SpectrumModel: multiplicity at block " + std::to_string(k) +
                             " must be >= 1");
        // eigenvalues are counted without multiplicity: ties are a model error
        if (k > 0 && !(b.eigenvalue > blocks_[k - 1].eigenvalue))
            throw InputError("SpectrumModel: eigenvalues not strictly increasing at block " +
                             std::to_string(k));
    }
    hash_ = fnv1a_hex(canonical_content(manifold_dim_, elliptic_order_, blocks_));
}

const BlockInfo& SpectrumModel::block(int k) const {
    if (k < 0 || k >= size())
        throw InputError("SpectrumModel: block index " + std::to_string(k) + " out of range [0," +
                         std::to_string(size()) + ")");
    return blocks_[static_cast<std::size_t>(k)];
}

double SpectrumModel::sobolev_weight(int k, double s) const {
    return std::pow(1.0 + eigenvalue(k), s / elliptic_order_);
}

std::pair<double, int> SpectrumModel::multiplicity_growth_constant() const {
    const double q = static_cast<double>(manifold_dim_) / elliptic_order_;
    double best = -1.0;
    int best_k = 0;
    for (int k = 0; k < size(); ++k) {
        const double v = multiplicity(k) / std::pow(1.0 + eigenvalue(k), q);
        if (v > best) {
            best = v;
            best_k = k;
        }
    }
    return {best, best_k};
}

double SpectrumModel::summability_partial(double q) const {
    double sum = 0.0;
    for (int k = 0; k < size(); ++k)
        sum += multiplicity(k) * std::pow(1.0 + eigenvalue(k), -q);
    return sum;
}

}  // namespace specop
