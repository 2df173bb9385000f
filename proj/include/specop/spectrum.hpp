// spectrum.hpp — eigenvalue/multiplicity data of the fixed elliptic operator.
//
// A SpectrumModel is the operator E as data: the strictly increasing
// eigenvalue sequence lambda_k with multiplicities d_k, the manifold
// dimension d and the elliptic order nu. Everything downstream (fields,
// symbols, diagnostics) is expressed per block k against this model.

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "specop/config.hpp"

namespace specop {

struct BlockInfo {
    int index{0};
    double eigenvalue{0.0};
    int multiplicity{1};
    std::string label;  // optional, e.g. lattice-point list for torus blocks
};

class SpectrumModel {
  public:
    SpectrumModel(int manifold_dim, double elliptic_order, std::vector<BlockInfo> blocks);

    int manifold_dim() const noexcept { return manifold_dim_; }
    double elliptic_order() const noexcept { return elliptic_order_; }
    int size() const noexcept { return static_cast<int>(blocks_.size()); }

    const BlockInfo& block(int k) const;
    double eigenvalue(int k) const { return block(k).eigenvalue; }
    int multiplicity(int k) const { return block(k).multiplicity; }
    const std::vector<BlockInfo>& blocks() const noexcept { return blocks_; }

    // (1 + lambda_k)^{s/nu}
    double sobolev_weight(int k, double s) const;

    // max_k d_k / (1+lambda_k)^{d/nu} and the attaining index (smallest on ties):
    // the empirical constant in d_k <= C (1+lambda_k)^{d/nu}.
    std::pair<double, int> multiplicity_growth_constant() const;

    // sum_{k<K} d_k (1+lambda_k)^{-q}; finite-truncation partial sum.
    double summability_partial(double q) const;

    // Stable content hash used to tie field/symbol files to their spectrum.
    const std::string& hash() const noexcept { return hash_; }

  private:
    int manifold_dim_;
    double elliptic_order_;
    std::vector<BlockInfo> blocks_;
    std::string hash_;
};

}  // namespace specop
