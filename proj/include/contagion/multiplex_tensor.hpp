#pragma once

// Rank-4 impact tensor over (institution, institution, layer, layer).
//
// S(i, j, l, k) is the impact of institution i acting in layer l on
// institution j acting in layer k. Only two kinds of entry can be non-zero:
// within-layer impacts (l == k, i != j) and interlayer couplings of one
// institution with itself (l != k, i == j). Storage is block-sparse: three
// m x m within-layer blocks and six coupling diagonals.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "contagion/layer_impact.hpp"

namespace contagion {

inline constexpr std::size_t kLayerCount = 3;
inline constexpr std::array<Layer, kLayerCount> kLayerOrder = {
    Layer::kFixedIncome, Layer::kSecuritiesFinancing, Layer::kDerivatives};

class MultiplexImpactTensor {
 public:
  using Blocks = std::array<Eigen::MatrixXd, kLayerCount>;
  // coupling[l][k] for l != k; diagonal slots are ignored.
  using Couplings = std::array<std::array<Eigen::VectorXd, kLayerCount>, kLayerCount>;

  MultiplexImpactTensor() = default;

  // Throws std::invalid_argument on inconsistent sizes, negative or
  // non-finite entries, or a non-zero within-layer diagonal.
  MultiplexImpactTensor(Blocks within, Couplings coupling, std::vector<std::size_t> index);

  std::size_t size() const { return index_.size(); }
  const std::vector<std::size_t>& index() const { return index_; }

  double operator()(std::size_t i, std::size_t j, std::size_t source_layer,
                    std::size_t target_layer) const;

  const Eigen::MatrixXd& within(std::size_t layer) const { return within_[layer]; }
  const Eigen::VectorXd& coupling(std::size_t source_layer, std::size_t target_layer) const;

  // 3m x 3m block matrix; row (l, i) -> l*m + i, column (k, j) -> k*m + j.
  Eigen::MatrixXd unfold() const;

  // Inverse of unfold. Throws std::invalid_argument when the matrix breaks the
  // tensor zero pattern.
  static MultiplexImpactTensor fold(const Eigen::MatrixXd& unfolded,
                                    std::vector<std::size_t> index);

  // S' x in unfolded coordinates without materializing the 3m x 3m matrix.
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& x) const;

  // Copy with every interlayer coupling set to zero.
  MultiplexImpactTensor without_couplings() const;

  // Divides every entry whose target institution is j by factors(j), across
  // all target layers.
  MultiplexImpactTensor with_target_columns_divided(const Eigen::VectorXd& factors) const;

  // Total impact of institution i on institution j summed over layer pairs.
  Eigen::MatrixXd aggregate_impact() const;

  bool operator==(const MultiplexImpactTensor& other) const;

 private:
  Blocks within_;
  Couplings coupling_;
  std::vector<std::size_t> index_;
};

// Per-institution column sum of the source layer: total impact received by i
// in that layer.
Eigen::VectorXd interlayer_coupling(const LayerImpactMatrix& source_layer);

// Within-layer blocks on the diagonal, each layer's coupling feeding both of
// its other layers. Throws std::invalid_argument when the three matrices do not
// share one institution index.
MultiplexImpactTensor build_multiplex(const LayerImpactMatrix& fi, const LayerImpactMatrix& sf,
                                      const LayerImpactMatrix& d);

struct FoldedVector {
  Eigen::MatrixXd eigenmatrix;  // m x 3, column per layer
  Eigen::VectorXd row_sums;     // r = U [1 1 1]'
};

// Throws std::invalid_argument when the length is not a multiple of 3.
FoldedVector fold_eigenvector(const Eigen::VectorXd& v);

// "layer:label" for each unfolded position.
std::vector<std::string> unfolded_labels(const std::vector<std::string>& institution_labels);

// Row-major CSV with a header of (layer, institution) pairs.
void write_unfolded_csv(std::ostream& out, const MultiplexImpactTensor& tensor,
                        const std::vector<std::string>& institution_labels);

}  // namespace contagion
