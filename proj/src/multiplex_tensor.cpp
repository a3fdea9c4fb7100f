#include "contagion/multiplex_tensor.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace contagion {

namespace {

bool valid_entry(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

MultiplexImpactTensor::MultiplexImpactTensor(Blocks within, Couplings coupling,
                                             std::vector<std::size_t> index)
    : within_(std::move(within)), coupling_(std::move(coupling)), index_(std::move(index)) {
  const auto m = static_cast<Eigen::Index>(index_.size());
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    if (within_[l].rows() != m || within_[l].cols() != m) {
      throw std::invalid_argument("multiplex: within-layer block has the wrong size");
    }
    for (Eigen::Index a = 0; a < m; ++a) {
      if (within_[l](a, a) != 0.0) {
        throw std::invalid_argument("multiplex: within-layer diagonal must be zero");
      }
      for (Eigen::Index b = 0; b < m; ++b) {
        if (!valid_entry(within_[l](a, b))) {
          throw std::invalid_argument("multiplex: entries must be finite and non-negative");
        }
      }
    }
    coupling_[l][l] = Eigen::VectorXd::Zero(m);
    for (std::size_t k = 0; k < kLayerCount; ++k) {
      if (k == l) continue;
      if (coupling_[l][k].size() != m) {
        throw std::invalid_argument("multiplex: coupling diagonal has the wrong size");
      }
      for (Eigen::Index a = 0; a < m; ++a) {
        if (!valid_entry(coupling_[l][k](a))) {
          throw std::invalid_argument("multiplex: entries must be finite and non-negative");
        }
      }
    }
  }
}

double MultiplexImpactTensor::operator()(std::size_t i, std::size_t j, std::size_t source_layer,
                                         std::size_t target_layer) const {
  if (source_layer == target_layer) {
    return i == j ? 0.0 : within_[source_layer](i, j);
  }
  return i == j ? coupling_[source_layer][target_layer](i) : 0.0;
}

const Eigen::VectorXd& MultiplexImpactTensor::coupling(std::size_t source_layer,
                                                       std::size_t target_layer) const {
  if (source_layer == target_layer) {
    throw std::invalid_argument("multiplex: no coupling within a single layer");
  }
  return coupling_[source_layer][target_layer];
}

Eigen::MatrixXd MultiplexImpactTensor::unfold() const {
  const auto m = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(3 * m, 3 * m);
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    const auto row0 = static_cast<Eigen::Index>(l) * m;
    out.block(row0, row0, m, m) = within_[l];
    for (std::size_t k = 0; k < kLayerCount; ++k) {
      if (k == l) continue;
      const auto col0 = static_cast<Eigen::Index>(k) * m;
      out.block(row0, col0, m, m).diagonal() = coupling_[l][k];
    }
  }
  return out;
}

MultiplexImpactTensor MultiplexImpactTensor::fold(const Eigen::MatrixXd& unfolded,
                                                  std::vector<std::size_t> index) {
  const auto m = static_cast<Eigen::Index>(index.size());
  if (unfolded.rows() != 3 * m || unfolded.cols() != 3 * m) {
    throw std::invalid_argument("fold: unfolded matrix must be 3m x 3m");
  }
  Blocks within;
  Couplings coupling;
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    const auto row0 = static_cast<Eigen::Index>(l) * m;
    for (std::size_t k = 0; k < kLayerCount; ++k) {
      const auto col0 = static_cast<Eigen::Index>(k) * m;
      const Eigen::MatrixXd block = unfolded.block(row0, col0, m, m);
      if (k == l) {
        within[l] = block;
        continue;
      }
      coupling[l][k] = block.diagonal();
      for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = 0; b < m; ++b) {
          if (a != b && block(a, b) != 0.0) {
            throw std::invalid_argument("fold: interlayer block must be diagonal");
          }
        }
      }
    }
  }
  return MultiplexImpactTensor(std::move(within), std::move(coupling), std::move(index));
}

Eigen::VectorXd MultiplexImpactTensor::apply_transpose(const Eigen::VectorXd& x) const {
  const auto m = static_cast<Eigen::Index>(size());
  if (x.size() != 3 * m) throw std::invalid_argument("apply_transpose: length must be 3m");
  Eigen::VectorXd y(3 * m);
  for (std::size_t k = 0; k < kLayerCount; ++k) {
    const auto col0 = static_cast<Eigen::Index>(k) * m;
    auto target = y.segment(col0, m);
    target = within_[k].transpose() * x.segment(col0, m);
    for (std::size_t l = 0; l < kLayerCount; ++l) {
      if (l == k) continue;
      const auto row0 = static_cast<Eigen::Index>(l) * m;
      target += coupling_[l][k].cwiseProduct(x.segment(row0, m));
    }
  }
  return y;
}

MultiplexImpactTensor MultiplexImpactTensor::without_couplings() const {
  Couplings zero;
  for (auto& row : zero) {
    for (auto& v : row) v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size()));
  }
  return MultiplexImpactTensor(within_, std::move(zero), index_);
}

MultiplexImpactTensor MultiplexImpactTensor::with_target_columns_divided(
    const Eigen::VectorXd& factors) const {
  const auto m = static_cast<Eigen::Index>(size());
  if (factors.size() != m) throw std::invalid_argument("column factors must have length m");
  Blocks within = within_;
  Couplings coupling = coupling_;
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    for (Eigen::Index j = 0; j < m; ++j) within[l].col(j) /= factors(j);
    for (std::size_t k = 0; k < kLayerCount; ++k) {
      if (k != l) coupling[l][k] = coupling[l][k].cwiseQuotient(factors);
    }
  }
  return MultiplexImpactTensor(std::move(within), std::move(coupling), index_);
}

Eigen::MatrixXd MultiplexImpactTensor::aggregate_impact() const {
  const auto m = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd out = within_[0] + within_[1] + within_[2];
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    for (std::size_t k = 0; k < kLayerCount; ++k) {
      if (k == l) continue;
      for (Eigen::Index i = 0; i < m; ++i) out(i, i) += coupling_[l][k](i);
    }
  }
  return out;
}

bool MultiplexImpactTensor::operator==(const MultiplexImpactTensor& other) const {
  if (index_ != other.index_) return false;
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    if (within_[l] != other.within_[l]) return false;
    for (std::size_t k = 0; k < kLayerCount; ++k) {
      if (k != l && coupling_[l][k] != other.coupling_[l][k]) return false;
    }
  }
  return true;
}

Eigen::VectorXd interlayer_coupling(const LayerImpactMatrix& source_layer) {
  if (source_layer.values.rows() != source_layer.values.cols()) {
    throw std::invalid_argument("interlayer_coupling: matrix not square");
  }
  return source_layer.values.colwise().sum().transpose();
}

MultiplexImpactTensor build_multiplex(const LayerImpactMatrix& fi, const LayerImpactMatrix& sf,
                                      const LayerImpactMatrix& d) {
  if (fi.index != sf.index || fi.index != d.index) {
    throw std::invalid_argument("build_multiplex: layers cover different institutions");
  }
  const std::array<const LayerImpactMatrix*, kLayerCount> layers = {&fi, &sf, &d};
  MultiplexImpactTensor::Blocks within;
  MultiplexImpactTensor::Couplings coupling;
  for (std::size_t l = 0; l < kLayerCount; ++l) {
    within[l] = layers[l]->values;
    const Eigen::VectorXd diag = interlayer_coupling(*layers[l]);
    for (std::size_t k = 0; k < kLayerCount; ++k) {
      if (k != l) coupling[l][k] = diag;
    }
  }
  return MultiplexImpactTensor(std::move(within), std::move(coupling), fi.index);
}

FoldedVector fold_eigenvector(const Eigen::VectorXd& v) {
  if (v.size() % 3 != 0) throw std::invalid_argument("fold_eigenvector: length must be 3m");
  const Eigen::Index m = v.size() / 3;
  FoldedVector out;
  out.eigenmatrix.resize(m, 3);
  for (Eigen::Index l = 0; l < 3; ++l) out.eigenmatrix.col(l) = v.segment(l * m, m);
  out.row_sums = out.eigenmatrix.rowwise().sum();
  return out;
}

std::vector<std::string> unfolded_labels(const std::vector<std::string>& institution_labels) {
  std::vector<std::string> out;
  out.reserve(3 * institution_labels.size());
  for (Layer layer : kLayerOrder) {
    for (const auto& label : institution_labels) {
      out.push_back(std::string(to_string(layer)) + ":" + label);
    }
  }
  return out;
}

void write_unfolded_csv(std::ostream& out, const MultiplexImpactTensor& tensor,
                        const std::vector<std::string>& institution_labels) {
  if (institution_labels.size() != tensor.size()) {
    throw std::invalid_argument("write_unfolded_csv: one label per institution required");
  }
  const auto labels = unfolded_labels(institution_labels);
  const Eigen::MatrixXd matrix = tensor.unfold();
  const auto old_precision = out.precision(17);
  out << "source";
  for (const auto& label : labels) out << ',' << label;
  out << '\n';
  for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
    out << labels[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) out << ',' << matrix(r, c);
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace contagion
