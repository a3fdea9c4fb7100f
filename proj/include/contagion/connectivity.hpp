#pragma once

// Strongly connected components of the positive-entry digraph of an impact
// matrix, and restriction of a matrix to its core component.

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace contagion {

struct SccResult {
  std::vector<std::size_t> membership;     // node -> component id
  std::size_t component_count = 0;
  std::vector<std::size_t> core_members;   // ascending original node indices
  std::vector<std::ptrdiff_t> core_position;  // node -> position in core, -1 outside

  std::size_t size() const { return membership.size(); }
  std::size_t core_size() const { return core_members.size(); }
  // Node indices of one component, ascending.
  std::vector<std::size_t> component(std::size_t id) const;
};

// Tarjan's algorithm on the digraph with an edge a -> b iff matrix(a, b) > 0.
// The core is the largest component; ties go to the component holding the
// lowest node index. Diagonal entries are ignored.
SccResult tarjan_scc(const Eigen::MatrixXd& matrix);

// Core rows and columns of `matrix`, in core order. Throws
// std::invalid_argument when `scc` was computed for a different size.
Eigen::MatrixXd extract_connected(const Eigen::MatrixXd& matrix, const SccResult& scc);

// Institutions with at least one layer instance inside the core of a 3m x 3m
// unfolded matrix (block order FI, SF, D), ascending.
std::vector<std::size_t> multiplex_core_institutions(const SccResult& unfolded_scc,
                                                     std::size_t institution_count);

// Graphviz digraph of the positive pattern, nodes filled per component and
// core nodes drawn bold.
std::string to_dot(const Eigen::MatrixXd& matrix, const SccResult& scc,
                   const std::vector<std::string>& labels);

}  // namespace contagion
