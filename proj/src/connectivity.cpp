#include "contagion/connectivity.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace contagion {

namespace {

constexpr std::size_t kUnvisited = std::numeric_limits<std::size_t>::max();

}  // namespace

std::vector<std::size_t> SccResult::component(std::size_t id) const {
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < membership.size(); ++v) {
    if (membership[v] == id) out.push_back(v);
  }
  return out;
}

SccResult tarjan_scc(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() != matrix.cols()) throw std::invalid_argument("tarjan_scc: matrix not square");
  const auto n = static_cast<std::size_t>(matrix.rows());

  std::vector<std::vector<std::size_t>> adjacency(n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a != b && matrix(a, b) > 0.0) adjacency[a].push_back(b);
    }
  }

  SccResult out;
  out.membership.assign(n, 0);
  std::vector<std::size_t> order(n, kUnvisited);
  std::vector<std::size_t> low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::size_t counter = 0;

  // Explicit call stack: (node, next edge to explore).
  std::vector<std::pair<std::size_t, std::size_t>> frames;
  for (std::size_t root = 0; root < n; ++root) {
    if (order[root] != kUnvisited) continue;
    frames.emplace_back(root, 0);
    order[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;

    while (!frames.empty()) {
      auto& [v, edge] = frames.back();
      if (edge < adjacency[v].size()) {
        const std::size_t w = adjacency[v][edge++];
        if (order[w] == kUnvisited) {
          order[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], order[w]);
        }
        continue;
      }
      const std::size_t done = v;
      frames.pop_back();
      if (!frames.empty()) {
        const std::size_t parent = frames.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
      if (low[done] == order[done]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          out.membership[w] = out.component_count;
        } while (w != done);
        ++out.component_count;
      }
    }
  }

  // Core selection: largest component, ties to the lowest node index. Each
  // component's lowest node is its first occurrence in index order.
  std::vector<std::size_t> sizes(out.component_count, 0);
  for (std::size_t c : out.membership) ++sizes[c];
  std::size_t best = 0;
  std::size_t best_size = 0;
  std::vector<bool> counted(out.component_count, false);
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t c = out.membership[v];
    if (counted[c]) continue;
    counted[c] = true;
    if (sizes[c] > best_size) {
      best = c;
      best_size = sizes[c];
    }
  }

  out.core_position.assign(n, -1);
  for (std::size_t v = 0; v < n; ++v) {
    if (out.membership[v] == best) {
      out.core_position[v] = static_cast<std::ptrdiff_t>(out.core_members.size());
      out.core_members.push_back(v);
    }
  }
  return out;
}

Eigen::MatrixXd extract_connected(const Eigen::MatrixXd& matrix, const SccResult& scc) {
  if (matrix.rows() != matrix.cols() || static_cast<std::size_t>(matrix.rows()) != scc.size()) {
    throw std::invalid_argument("extract_connected: matrix and SCC result differ in size");
  }
  const auto m = static_cast<Eigen::Index>(scc.core_members.size());
  Eigen::MatrixXd out(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) {
      out(a, b) = matrix(scc.core_members[a], scc.core_members[b]);
    }
  }
  return out;
}

std::vector<std::size_t> multiplex_core_institutions(const SccResult& unfolded_scc,
                                                     std::size_t institution_count) {
  if (unfolded_scc.size() != 3 * institution_count) {
    throw std::invalid_argument("multiplex SCC size must be three times the institution count");
  }
  std::vector<bool> in_core(institution_count, false);
  for (std::size_t node : unfolded_scc.core_members) in_core[node % institution_count] = true;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < institution_count; ++i) {
    if (in_core[i]) out.push_back(i);
  }
  return out;
}

std::string to_dot(const Eigen::MatrixXd& matrix, const SccResult& scc,
                   const std::vector<std::string>& labels) {
  static constexpr std::array<const char*, 12> kPalette = {
      "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462",
      "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd", "#ccebc5", "#ffed6f"};
  const auto n = static_cast<std::size_t>(matrix.rows());
  if (labels.size() != n || scc.size() != n) {
    throw std::invalid_argument("to_dot: labels, matrix and SCC result differ in size");
  }
  std::ostringstream out;
  out.precision(17);
  out << "digraph impact {\n  node [style=filled];\n";
  for (std::size_t v = 0; v < n; ++v) {
    out << "  n" << v << " [label=\"" << labels[v] << "\", fillcolor=\""
        << kPalette[scc.membership[v] % kPalette.size()] << "\"";
    if (scc.core_position[v] >= 0) out << ", penwidth=2";
    out << "];\n";
  }
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a != b && matrix(a, b) > 0.0) {
        out << "  n" << a << " -> n" << b << " [label=\"" << matrix(a, b) << "\"];\n";
      }
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace contagion
