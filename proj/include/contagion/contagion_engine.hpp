#pragma once

// Default cascades on an impact matrix: the step-by-step threshold process
// and its linear approximation.
//
// impact(j, i) is the impact of node j on node i. A surviving node i fails at
// step q when the impact received from every node failed by step q-1 exceeds
// p_min.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace contagion {

enum class Outcome { kAllFailed, kContained };

std::string_view to_string(Outcome outcome);

struct ContagionTrace {
  std::vector<std::size_t> seeds;                      // beta_0 after group expansion
  std::vector<std::vector<std::size_t>> failed;        // beta_q for q = 0..q_stop, ascending
  std::vector<Eigen::VectorXd> probabilities;          // Pi_q for q = 0..q_stop, uncapped
  std::size_t q_stop = 0;
  Outcome outcome = Outcome::kContained;

  // B_q as a membership mask.
  std::vector<bool> failed_by(std::size_t q) const;
  std::size_t failure_count() const;
};

struct StepwiseOptions {
  // Pi_0 for nodes outside the seed set (e.g. 1 / C^modified); empty means 0.
  // These values never feed the recursion at q = 1.
  std::vector<double> initial_probability;

  // node -> group id. A node failing takes every node of its group down at
  // the same step; seeds expand to whole groups. Empty means singletons.
  std::vector<std::size_t> groups;

  // Optional going-concern matrix (e.g. NAC impacts). When set, surviving
  // nodes also pass their probability to other survivors through it; failed
  // nodes still act through `impact`. Off by default.
  const Eigen::MatrixXd* going_concern = nullptr;
};

// Throws std::invalid_argument on an empty or out-of-range seed set, a
// non-square matrix, or p_min outside (0, 1].
ContagionTrace simulate_stepwise(const Eigen::MatrixXd& impact, double p_min,
                                 std::span<const std::size_t> seeds,
                                 const StepwiseOptions& options = {});

// [(1 - p_min) I + S'] applied `steps` times to `initial`, one product per step.
Eigen::VectorXd propagate_linear(const Eigen::MatrixXd& impact, double p_min,
                                 const Eigen::VectorXd& initial, std::size_t steps);

// {0}, {1}, ..., {n-1}
std::vector<std::vector<std::size_t>> all_singletons(std::size_t n);

// One trace per seed set, in input order. Throws std::invalid_argument on an
// empty family.
std::vector<ContagionTrace> sweep_triggers(const Eigen::MatrixXd& impact, double p_min,
                                           const std::vector<std::vector<std::size_t>>& family,
                                           const StepwiseOptions& options = {});

struct TriggerSummary {
  std::vector<std::size_t> seeds;
  std::size_t failures = 0;  // nodes, or groups when groups are given
  std::size_t q_stop = 0;
  Outcome outcome = Outcome::kContained;
};

TriggerSummary summarize(const ContagionTrace& trace, std::span<const std::size_t> groups = {});

// Seeds, per-step failed labels, q_stop, outcome and the final probability
// vector capped at 1.
nlohmann::json trace_to_json(const ContagionTrace& trace, const std::vector<std::string>& labels);

}  // namespace contagion
