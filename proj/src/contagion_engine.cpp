#include "contagion/contagion_engine.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace contagion {

std::string_view to_string(Outcome outcome) {
  return outcome == Outcome::kAllFailed ? "all_failed" : "contained";
}

std::vector<bool> ContagionTrace::failed_by(std::size_t q) const {
  const std::size_t n = probabilities.empty() ? 0 : static_cast<std::size_t>(probabilities[0].size());
  std::vector<bool> mask(n, false);
  for (std::size_t step = 0; step <= q && step < failed.size(); ++step) {
    for (std::size_t v : failed[step]) mask[v] = true;
  }
  return mask;
}

std::size_t ContagionTrace::failure_count() const {
  std::size_t count = 0;
  for (const auto& step : failed) count += step.size();
  return count;
}

ContagionTrace simulate_stepwise(const Eigen::MatrixXd& impact, double p_min,
                                 std::span<const std::size_t> seeds,
                                 const StepwiseOptions& options) {
  if (impact.rows() != impact.cols()) throw std::invalid_argument("contagion: matrix not square");
  if (!(p_min > 0.0 && p_min <= 1.0)) throw std::invalid_argument("contagion: p_min must be in (0, 1]");
  if (seeds.empty()) throw std::invalid_argument("contagion: empty seed set");
  const auto n = static_cast<std::size_t>(impact.rows());
  if (!options.groups.empty() && options.groups.size() != n) {
    throw std::invalid_argument("contagion: group map must cover every node");
  }
  if (!options.initial_probability.empty() && options.initial_probability.size() != n) {
    throw std::invalid_argument("contagion: initial probabilities must cover every node");
  }
  if (options.going_concern &&
      (options.going_concern->rows() != impact.rows() || options.going_concern->cols() != impact.cols())) {
    throw std::invalid_argument("contagion: going-concern matrix has the wrong size");
  }

  // Extends a set of failing nodes to whole groups.
  auto close_over_groups = [&](std::vector<bool>& mark) {
    if (options.groups.empty()) return;
    std::set<std::size_t> hit;
    for (std::size_t v = 0; v < n; ++v) {
      if (mark[v]) hit.insert(options.groups[v]);
    }
    for (std::size_t v = 0; v < n; ++v) {
      if (hit.count(options.groups[v])) mark[v] = true;
    }
  };

  std::vector<bool> seed_mark(n, false);
  for (std::size_t s : seeds) {
    if (s >= n) throw std::invalid_argument("contagion: seed index out of range");
    seed_mark[s] = true;
  }
  close_over_groups(seed_mark);

  ContagionTrace trace;
  std::vector<bool> failed_mask(n, false);
  std::vector<std::size_t> current;
  Eigen::VectorXd pi(n);
  for (std::size_t v = 0; v < n; ++v) {
    if (seed_mark[v]) {
      current.push_back(v);
      failed_mask[v] = true;
      pi(v) = 1.0;
    } else {
      pi(v) = options.initial_probability.empty() ? 0.0 : options.initial_probability[v];
    }
  }
  trace.seeds = current;
  trace.failed.push_back(current);
  trace.probabilities.push_back(pi);
  std::size_t failed_count = current.size();
  if (failed_count == n) {
    trace.q_stop = 0;
    trace.outcome = Outcome::kAllFailed;
    return trace;
  }

  const double spreading = 1.0 - p_min;
  for (std::size_t q = 1;; ++q) {
    const std::vector<std::size_t>& previous = trace.failed.back();
    const Eigen::VectorXd& previous_pi = trace.probabilities.back();

    std::vector<bool> newly(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      if (failed_mask[i]) continue;
      double load = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (failed_mask[j]) load += impact(j, i);
      }
      if (load > p_min) newly[i] = true;
    }
    close_over_groups(newly);

    std::vector<std::size_t> step;
    Eigen::VectorXd next = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (failed_mask[i]) continue;  // failed earlier: probability 0
      if (newly[i]) {
        step.push_back(i);
        next(i) = 1.0;
        continue;
      }
      double value = q == 1 ? 0.0 : spreading * previous_pi(i);
      for (std::size_t j : previous) value += impact(j, i) * previous_pi(j);
      if (options.going_concern) {
        for (std::size_t j = 0; j < n; ++j) {
          if (j != i && !failed_mask[j]) value += (*options.going_concern)(j, i) * previous_pi(j);
        }
      }
      next(i) = value;
    }
    for (std::size_t v : step) failed_mask[v] = true;
    failed_count += step.size();

    const bool nothing_failed = step.empty();
    trace.failed.push_back(std::move(step));
    trace.probabilities.push_back(std::move(next));
    if (nothing_failed || failed_count == n) {
      trace.q_stop = q;
      trace.outcome = failed_count == n ? Outcome::kAllFailed : Outcome::kContained;
      return trace;
    }
  }
}

Eigen::VectorXd propagate_linear(const Eigen::MatrixXd& impact, double p_min,
                                 const Eigen::VectorXd& initial, std::size_t steps) {
  if (impact.rows() != impact.cols() || impact.rows() != initial.size()) {
    throw std::invalid_argument("propagate_linear: size mismatch");
  }
  Eigen::VectorXd x = initial;
  const double spreading = 1.0 - p_min;
  for (std::size_t q = 0; q < steps; ++q) {
    Eigen::VectorXd next = impact.transpose() * x;
    next += spreading * x;
    x = std::move(next);
  }
  return x;
}

std::vector<std::vector<std::size_t>> all_singletons(std::size_t n) {
  std::vector<std::vector<std::size_t>> out(n);
  for (std::size_t v = 0; v < n; ++v) out[v] = {v};
  return out;
}

std::vector<ContagionTrace> sweep_triggers(const Eigen::MatrixXd& impact, double p_min,
                                           const std::vector<std::vector<std::size_t>>& family,
                                           const StepwiseOptions& options) {
  if (family.empty()) throw std::invalid_argument("sweep_triggers: empty seed family");
  std::vector<ContagionTrace> out;
  out.reserve(family.size());
  for (const auto& seeds : family) out.push_back(simulate_stepwise(impact, p_min, seeds, options));
  return out;
}

TriggerSummary summarize(const ContagionTrace& trace, std::span<const std::size_t> groups) {
  TriggerSummary out{trace.seeds, 0, trace.q_stop, trace.outcome};
  if (groups.empty()) {
    out.failures = trace.failure_count();
    return out;
  }
  std::set<std::size_t> hit;
  for (const auto& step : trace.failed) {
    for (std::size_t v : step) hit.insert(groups[v]);
  }
  out.failures = hit.size();
  return out;
}

nlohmann::json trace_to_json(const ContagionTrace& trace, const std::vector<std::string>& labels) {
  auto names = [&](const std::vector<std::size_t>& nodes) {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t v : nodes) arr.push_back(labels.at(v));
    return arr;
  };
  nlohmann::json out;
  out["seeds"] = names(trace.seeds);
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& step : trace.failed) steps.push_back(names(step));
  out["failed_per_step"] = std::move(steps);
  out["q_stop"] = trace.q_stop;
  out["outcome"] = std::string(to_string(trace.outcome));
  nlohmann::json final_pi = nlohmann::json::array();
  const Eigen::VectorXd& last = trace.probabilities.back();
  for (Eigen::Index v = 0; v < last.size(); ++v) {
    final_pi.push_back({{"id", labels.at(static_cast<std::size_t>(v))},
                        {"probability", std::min(1.0, last(v))}});
  }
  out["final_probability"] = std::move(final_pi);
  return out;
}

}  // namespace contagion
