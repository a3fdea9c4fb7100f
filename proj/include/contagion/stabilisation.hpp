#pragma once

// Surcharge-and-redistribute rebalancing of a connected impact structure and
// the search for the smallest surcharge scale that meets a target.
//
// Each core institution i pays gamma * SII_i * C_i^modified, which is handed
// out to the institutions it impacts in proportion to that impact. Every
// target j then has its incoming impacts divided by
// 1 + sum_i X(i, j) / (p_min * C_j^modified).

#include <cstddef>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "contagion/layer_impact.hpp"
#include "contagion/multiplex_tensor.hpp"
#include "contagion/spectral.hpp"
#include "json.hpp"

namespace contagion {

inline constexpr double kGammaUpperBound = 0.5;

// gamma * SII_i * C_i^modified for every institution (zero outside the core).
// Throws std::invalid_argument unless 0 <= gamma < kGammaUpperBound, or when a
// core member has no modified capital.
std::vector<double> compute_surcharges(const RiskAssessment& assessment,
                                       const ModifiedCapital& capital, double gamma);

struct Rebalance {
  Eigen::VectorXd surcharges;    // core order
  Eigen::MatrixXd distribution;  // X(a, b), core order
  Eigen::VectorXd deductions;    // Q(b), zero without the deduction variant
  Eigen::VectorXd factors;       // column divisor per core member

  Eigen::VectorXd compensation() const { return distribution.colwise().sum().transpose(); }
};

struct SingleRebalance : Rebalance {
  Eigen::MatrixXd matrix;
};

struct MultiplexRebalance : Rebalance {
  MultiplexImpactTensor tensor;
};

// `connected` is in the order of assessment.core. Throws ValidationError when
// an institution with a positive surcharge has no outgoing impact.
SingleRebalance rebalance_single(const Eigen::MatrixXd& connected,
                                 const RiskAssessment& assessment,
                                 const ModifiedCapital& capital, double gamma);

// Shares use the impact of i on j summed over every layer pair.
MultiplexRebalance rebalance_multiplex(const MultiplexImpactTensor& connected,
                                       const RiskAssessment& assessment,
                                       const ModifiedCapital& capital, double gamma);

// As rebalance_multiplex with each target's factor reduced by
// Q(j) = gamma_q * SII_j * C_j^modified. Throws ValidationError listing every
// institution whose factor is not positive.
MultiplexRebalance rebalance_with_deduction(const MultiplexImpactTensor& connected,
                                            const RiskAssessment& assessment,
                                            const ModifiedCapital& capital, double gamma,
                                            double gamma_q);

enum class TargetKind { kRisk, kResilience };

std::string_view to_string(TargetKind kind);
TargetKind parse_target_kind(std::string_view token);  // "risk" | "resilience"

// risk <= value, or resilience >= value.
struct Target {
  TargetKind kind = TargetKind::kRisk;
  double value = 0.0;

  // Largest admissible lambda for the given p_min.
  double lambda_threshold(double p_min) const;
};

struct GammaSearchOptions {
  double tolerance = 1e-6;
  double gamma_max = kGammaUpperBound * (1.0 - 1e-9);
  std::size_t scan_points = 8;
  PowerIterationOptions power;
};

struct GammaSearch {
  double gamma = 0.0;
  double lambda = 0.0;          // lambda at gamma
  double lambda_at_zero = 0.0;
  std::size_t evaluations = 0;
};

// Smallest gamma in [0, gamma_max] with lambda_of(gamma) <= lambda_threshold,
// to within options.tolerance. A geometric scan checks that lambda does not
// rise with gamma before bisecting.
// Throws NonMonotoneError, UnachievableTargetError, or std::invalid_argument
// for a bad tolerance or range.
GammaSearch search_minimum_gamma(const std::function<double(double)>& lambda_of,
                                 double lambda_threshold, const GammaSearchOptions& options = {});

struct StabilisationPlan {
  AssessmentMode mode = AssessmentMode::kSingle;
  double gamma = 0.0;
  bool no_op = false;  // the structure met the target without surcharges
  Target target;
  double lambda_threshold = 0.0;
  double p_min = 0.0;
  double lambda_before = 0.0;
  double lambda_after = 0.0;
  RiskMeasures achieved;
  std::vector<std::size_t> core;
  Rebalance rebalance;
  std::optional<Eigen::MatrixXd> rebalanced_matrix;
  std::optional<MultiplexImpactTensor> rebalanced_tensor;
  std::size_t evaluations = 0;

  // compensation - surcharge, core order
  Eigen::VectorXd net_positions() const;
};

StabilisationPlan optimize_gamma(const Eigen::MatrixXd& connected, const RiskAssessment& assessment,
                                 const ModifiedCapital& capital, const Target& target,
                                 const GammaSearchOptions& options = {});

StabilisationPlan optimize_gamma(const MultiplexImpactTensor& connected,
                                 const RiskAssessment& assessment, const ModifiedCapital& capital,
                                 const Target& target, const GammaSearchOptions& options = {});

// w * nac + (1 - w) * ead, elementwise. Throws std::invalid_argument for
// mismatched lengths or w outside [0, 1].
std::vector<double> blend_indexes(const std::vector<double>& nac, const std::vector<double>& ead,
                                  double w = 0.5);

// gamma, threshold, lambda before/after, achieved measures, per-institution
// surcharge / compensation / net position, and optionally the X table.
nlohmann::json plan_to_json(const StabilisationPlan& plan, const std::vector<std::string>& ids,
                            bool include_distribution = false);

}  // namespace contagion
