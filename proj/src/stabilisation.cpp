#include "contagion/stabilisation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "contagion/errors.hpp"

namespace contagion {

namespace {

void check_gamma(double gamma, const char* name) {
  if (!(gamma >= 0.0 && gamma < kGammaUpperBound)) {
    throw std::invalid_argument(std::string(name) + " must lie in [0, 0.5)");
  }
}

struct CoreInputs {
  Eigen::VectorXd index;     // SII in core order
  Eigen::VectorXd modified;  // C^modified in core order
};

CoreInputs core_inputs(const RiskAssessment& assessment, const ModifiedCapital& capital) {
  const auto m = static_cast<Eigen::Index>(assessment.core.size());
  CoreInputs out{Eigen::VectorXd(m), Eigen::VectorXd(m)};
  for (Eigen::Index a = 0; a < m; ++a) {
    const std::size_t i = assessment.core[static_cast<std::size_t>(a)];
    out.index(a) = assessment.indexes.at(i);
    if (!capital.contains(i)) {
      throw std::invalid_argument("core institution " + std::to_string(i) +
                                  " has no modified capital");
    }
    out.modified(a) = capital.modified_funds_of(i);
  }
  return out;
}

// Fills surcharges, X and factors from the aggregate impact `weights`
// (weights(a, b) = total impact of a on b).
Rebalance distribute(const Eigen::MatrixXd& weights, const RiskAssessment& assessment,
                     const ModifiedCapital& capital, double gamma, double gamma_q) {
  check_gamma(gamma, "gamma");
  check_gamma(gamma_q, "gamma_q");
  const auto m = weights.rows();
  if (weights.cols() != m || static_cast<std::size_t>(m) != assessment.core.size()) {
    throw std::invalid_argument("rebalance: structure does not match the assessed core");
  }
  const CoreInputs in = core_inputs(assessment, capital);

  Rebalance out;
  out.surcharges = gamma * in.index.cwiseProduct(in.modified);
  out.deductions = gamma_q * in.index.cwiseProduct(in.modified);
  out.distribution = Eigen::MatrixXd::Zero(m, m);
  const Eigen::VectorXd outgoing = weights.rowwise().sum();
  for (Eigen::Index a = 0; a < m; ++a) {
    if (out.surcharges(a) == 0.0) continue;
    if (!(outgoing(a) > 0.0)) {
      throw ValidationError("inconsistent inputs: institution " +
                            std::to_string(assessment.core[static_cast<std::size_t>(a)]) +
                            " carries a surcharge but has no outgoing impact");
    }
    out.distribution.row(a) = out.surcharges(a) * weights.row(a) / outgoing(a);
  }
  const Eigen::VectorXd received = out.distribution.colwise().sum().transpose();
  out.factors = Eigen::VectorXd::Ones(m) +
                (received - out.deductions).cwiseQuotient(capital.p_min * in.modified);
  return out;
}

Eigen::MatrixXd divide_columns(const Eigen::MatrixXd& matrix, const Eigen::VectorXd& factors) {
  Eigen::MatrixXd out = matrix;
  for (Eigen::Index b = 0; b < out.cols(); ++b) out.col(b) /= factors(b);
  return out;
}

void require_positive_factors(const Rebalance& r, const RiskAssessment& assessment) {
  std::string bad;
  for (Eigen::Index b = 0; b < r.factors.size(); ++b) {
    if (r.factors(b) > 0.0) continue;
    if (!bad.empty()) bad += ", ";
    bad += std::to_string(assessment.core[static_cast<std::size_t>(b)]) + " (factor " +
           std::to_string(r.factors(b)) + ")";
  }
  if (!bad.empty()) {
    throw ValidationError("deduction exceeds available headroom for institutions: " + bad);
  }
}

}  // namespace

std::vector<double> compute_surcharges(const RiskAssessment& assessment,
                                       const ModifiedCapital& capital, double gamma) {
  check_gamma(gamma, "gamma");
  const CoreInputs in = core_inputs(assessment, capital);
  std::vector<double> out(assessment.institution_count(), 0.0);
  for (std::size_t a = 0; a < assessment.core.size(); ++a) {
    const auto k = static_cast<Eigen::Index>(a);
    out[assessment.core[a]] = gamma * in.index(k) * in.modified(k);
  }
  return out;
}

SingleRebalance rebalance_single(const Eigen::MatrixXd& connected,
                                 const RiskAssessment& assessment,
                                 const ModifiedCapital& capital, double gamma) {
  SingleRebalance out;
  static_cast<Rebalance&>(out) = distribute(connected, assessment, capital, gamma, 0.0);
  out.matrix = divide_columns(connected, out.factors);
  return out;
}

MultiplexRebalance rebalance_multiplex(const MultiplexImpactTensor& connected,
                                       const RiskAssessment& assessment,
                                       const ModifiedCapital& capital, double gamma) {
  return rebalance_with_deduction(connected, assessment, capital, gamma, 0.0);
}

MultiplexRebalance rebalance_with_deduction(const MultiplexImpactTensor& connected,
                                            const RiskAssessment& assessment,
                                            const ModifiedCapital& capital, double gamma,
                                            double gamma_q) {
  MultiplexRebalance out;
  static_cast<Rebalance&>(out) =
      distribute(connected.aggregate_impact(), assessment, capital, gamma, gamma_q);
  require_positive_factors(out, assessment);
  out.tensor = connected.with_target_columns_divided(out.factors);
  return out;
}

std::string_view to_string(TargetKind kind) {
  return kind == TargetKind::kRisk ? "risk" : "resilience";
}

TargetKind parse_target_kind(std::string_view token) {
  if (token == "risk") return TargetKind::kRisk;
  if (token == "resilience") return TargetKind::kResilience;
  throw std::invalid_argument("unknown target kind '" + std::string(token) + "'");
}

double Target::lambda_threshold(double p_min) const {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument("target value must be finite and non-negative");
  }
  return kind == TargetKind::kRisk ? p_min + value : p_min - value;
}

GammaSearch search_minimum_gamma(const std::function<double(double)>& lambda_of,
                                 double lambda_threshold, const GammaSearchOptions& options) {
  if (!(options.tolerance > 0.0)) throw std::invalid_argument("gamma search: tolerance must be > 0");
  if (!(options.gamma_max > options.tolerance && options.gamma_max < kGammaUpperBound)) {
    throw std::invalid_argument("gamma search: gamma_max must lie in (tolerance, 0.5)");
  }
  if (options.scan_points < 2) throw std::invalid_argument("gamma search: need at least 2 scan points");

  GammaSearch out;
  auto eval = [&](double gamma) {
    ++out.evaluations;
    return lambda_of(gamma);
  };
  auto meets = [&](double lambda) { return lambda <= lambda_threshold; };

  out.lambda_at_zero = eval(0.0);
  if (meets(out.lambda_at_zero)) {
    out.lambda = out.lambda_at_zero;
    return out;
  }

  // Scan 0 < g_1 < ... < g_k = gamma_max geometrically from the tolerance up.
  std::vector<double> gammas{0.0};
  std::vector<double> lambdas{out.lambda_at_zero};
  const double ratio = std::log(options.gamma_max / options.tolerance) /
                       static_cast<double>(options.scan_points - 1);
  for (std::size_t k = 0; k < options.scan_points; ++k) {
    const double g = k + 1 == options.scan_points
                         ? options.gamma_max
                         : options.tolerance * std::exp(ratio * static_cast<double>(k));
    gammas.push_back(g);
    lambdas.push_back(eval(g));
    const std::size_t last = lambdas.size() - 1;
    const double slack = 1e-12 * std::max(1.0, std::abs(lambdas[last - 1]));
    if (lambdas[last] > lambdas[last - 1] + slack) {
      throw NonMonotoneError("lambda rises with gamma between " + std::to_string(gammas[last - 1]) +
                                 " and " + std::to_string(gammas[last]),
                             gammas[last - 1], lambdas[last - 1], gammas[last], lambdas[last]);
    }
  }
  if (!meets(lambdas.back())) {
    throw UnachievableTargetError("target lambda " + std::to_string(lambda_threshold) +
                                      " not reached at gamma_max (lambda " +
                                      std::to_string(lambdas.back()) + ")",
                                  options.gamma_max, lambdas.back(), lambda_threshold);
  }

  std::size_t first_pass = 1;
  while (!meets(lambdas[first_pass])) ++first_pass;
  double lo = gammas[first_pass - 1];
  double hi = gammas[first_pass];
  double lambda_hi = lambdas[first_pass];
  while (hi - lo > options.tolerance) {
    const double mid = 0.5 * (lo + hi);
    const double lambda_mid = eval(mid);
    if (meets(lambda_mid)) {
      hi = mid;
      lambda_hi = lambda_mid;
    } else {
      lo = mid;
    }
  }
  out.gamma = hi;
  out.lambda = lambda_hi;
  return out;
}

Eigen::VectorXd StabilisationPlan::net_positions() const {
  if (rebalance.distribution.size() == 0) return {};
  return rebalance.compensation() - rebalance.surcharges;
}

namespace {

StabilisationPlan finish_plan(StabilisationPlan plan, const RiskAssessment& assessment,
                              const Target& target, const GammaSearch& search) {
  plan.gamma = search.gamma;
  plan.no_op = search.gamma == 0.0;
  plan.target = target;
  plan.p_min = assessment.p_min;
  plan.lambda_threshold = target.lambda_threshold(assessment.p_min);
  plan.lambda_before = search.lambda_at_zero;
  plan.lambda_after = search.lambda;
  plan.achieved = risk_measures(search.lambda, assessment.p_min);
  plan.core = assessment.core;
  plan.evaluations = search.evaluations;
  return plan;
}

}  // namespace

StabilisationPlan optimize_gamma(const Eigen::MatrixXd& connected, const RiskAssessment& assessment,
                                 const ModifiedCapital& capital, const Target& target,
                                 const GammaSearchOptions& options) {
  auto lambda_of = [&](double gamma) {
    if (gamma == 0.0) return power_iterate(connected, options.power).lambda_max;
    return power_iterate(rebalance_single(connected, assessment, capital, gamma).matrix,
                         options.power)
        .lambda_max;
  };
  const GammaSearch search =
      search_minimum_gamma(lambda_of, target.lambda_threshold(assessment.p_min), options);
  StabilisationPlan plan;
  plan.mode = AssessmentMode::kSingle;
  SingleRebalance r = rebalance_single(connected, assessment, capital, search.gamma);
  plan.rebalanced_matrix = std::move(r.matrix);
  plan.rebalance = std::move(r);
  return finish_plan(std::move(plan), assessment, target, search);
}

StabilisationPlan optimize_gamma(const MultiplexImpactTensor& connected,
                                 const RiskAssessment& assessment, const ModifiedCapital& capital,
                                 const Target& target, const GammaSearchOptions& options) {
  auto lambda_of = [&](double gamma) {
    if (gamma == 0.0) return power_iterate(connected.unfold(), options.power).lambda_max;
    return power_iterate(rebalance_multiplex(connected, assessment, capital, gamma).tensor.unfold(),
                         options.power)
        .lambda_max;
  };
  const GammaSearch search =
      search_minimum_gamma(lambda_of, target.lambda_threshold(assessment.p_min), options);
  StabilisationPlan plan;
  plan.mode = AssessmentMode::kMultiplex;
  MultiplexRebalance r = rebalance_multiplex(connected, assessment, capital, search.gamma);
  plan.rebalanced_tensor = std::move(r.tensor);
  plan.rebalance = std::move(r);
  return finish_plan(std::move(plan), assessment, target, search);
}

std::vector<double> blend_indexes(const std::vector<double>& nac, const std::vector<double>& ead,
                                  double w) {
  if (nac.size() != ead.size()) throw std::invalid_argument("blend_indexes: length mismatch");
  if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("blend_indexes: w must lie in [0, 1]");
  std::vector<double> out(nac.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = w * nac[i] + (1.0 - w) * ead[i];
  return out;
}

nlohmann::json plan_to_json(const StabilisationPlan& plan, const std::vector<std::string>& ids,
                            bool include_distribution) {
  nlohmann::json out;
  out["mode"] = std::string(to_string(plan.mode));
  out["target"] = {{"kind", std::string(to_string(plan.target.kind))},
                   {"value", plan.target.value},
                   {"lambda_threshold", plan.lambda_threshold}};
  out["gamma_min"] = plan.gamma;
  out["no_op"] = plan.no_op;
  out["p_min"] = plan.p_min;
  out["lambda"] = plan.lambda_before;
  out["lambda_rebalanced"] = plan.lambda_after;
  out["risk"] = plan.achieved.risk;
  out["resilience"] = plan.achieved.resilience;
  out["region"] = std::string(to_string(plan.achieved.region));
  out["evaluations"] = plan.evaluations;

  const Eigen::VectorXd compensation = plan.rebalance.compensation();
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t a = 0; a < plan.core.size(); ++a) {
    const auto k = static_cast<Eigen::Index>(a);
    rows.push_back({{"id", ids.at(plan.core[a])},
                    {"surcharge", plan.rebalance.surcharges(k)},
                    {"compensation", compensation(k)},
                    {"net_position", compensation(k) - plan.rebalance.surcharges(k)},
                    {"column_factor", plan.rebalance.factors(k)}});
  }
  out["institutions"] = std::move(rows);

  if (include_distribution) {
    nlohmann::json pairs = nlohmann::json::array();
    const Eigen::MatrixXd& x = plan.rebalance.distribution;
    for (Eigen::Index a = 0; a < x.rows(); ++a) {
      for (Eigen::Index b = 0; b < x.cols(); ++b) {
        if (x(a, b) == 0.0) continue;
        pairs.push_back({{"from", ids.at(plan.core[static_cast<std::size_t>(a)])},
                         {"to", ids.at(plan.core[static_cast<std::size_t>(b)])},
                         {"amount", x(a, b)}});
      }
    }
    out["distribution"] = std::move(pairs);
  }
  return out;
}

}  // namespace contagion
