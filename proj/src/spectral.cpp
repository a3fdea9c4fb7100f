#include "contagion/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "contagion/errors.hpp"
#include "contagion/multiplex_tensor.hpp"

namespace contagion {

namespace {

constexpr std::size_t kCycleWindow = 8;
constexpr std::size_t kStallWindow = 2000;

enum class RunStatus { kConverged, kOscillating, kExhausted };

struct Run {
  RunStatus status = RunStatus::kExhausted;
  Eigen::VectorXd iterate;
  std::size_t iterations = 0;
  double last_change = 0.0;
};

// Collatz-Wielandt bounds: for a positive iterate, lambda lies between the
// smallest and largest ratio (A x)_i / x_i.
bool bracket_settled(const Eigen::MatrixXd& a, const Eigen::VectorXd& x, double tolerance) {
  if ((x.array() <= 0.0).any()) return true;  // no certificate for a zero entry
  const Eigen::ArrayXd ratio = (a * x).array() / x.array();
  const double hi = ratio.maxCoeff();
  const double lo = ratio.minCoeff();
  // Rounding floor of the ratios themselves.
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * hi / x.minCoeff();
  return hi - lo <= std::max(tolerance * hi, floor);
}

// Normalized power iteration on (A + shift I). Stops early with kOscillating
// when the iterate revisits an earlier state without settling, or stalls.
Run iterate(const Eigen::MatrixXd& a, double shift, const PowerIterationOptions& options,
            std::size_t budget, bool detect_cycles) {
  Run run;
  Eigen::VectorXd theta = Eigen::VectorXd::Ones(a.rows());
  std::deque<Eigen::VectorXd> history;
  double stall_reference = std::numeric_limits<double>::infinity();
  for (std::size_t tau = 1; tau <= budget; ++tau) {
    Eigen::VectorXd y = a * theta;
    if (shift != 0.0) y += shift * theta;
    const double norm = y.lpNorm<Eigen::Infinity>();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw std::invalid_argument("power iteration: iterate vanished (nilpotent structure)");
    }
    y /= norm;
    run.last_change = (y - theta).lpNorm<Eigen::Infinity>();
    run.iterations = tau;
    theta = std::move(y);
    if (run.last_change < options.tolerance && bracket_settled(a, theta, options.tolerance)) {
      run.status = RunStatus::kConverged;
      break;
    }
    if (!detect_cycles) continue;
    for (const auto& earlier : history) {
      if ((theta - earlier).lpNorm<Eigen::Infinity>() < options.tolerance) {
        run.status = RunStatus::kOscillating;
        run.iterate = theta;
        return run;
      }
    }
    history.push_back(theta);
    if (history.size() > kCycleWindow) history.pop_front();
    if (tau % kStallWindow == 0) {
      if (run.last_change > 0.5 * stall_reference) {
        run.status = RunStatus::kOscillating;
        run.iterate = theta;
        return run;
      }
      stall_reference = run.last_change;
    }
  }
  run.iterate = std::move(theta);
  return run;
}

}  // namespace

double eigenvalue_bound(const Eigen::MatrixXd& matrix) {
  if (matrix.size() == 0) return 0.0;
  return std::min(matrix.rowwise().sum().maxCoeff(), matrix.colwise().sum().maxCoeff());
}

SpectralResult power_iterate(const Eigen::MatrixXd& matrix, const PowerIterationOptions& options) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) {
    throw std::invalid_argument("power iteration: matrix must be square and non-empty");
  }
  if (!(options.tolerance > 0.0)) throw std::invalid_argument("power iteration: tolerance must be > 0");
  if (!matrix.allFinite() || (matrix.array() < 0.0).any()) {
    throw std::invalid_argument("power iteration: entries must be finite and non-negative");
  }
  if ((matrix.array() == 0.0).all()) {
    throw std::invalid_argument("power iteration: zero matrix has no dominant eigenpair");
  }

  const Eigen::MatrixXd a = matrix.transpose();
  SpectralResult out;
  Run run = iterate(a, 0.0, options, options.max_iterations, true);
  double shift = 0.0;
  if (run.status == RunStatus::kOscillating) {
    // Shifting by an upper bound of lambda keeps the Perron vector and
    // separates it from the other peripheral eigenvalues.
    shift = eigenvalue_bound(matrix);
    const std::size_t used = run.iterations;
    run = iterate(a, shift, options, options.max_iterations - std::min(used, options.max_iterations),
                  false);
    run.iterations += used;
    out.shifted = true;
  }
  if (run.status != RunStatus::kConverged) {
    throw ConvergenceError("power iteration did not converge after " +
                               std::to_string(run.iterations) + " iterations",
                           run.iterations, run.last_change);
  }

  const Eigen::VectorXd& v = run.iterate;
  const Eigen::VectorXd image = a * v;
  out.lambda_max = (image + shift * v).lpNorm<Eigen::Infinity>() - shift;
  out.left_vector = v;
  out.ranking_vector = v / v.squaredNorm();
  out.lambda_bilinear = out.ranking_vector.dot(image);
  out.residual = (image - out.lambda_max * v).lpNorm<Eigen::Infinity>() / v.lpNorm<Eigen::Infinity>();
  out.iterations = run.iterations;
  out.converged = true;
  return out;
}

std::string_view to_string(Region region) {
  return region == Region::kFragility ? "fragility" : "resilience";
}

std::string_view to_string(AssessmentMode mode) {
  return mode == AssessmentMode::kSingle ? "single" : "multiplex";
}

RiskMeasures risk_measures(double lambda_max, double p_min) {
  RiskMeasures out;
  out.risk = std::max(0.0, lambda_max - p_min);
  out.resilience = std::max(0.0, p_min - lambda_max);
  out.region = lambda_max < p_min ? Region::kResilience : Region::kFragility;
  return out;
}

bool RiskAssessment::in_core(std::size_t institution) const {
  return std::find(core.begin(), core.end(), institution) != core.end();
}

std::string RiskAssessment::stability_condition() const {
  std::ostringstream out;
  out << "lambda_max < " << std::fixed << std::setprecision(5) << p_min;
  return out.str();
}

RiskAssessment assess(double lambda_max, double p_min) {
  RiskAssessment out;
  out.p_min = p_min;
  out.lambda_max = lambda_max;
  const auto measures = risk_measures(lambda_max, p_min);
  out.risk = measures.risk;
  out.resilience = measures.resilience;
  out.region = measures.region;
  return out;
}

RiskAssessment assess(const Eigen::MatrixXd& connected, double p_min, AssessmentMode mode,
                      std::span<const std::size_t> core, std::size_t institution_count,
                      const PowerIterationOptions& options) {
  if (!(p_min > 0.0 && p_min <= 1.0)) throw std::invalid_argument("assess: p_min must be in (0, 1]");
  const std::size_t per_institution = mode == AssessmentMode::kSingle ? 1 : kLayerCount;
  if (static_cast<std::size_t>(connected.rows()) != per_institution * core.size()) {
    throw std::invalid_argument("assess: connected matrix does not match the core size");
  }
  for (std::size_t i : core) {
    if (i >= institution_count) throw std::invalid_argument("assess: core index out of range");
  }

  RiskAssessment out = assess(0.0, p_min);
  out.mode = mode;
  out.spectral = power_iterate(connected, options);
  out.lambda_max = out.spectral.lambda_max;
  const auto measures = risk_measures(out.lambda_max, p_min);
  out.risk = measures.risk;
  out.resilience = measures.resilience;
  out.region = measures.region;
  out.core.assign(core.begin(), core.end());

  Eigen::VectorXd weights = mode == AssessmentMode::kSingle
                                ? out.spectral.ranking_vector
                                : fold_eigenvector(out.spectral.ranking_vector).row_sums;
  const double total = weights.sum();
  out.indexes.assign(institution_count, 0.0);
  for (std::size_t k = 0; k < core.size(); ++k) {
    out.indexes[core[k]] = weights(static_cast<Eigen::Index>(k)) / total;
  }
  return out;
}

std::vector<RankedInstitution> rank_institutions(const RiskAssessment& assessment) {
  std::vector<RankedInstitution> out(assessment.institution_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {i, 0, assessment.indexes[i]};
  std::vector<std::size_t> order = assessment.core;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (assessment.indexes[a] != assessment.indexes[b]) {
      return assessment.indexes[a] > assessment.indexes[b];
    }
    return a < b;
  });
  for (std::size_t r = 0; r < order.size(); ++r) out[order[r]].rank = r + 1;
  return out;
}

nlohmann::json assessment_to_json(const RiskAssessment& assessment,
                                  const std::vector<std::string>& ids) {
  nlohmann::json out;
  out["mode"] = std::string(to_string(assessment.mode));
  out["n"] = assessment.institution_count();
  out["m"] = assessment.core.size();
  out["p_min"] = assessment.p_min;
  out["stability_condition"] = assessment.stability_condition();
  out["lambda"] = assessment.lambda_max;
  out["risk"] = assessment.risk;
  out["resilience"] = assessment.resilience;
  out["region"] = std::string(to_string(assessment.region));
  out["iterations"] = assessment.spectral.iterations;
  out["residual"] = assessment.spectral.residual;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : rank_institutions(assessment)) {
    rows.push_back({{"id", ids.at(r.institution)},
                    {"rank", r.rank},
                    {"index", r.index},
                    {"index_percent", 100.0 * r.index}});
  }
  out["institutions"] = std::move(rows);
  return out;
}

}  // namespace contagion
