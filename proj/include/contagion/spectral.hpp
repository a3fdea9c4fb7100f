#pragma once

// Dominant eigenpair of a connected impact structure and the systemic
// risk / resilience measures and systemic-impact indexes derived from it.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace contagion {

struct PowerIterationOptions {
  double tolerance = 1e-10;
  std::size_t max_iterations = 100000;
};

struct SpectralResult {
  double lambda_max = 0.0;
  Eigen::VectorXd left_vector;     // v: S' v = lambda v, infinity norm 1
  Eigen::VectorXd ranking_vector;  // u = v / |v|_2^2, so u'v = 1
  double lambda_bilinear = 0.0;    // u' S' v, equals lambda_max at the fixed point
  double residual = 0.0;           // |S'v - lambda v|_inf / |v|_inf
  std::size_t iterations = 0;
  bool converged = false;
  bool shifted = false;            // oscillation fallback was used
};

// Power iteration on S' with infinity-norm normalization, started from the
// all-ones vector. Periodic structures that make the plain iteration cycle
// are re-run on S' + sigma I and corrected by -sigma. Converged once the step
// is below tolerance and the Collatz-Wielandt bracket of a positive iterate is
// within tolerance relative to lambda.
// Throws std::invalid_argument for an empty, non-square, negative or all-zero
// matrix and ConvergenceError after max_iterations.
SpectralResult power_iterate(const Eigen::MatrixXd& matrix, const PowerIterationOptions& options = {});

// min(max row sum, max column sum)
double eigenvalue_bound(const Eigen::MatrixXd& matrix);

enum class Region { kFragility, kResilience };
enum class AssessmentMode { kSingle, kMultiplex };

std::string_view to_string(Region region);
std::string_view to_string(AssessmentMode mode);

struct RiskMeasures {
  double risk = 0.0;        // max(0, lambda - p_min)
  double resilience = 0.0;  // max(0, p_min - lambda)
  Region region = Region::kFragility;
};

// lambda < p_min is the resilience region; equality counts as fragility with
// both measures zero.
RiskMeasures risk_measures(double lambda_max, double p_min);

struct RiskAssessment {
  AssessmentMode mode = AssessmentMode::kSingle;
  double p_min = 0.0;
  double lambda_max = 0.0;
  double risk = 0.0;
  double resilience = 0.0;
  Region region = Region::kFragility;
  std::vector<std::size_t> core;  // institution indices of the connected structure
  std::vector<double> indexes;    // per institution (all n), zero outside the core
  SpectralResult spectral;

  std::size_t institution_count() const { return indexes.size(); }
  bool in_core(std::size_t institution) const;
  std::string stability_condition() const;
};

// Measures only, for a known lambda.
RiskAssessment assess(double lambda_max, double p_min);

// `connected` is the m x m core matrix (single) or the 3m x 3m unfolded core
// (multiplex); `core` lists the m institution indices in matrix order.
RiskAssessment assess(const Eigen::MatrixXd& connected, double p_min, AssessmentMode mode,
                      std::span<const std::size_t> core, std::size_t institution_count,
                      const PowerIterationOptions& options = {});

struct RankedInstitution {
  std::size_t institution = 0;
  std::size_t rank = 0;  // 1 = largest index; 0 = outside the core
  double index = 0.0;
};

// One entry per institution in index order. Core members are ranked by index
// descending, ties to the lower institution index.
std::vector<RankedInstitution> rank_institutions(const RiskAssessment& assessment);

// lambda, p_min, risk, resilience, region and {id, rank, index, index_percent}
// per institution.
nlohmann::json assessment_to_json(const RiskAssessment& assessment,
                                  const std::vector<std::string>& ids);

}  // namespace contagion
