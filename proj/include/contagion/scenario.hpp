#pragma once

// End-to-end analysis pipelines and the report bundle written by the CLI.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "contagion/connectivity.hpp"
#include "contagion/contagion_engine.hpp"
#include "contagion/layer_impact.hpp"
#include "contagion/multiplex_tensor.hpp"
#include "contagion/portfolio.hpp"
#include "contagion/spectral.hpp"
#include "contagion/stabilisation.hpp"
#include "contagion/synthetic.hpp"
#include "json.hpp"

namespace contagion {

enum class AnalysisMode { kSingle, kMultiplex, kMultiplexWithoutCouplings };

std::string_view to_string(AnalysisMode mode);
// "single" | "multiplex" | "multiplex-without-couplings"
AnalysisMode parse_analysis_mode(std::string_view token);

struct ModeSpec {
  AnalysisMode mode = AnalysisMode::kMultiplex;
  Scenario scenario = Scenario::kEad;         // single mode only
  std::optional<CapitalBasis> capital_basis{};  // single mode override
  Basis derivatives_basis = Basis::kEad;      // derivatives layer inside the multiplex

  CapitalBasis effective_capital_basis() const;
  // e.g. "single:EAD", "multiplex:EAD"
  std::string label() const;
};

struct Analysis {
  ModeSpec spec;
  std::size_t institution_count = 0;
  Eigen::MatrixXd full;       // structure over every institution (unfolded for multiplex)
  SccResult scc;              // of `full`
  ModifiedCapital capital;    // over the core, or every institution when there is none
  std::vector<std::size_t> core;
  Eigen::MatrixXd connected;  // single mode core matrix
  std::optional<MultiplexImpactTensor> tensor;  // multiplex core tensor
  RiskAssessment assessment;

  bool has_core() const { return !core.empty(); }
  // Core matrix the cascade runs on: `connected`, or the unfolded tensor.
  Eigen::MatrixXd contagion_matrix() const;
  // Node -> institution position for multiplex runs; empty for single mode.
  std::vector<std::size_t> contagion_groups() const;
};

// Core detection on the full structure, then a rebuild of the impacts with
// modified capital over the core only. A core of one institution counts as no
// core: lambda is 0 and every index is 0.
// "multiplex-without-couplings" uses the coupled structure's core.
Analysis analyze(const Portfolio& portfolio, const ModeSpec& spec,
                 const PowerIterationOptions& options = {});

struct ComparisonRow {
  std::size_t institution = 0;
  std::array<std::size_t, 2> rank{};
  std::array<double, 2> index{};
};

struct Comparison {
  std::array<ModeSpec, 2> specs;
  std::vector<ComparisonRow> rows;  // every institution, index order
};

Comparison compare_modes(const Analysis& first, const Analysis& second);

nlohmann::json comparison_to_json(const Comparison& comparison, const std::vector<std::string>& ids);

enum class InitialProbability { kZero, kInverseCapital };

struct ScenarioConfig {
  // Exactly one of the two sources.
  std::optional<std::filesystem::path> input_dir;
  std::optional<GeneratorConfig> generator;
  std::optional<std::string> reporting_threshold;  // decimal amount
  int amount_scale = Amount::kDefaultScale;

  ModeSpec mode;
  std::optional<ModeSpec> compare_with;
  PowerIterationOptions power;

  bool stabilise = false;
  Target target;
  GammaSearchOptions search;
  bool deduction = false;          // also evaluate the surcharge-deduction variant
  std::optional<double> gamma_q;   // defaults to gamma_min

  bool contagion = false;
  std::vector<std::string> trigger_ids;  // empty: every core institution alone
  InitialProbability initial_probability = InitialProbability::kInverseCapital;

  std::filesystem::path output_dir = "out";
  bool export_traces = false;
  bool export_distribution = false;
  bool export_dot = false;
  bool export_unfolded = false;

  // Throws ValidationError for an invalid combination.
  void validate() const;
};

// Applies the keys present in `j` on top of `base`. Unknown keys raise
// ValidationError.
ScenarioConfig scenario_config_from_json(const nlohmann::json& j, ScenarioConfig base = {});

Portfolio load_scenario_portfolio(const ScenarioConfig& config);

struct ScenarioReport {
  nlohmann::json json;
  std::string text;
};

// Runs the configured analysis and writes report.json, report.txt and the
// requested exports into config.output_dir.
ScenarioReport run_scenario(const ScenarioConfig& config);

// Fixed-width table of a report; every number printed is taken from `report`.
std::string render_report_text(const nlohmann::json& report);

}  // namespace contagion
