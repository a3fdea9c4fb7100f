// Command-line driver: ingest, generate, analyze, stabilize, contagion, compare.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "contagion/errors.hpp"
#include "contagion/portfolio.hpp"
#include "contagion/scenario.hpp"
#include "contagion/synthetic.hpp"
#include "json.hpp"

namespace {

using namespace contagion;

enum ExitCode {
  kOk = 0,
  kOther = 1,
  kUsage = 2,
  kParse = 3,
  kValidation = 4,
  kNonConvergence = 5,
  kUnachievable = 6,
  kNonMonotone = 7,
};

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError({path, 0}, "cannot open config file");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError({path, 0}, e.what());
  }
}

// Flags shared by every subcommand. Unset flags leave the config file values.
struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string input;
  std::string out;
  std::string threshold;
  std::optional<int> scale;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "JSON config file");
    app->add_option("--seed", seed, "generator seed");
    app->add_option("--input", input, "directory with institutions.csv and exposures_*.csv");
    app->add_option("--out", out, "output directory");
    app->add_option("--threshold", threshold, "drop exposures below this amount");
    app->add_option("--scale", scale, "decimal places of amounts")->check(CLI::Range(0, 9));
  }
};

struct ModeFlags {
  std::string mode;
  std::string scenario;
  std::string capital_basis;
  std::string derivatives_basis;

  void attach(CLI::App* app, const std::string& prefix = "") {
    app->add_option("--" + prefix + "mode", mode, "single | multiplex | multiplex-without-couplings");
    app->add_option("--" + prefix + "scenario", scenario, "single mode: EAD | NAC | FI | SF");
    app->add_option("--" + prefix + "capital-basis", capital_basis, "single mode: raw | modified");
    app->add_option("--" + prefix + "derivatives-basis", derivatives_basis,
                    "multiplex derivatives layer: EAD | NAC");
  }

  void apply(ModeSpec& spec) const {
    if (!mode.empty()) spec.mode = parse_analysis_mode(mode);
    if (!scenario.empty()) spec.scenario = parse_scenario(scenario);
    if (!capital_basis.empty()) spec.capital_basis = parse_capital_basis(capital_basis);
    if (!derivatives_basis.empty()) spec.derivatives_basis = parse_basis(derivatives_basis);
  }

  bool any() const {
    return !mode.empty() || !scenario.empty() || !capital_basis.empty() || !derivatives_basis.empty();
  }
};

struct AnalysisFlags {
  CommonFlags common;
  ModeFlags mode;
  bool dot = false;
  bool unfolded = false;
  std::optional<double> power_tol;
  std::optional<std::size_t> power_iter;

  void attach(CLI::App* app) {
    common.attach(app);
    mode.attach(app);
    app->add_flag("--dot", dot, "write structure.dot");
    app->add_flag("--unfolded", unfolded, "write unfolded.csv (multiplex)");
    app->add_option("--power-tol", power_tol, "power iteration tolerance");
    app->add_option("--power-max-iter", power_iter, "power iteration limit");
  }

  ScenarioConfig build() const {
    ScenarioConfig c;
    if (!common.config_path.empty()) c = scenario_config_from_json(read_json_file(common.config_path));
    if (!common.input.empty()) {
      c.input_dir = common.input;
      c.generator.reset();
    }
    // With an input directory there is nothing to seed.
    if (common.seed && !c.input_dir) {
      if (!c.generator) c.generator = GeneratorConfig{};
      c.generator->seed = *common.seed;
    }
    if (!common.out.empty()) c.output_dir = common.out;
    if (!common.threshold.empty()) c.reporting_threshold = common.threshold;
    if (common.scale) c.amount_scale = *common.scale;
    mode.apply(c.mode);
    if (dot) c.export_dot = true;
    if (unfolded) c.export_unfolded = true;
    if (power_tol) c.power.tolerance = *power_tol;
    if (power_iter) c.power.max_iterations = *power_iter;
    return c;
  }
};

int report_error(const std::string& kind, const std::exception& e, int code) {
  std::cerr << "error (" << kind << "): " << e.what() << '\n';
  return code;
}

int run_command(const std::function<void()>& body) {
  try {
    body();
    return kOk;
  } catch (const ParseError& e) {
    return report_error("parse", e, kParse);
  } catch (const ValidationError& e) {
    return report_error("validation", e, kValidation);
  } catch (const ConvergenceError& e) {
    return report_error("non-convergence", e, kNonConvergence);
  } catch (const UnachievableTargetError& e) {
    return report_error("unachievable target", e, kUnachievable);
  } catch (const NonMonotoneError& e) {
    std::cerr << "error (non-monotone): " << e.what() << " [gamma " << e.gamma_low() << " -> "
              << e.gamma_high() << ", lambda " << e.lambda_low() << " -> " << e.lambda_high()
              << "]\n";
    return kNonMonotone;
  } catch (const std::invalid_argument& e) {
    return report_error("validation", e, kValidation);
  } catch (const std::exception& e) {
    return report_error("failure", e, kOther);
  }
}

void run_and_print(const ScenarioConfig& config) {
  const ScenarioReport report = run_scenario(config);
  std::cout << report.text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multichannel contagion analysis and stabilisation"};
  app.require_subcommand(1);

  // ingest
  CommonFlags ingest_flags;
  auto* ingest = app.add_subcommand("ingest", "validate input CSVs and write a normalized copy");
  ingest_flags.attach(ingest);

  // generate
  CommonFlags gen_flags;
  std::optional<std::size_t> gen_n;
  auto* gen = app.add_subcommand("generate", "write a synthetic portfolio");
  gen_flags.attach(gen);
  gen->add_option("--n", gen_n, "institution count");

  // analyze / stabilize / contagion / compare
  AnalysisFlags analyze_flags;
  auto* analyze_cmd = app.add_subcommand("analyze", "systemic risk and impact indexes");
  analyze_flags.attach(analyze_cmd);

  AnalysisFlags stab_flags;
  std::string target_kind;
  std::optional<double> target_value;
  std::optional<double> search_tol;
  bool deduction = false;
  std::optional<double> gamma_q;
  bool plan_pairs = false;
  auto* stab = app.add_subcommand("stabilize", "minimum surcharge scale meeting a target");
  stab_flags.attach(stab);
  stab->add_option("--target-kind", target_kind, "risk | resilience");
  stab->add_option("--target", target_value, "risk ceiling or resilience floor (default 0)");
  stab->add_option("--tol", search_tol, "gamma search tolerance");
  stab->add_flag("--deduction", deduction, "also evaluate the surcharge-deduction variant");
  stab->add_option("--gamma-q", gamma_q, "deduction scale (default gamma_min)");
  stab->add_flag("--pairs", plan_pairs, "include the X table in plan.json");

  AnalysisFlags cont_flags;
  std::vector<std::string> triggers;
  std::string initial;
  bool traces = false;
  auto* cont = app.add_subcommand("contagion", "stepwise default cascades from single triggers");
  cont_flags.attach(cont);
  cont->add_option("--trigger", triggers, "trigger institution id (repeatable; default all core)");
  cont->add_option("--initial", initial, "zero | inverse_capital");
  cont->add_flag("--traces", traces, "write trace_<id>.json per trigger");

  AnalysisFlags cmp_flags;
  ModeFlags vs_flags;
  auto* cmp = app.add_subcommand("compare", "side-by-side ranks for two modes");
  cmp_flags.attach(cmp);
  vs_flags.attach(cmp, "vs-");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (*ingest) {
    return run_command([&] {
      ScenarioConfig c;
      if (!ingest_flags.config_path.empty()) {
        c = scenario_config_from_json(read_json_file(ingest_flags.config_path));
      }
      if (!ingest_flags.input.empty()) c.input_dir = ingest_flags.input;
      if (!c.input_dir) throw ValidationError("ingest needs --input");
      c.generator.reset();
      if (!ingest_flags.threshold.empty()) c.reporting_threshold = ingest_flags.threshold;
      if (ingest_flags.scale) c.amount_scale = *ingest_flags.scale;
      const Portfolio p = load_scenario_portfolio(c);
      std::cout << "institutions " << p.size() << '\n';
      for (const auto& [key, table] : p.tables()) {
        std::cout << exposure_file_name(key.layer, key.basis) << ' ' << table.entries.size() << '\n';
      }
      if (!ingest_flags.out.empty()) write_portfolio(p, ingest_flags.out);
    });
  }

  if (*gen) {
    return run_command([&] {
      GeneratorConfig g;
      if (!gen_flags.config_path.empty()) {
        const auto j = read_json_file(gen_flags.config_path);
        g = generator_config_from_json(j.contains("generator") ? j.at("generator") : j);
      }
      if (gen_flags.seed) g.seed = *gen_flags.seed;
      if (gen_n) g.n = *gen_n;
      if (gen_flags.out.empty()) throw ValidationError("generate needs --out");
      const Portfolio p = generate_to_directory(g, gen_flags.out);
      std::cout << "wrote " << p.size() << " institutions to " << gen_flags.out << '\n';
    });
  }

  if (*analyze_cmd) {
    return run_command([&] { run_and_print(analyze_flags.build()); });
  }

  if (*stab) {
    return run_command([&] {
      ScenarioConfig c = stab_flags.build();
      c.stabilise = true;
      if (!target_kind.empty()) c.target.kind = parse_target_kind(target_kind);
      if (target_value) c.target.value = *target_value;
      if (search_tol) c.search.tolerance = *search_tol;
      if (deduction) c.deduction = true;
      if (gamma_q) c.gamma_q = *gamma_q;
      if (plan_pairs) c.export_distribution = true;
      run_and_print(c);
    });
  }

  if (*cont) {
    return run_command([&] {
      ScenarioConfig c = cont_flags.build();
      c.contagion = true;
      if (!triggers.empty()) c.trigger_ids = triggers;
      if (initial == "inverse_capital") {
        c.initial_probability = InitialProbability::kInverseCapital;
      } else if (initial == "zero") {
        c.initial_probability = InitialProbability::kZero;
      } else if (!initial.empty()) {
        throw ValidationError("unknown --initial '" + initial + "'");
      }
      if (traces) c.export_traces = true;
      run_and_print(c);
    });
  }

  if (*cmp) {
    return run_command([&] {
      ScenarioConfig c = cmp_flags.build();
      ModeSpec other = c.compare_with.value_or(ModeSpec{AnalysisMode::kSingle});
      vs_flags.apply(other);
      if (!c.compare_with && !vs_flags.any()) other = ModeSpec{AnalysisMode::kSingle};
      c.compare_with = other;
      run_and_print(c);
    });
  }
  return kUsage;
}
