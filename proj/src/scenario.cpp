#include "contagion/scenario.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "contagion/errors.hpp"

namespace contagion {

std::string_view to_string(AnalysisMode mode) {
  switch (mode) {
    case AnalysisMode::kSingle:
      return "single";
    case AnalysisMode::kMultiplex:
      return "multiplex";
    case AnalysisMode::kMultiplexWithoutCouplings:
      return "multiplex-without-couplings";
  }
  return "?";
}

AnalysisMode parse_analysis_mode(std::string_view token) {
  if (token == "single") return AnalysisMode::kSingle;
  if (token == "multiplex") return AnalysisMode::kMultiplex;
  if (token == "multiplex-without-couplings") return AnalysisMode::kMultiplexWithoutCouplings;
  throw std::invalid_argument("unknown mode '" + std::string(token) + "'");
}

CapitalBasis ModeSpec::effective_capital_basis() const {
  if (mode != AnalysisMode::kSingle) return CapitalBasis::kModified;
  return capital_basis.value_or(default_capital_basis(scenario));
}

std::string ModeSpec::label() const {
  if (mode == AnalysisMode::kSingle) return "single:" + std::string(to_string(scenario));
  return std::string(to_string(mode)) + ":" + std::string(to_string(derivatives_basis));
}

Eigen::MatrixXd Analysis::contagion_matrix() const {
  if (tensor) return tensor->unfold();
  return connected;
}

std::vector<std::size_t> Analysis::contagion_groups() const {
  if (!tensor) return {};
  const std::size_t m = tensor->size();
  std::vector<std::size_t> groups(kLayerCount * m);
  for (std::size_t v = 0; v < groups.size(); ++v) groups[v] = v % m;
  return groups;
}

namespace {

RiskAssessment empty_assessment(AssessmentMode mode, double p_min, std::size_t n) {
  RiskAssessment out = assess(0.0, p_min);
  out.mode = mode;
  out.indexes.assign(n, 0.0);
  return out;
}

MultiplexImpactTensor multiplex_over(const Portfolio& portfolio, const ModifiedCapital& capital,
                                     Basis derivatives_basis) {
  const auto fi = build_netted_gross_impact(portfolio, Layer::kFixedIncome, CapitalBasis::kModified,
                                            &capital);
  const auto sf = build_netted_gross_impact(portfolio, Layer::kSecuritiesFinancing,
                                            CapitalBasis::kModified, &capital);
  const auto d = build_derivatives_impact(portfolio, capital, derivatives_basis);
  return build_multiplex(fi, sf, d);
}

}  // namespace

Analysis analyze(const Portfolio& portfolio, const ModeSpec& spec,
                 const PowerIterationOptions& options) {
  Analysis out;
  out.spec = spec;
  out.institution_count = portfolio.size();
  const auto everyone = all_institutions(portfolio);
  const ModifiedCapital capital_all = compute_modified_capital(portfolio, everyone);

  if (spec.mode == AnalysisMode::kSingle) {
    const CapitalBasis basis = spec.effective_capital_basis();
    out.full = build_layer_impact(portfolio, spec.scenario, basis, &capital_all).values;
    out.scc = tarjan_scc(out.full);
    if (out.scc.core_size() >= 2) out.core = out.scc.core_members;
    if (!out.has_core()) {
      out.capital = capital_all;
      out.assessment = empty_assessment(AssessmentMode::kSingle, capital_all.p_min, out.institution_count);
      return out;
    }
    out.capital = compute_modified_capital(portfolio, out.core);
    out.connected =
        build_layer_impact(portfolio, spec.scenario, basis, &out.capital, out.core).values;
    out.assessment = assess(out.connected, out.capital.p_min, AssessmentMode::kSingle, out.core,
                            out.institution_count, options);
    return out;
  }

  if (spec.derivatives_basis != Basis::kEad && spec.derivatives_basis != Basis::kNac) {
    throw std::invalid_argument("multiplex derivatives layer needs the EAD or NAC basis");
  }
  out.full = multiplex_over(portfolio, capital_all, spec.derivatives_basis).unfold();
  out.scc = tarjan_scc(out.full);
  out.core = multiplex_core_institutions(out.scc, out.institution_count);
  if (out.core.size() < 2) out.core.clear();
  if (!out.has_core()) {
    out.capital = capital_all;
    out.assessment = empty_assessment(AssessmentMode::kMultiplex, capital_all.p_min, out.institution_count);
    return out;
  }
  out.capital = compute_modified_capital(portfolio, out.core);
  MultiplexImpactTensor tensor = multiplex_over(portfolio, out.capital, spec.derivatives_basis);
  if (spec.mode == AnalysisMode::kMultiplexWithoutCouplings) tensor = tensor.without_couplings();
  out.assessment = assess(tensor.unfold(), out.capital.p_min, AssessmentMode::kMultiplex, out.core,
                          out.institution_count, options);
  out.tensor = std::move(tensor);
  return out;
}

Comparison compare_modes(const Analysis& first, const Analysis& second) {
  if (first.institution_count != second.institution_count) {
    throw std::invalid_argument("compare_modes: analyses cover different portfolios");
  }
  Comparison out;
  out.specs = {first.spec, second.spec};
  const auto a = rank_institutions(first.assessment);
  const auto b = rank_institutions(second.assessment);
  out.rows.resize(first.institution_count);
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    out.rows[i] = {i, {a[i].rank, b[i].rank}, {a[i].index, b[i].index}};
  }
  return out;
}

nlohmann::json comparison_to_json(const Comparison& comparison, const std::vector<std::string>& ids) {
  nlohmann::json out;
  out["modes"] = {comparison.specs[0].label(), comparison.specs[1].label()};
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : comparison.rows) {
    rows.push_back({{"id", ids.at(r.institution)},
                    {"rank", {r.rank[0], r.rank[1]}},
                    {"index", {r.index[0], r.index[1]}},
                    {"index_percent", {100.0 * r.index[0], 100.0 * r.index[1]}}});
  }
  out["institutions"] = std::move(rows);
  return out;
}

void ScenarioConfig::validate() const {
  if (input_dir.has_value() == generator.has_value()) {
    throw ValidationError("exactly one of an input directory and a generator config is required");
  }
  if (generator) generator->validate();
  for (const ModeSpec* spec : {&mode, compare_with ? &*compare_with : nullptr}) {
    if (!spec) continue;
    if (spec->mode == AnalysisMode::kSingle && layer_of(spec->scenario) == Layer::kDerivatives &&
        spec->effective_capital_basis() == CapitalBasis::kRaw) {
      throw ValidationError("derivatives scenarios use the modified capital basis");
    }
    if (spec->mode != AnalysisMode::kSingle && spec->derivatives_basis != Basis::kEad &&
        spec->derivatives_basis != Basis::kNac) {
      throw ValidationError("multiplex derivatives layer needs the EAD or NAC basis");
    }
  }
  if (deduction && mode.mode == AnalysisMode::kSingle) {
    throw ValidationError("the deduction variant is defined for the multiplex only");
  }
  if (gamma_q && !(*gamma_q >= 0.0 && *gamma_q < kGammaUpperBound)) {
    throw ValidationError("gamma_q must lie in [0, 0.5)");
  }
  if (!(target.value >= 0.0)) throw ValidationError("target value must be >= 0");
  if (!(search.tolerance > 0.0)) throw ValidationError("search tolerance must be > 0");
  if (!(power.tolerance > 0.0)) throw ValidationError("power iteration tolerance must be > 0");
}

namespace {

ModeSpec mode_from_json(const nlohmann::json& j, ModeSpec spec) {
  static const std::set<std::string> known = {"mode", "scenario", "capital_basis",
                                              "derivatives_basis"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ValidationError("config: unknown mode key '" + key + "'");
  }
  if (j.contains("mode")) spec.mode = parse_analysis_mode(j.at("mode").get<std::string>());
  if (j.contains("scenario")) spec.scenario = parse_scenario(j.at("scenario").get<std::string>());
  if (j.contains("capital_basis")) {
    spec.capital_basis = parse_capital_basis(j.at("capital_basis").get<std::string>());
  }
  if (j.contains("derivatives_basis")) {
    spec.derivatives_basis = parse_basis(j.at("derivatives_basis").get<std::string>());
  }
  return spec;
}

InitialProbability parse_initial_probability(const std::string& token) {
  if (token == "zero") return InitialProbability::kZero;
  if (token == "inverse_capital") return InitialProbability::kInverseCapital;
  throw ValidationError("unknown initial probability '" + token + "'");
}

}  // namespace

ScenarioConfig scenario_config_from_json(const nlohmann::json& j, ScenarioConfig c) {
  if (!j.is_object()) throw ValidationError("scenario config must be a JSON object");
  static const std::set<std::string> known = {
      "input", "generator", "reporting_threshold", "amount_scale", "mode", "scenario",
      "capital_basis", "derivatives_basis", "compare_with", "power", "stabilise", "target",
      "search", "deduction", "gamma_q", "contagion", "triggers", "initial_probability",
      "output_dir", "exports"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ValidationError("config: unknown key '" + key + "'");
  }
  try {
    if (j.contains("input")) c.input_dir = j.at("input").get<std::string>();
    if (j.contains("generator")) {
      c.generator = generator_config_from_json(j.at("generator"));
    }
    if (j.contains("reporting_threshold")) {
      c.reporting_threshold = j.at("reporting_threshold").get<std::string>();
    }
    if (j.contains("amount_scale")) c.amount_scale = j.at("amount_scale").get<int>();
    nlohmann::json mode_keys = nlohmann::json::object();
    for (const char* key : {"mode", "scenario", "capital_basis", "derivatives_basis"}) {
      if (j.contains(key)) mode_keys[key] = j.at(key);
    }
    c.mode = mode_from_json(mode_keys, c.mode);
    if (j.contains("compare_with")) c.compare_with = mode_from_json(j.at("compare_with"), ModeSpec{});
    if (j.contains("power")) {
      const auto& p = j.at("power");
      if (p.contains("tolerance")) c.power.tolerance = p.at("tolerance").get<double>();
      if (p.contains("max_iterations")) c.power.max_iterations = p.at("max_iterations").get<std::size_t>();
    }
    if (j.contains("stabilise")) c.stabilise = j.at("stabilise").get<bool>();
    if (j.contains("target")) {
      const auto& t = j.at("target");
      if (t.contains("kind")) c.target.kind = parse_target_kind(t.at("kind").get<std::string>());
      if (t.contains("value")) c.target.value = t.at("value").get<double>();
    }
    if (j.contains("search")) {
      const auto& s = j.at("search");
      if (s.contains("tolerance")) c.search.tolerance = s.at("tolerance").get<double>();
      if (s.contains("gamma_max")) c.search.gamma_max = s.at("gamma_max").get<double>();
      if (s.contains("scan_points")) c.search.scan_points = s.at("scan_points").get<std::size_t>();
    }
    if (j.contains("deduction")) c.deduction = j.at("deduction").get<bool>();
    if (j.contains("gamma_q")) c.gamma_q = j.at("gamma_q").get<double>();
    if (j.contains("contagion")) c.contagion = j.at("contagion").get<bool>();
    if (j.contains("triggers")) c.trigger_ids = j.at("triggers").get<std::vector<std::string>>();
    if (j.contains("initial_probability")) {
      c.initial_probability = parse_initial_probability(j.at("initial_probability").get<std::string>());
    }
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("exports")) {
      const auto& e = j.at("exports");
      if (e.contains("traces")) c.export_traces = e.at("traces").get<bool>();
      if (e.contains("distribution")) c.export_distribution = e.at("distribution").get<bool>();
      if (e.contains("dot")) c.export_dot = e.at("dot").get<bool>();
      if (e.contains("unfolded")) c.export_unfolded = e.at("unfolded").get<bool>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return c;
}

Portfolio load_scenario_portfolio(const ScenarioConfig& config) {
  Portfolio portfolio;
  if (config.generator) {
    portfolio = generate(*config.generator);
  } else {
    const auto& dir = *config.input_dir;
    portfolio = load_portfolio(dir / "institutions.csv", discover_exposure_files(dir),
                               config.amount_scale);
  }
  if (config.reporting_threshold) {
    portfolio = apply_reporting_threshold(
        portfolio, Amount::parse(*config.reporting_threshold, config.amount_scale));
  }
  return portfolio;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::vector<std::string> core_labels(const Analysis& analysis, const std::vector<std::string>& ids) {
  std::vector<std::string> labels;
  for (std::size_t i : analysis.core) labels.push_back(ids[i]);
  if (analysis.tensor) return unfolded_labels(labels);
  return labels;
}

nlohmann::json analysis_json(const Analysis& analysis, const std::vector<std::string>& ids) {
  nlohmann::json out = assessment_to_json(analysis.assessment, ids);
  out["label"] = analysis.spec.label();
  out["analysis_mode"] = std::string(to_string(analysis.spec.mode));
  if (analysis.spec.mode == AnalysisMode::kSingle) {
    out["scenario"] = std::string(to_string(analysis.spec.scenario));
    out["capital_basis"] = std::string(to_string(analysis.spec.effective_capital_basis()));
  } else {
    out["derivatives_basis"] = std::string(to_string(analysis.spec.derivatives_basis));
  }
  out["components"] = analysis.scc.component_count;
  return out;
}

nlohmann::json stabilisation_json(const ScenarioConfig& config, const Analysis& analysis,
                                  const std::vector<std::string>& ids, nlohmann::json* plan_export) {
  const double p_min = analysis.assessment.p_min;
  const double threshold = config.target.lambda_threshold(p_min);
  if (!analysis.has_core()) {
    if (!(0.0 <= threshold)) {
      throw UnachievableTargetError("target below zero lambda", 0.0, 0.0, threshold);
    }
    nlohmann::json out;
    out["mode"] = std::string(to_string(analysis.assessment.mode));
    out["target"] = {{"kind", std::string(to_string(config.target.kind))},
                     {"value", config.target.value},
                     {"lambda_threshold", threshold}};
    out["gamma_min"] = 0.0;
    out["no_op"] = true;
    out["p_min"] = p_min;
    out["lambda"] = 0.0;
    out["lambda_rebalanced"] = 0.0;
    const auto m = risk_measures(0.0, p_min);
    out["risk"] = m.risk;
    out["resilience"] = m.resilience;
    out["region"] = std::string(to_string(m.region));
    out["evaluations"] = 0;
    out["institutions"] = nlohmann::json::array();
    if (plan_export) *plan_export = out;
    return out;
  }

  GammaSearchOptions search = config.search;
  search.power = config.power;
  const StabilisationPlan plan =
      analysis.tensor ? optimize_gamma(*analysis.tensor, analysis.assessment, analysis.capital,
                                       config.target, search)
                      : optimize_gamma(analysis.connected, analysis.assessment, analysis.capital,
                                       config.target, search);
  nlohmann::json out = plan_to_json(plan, ids, false);
  if (config.deduction && analysis.tensor) {
    const double gamma_q = config.gamma_q.value_or(plan.gamma);
    const auto r = rebalance_with_deduction(*analysis.tensor, analysis.assessment, analysis.capital,
                                            plan.gamma, gamma_q);
    const double lambda_q = power_iterate(r.tensor.unfold(), config.power).lambda_max;
    const auto m = risk_measures(lambda_q, p_min);
    nlohmann::json d;
    d["gamma_q"] = gamma_q;
    d["lambda"] = lambda_q;
    d["risk"] = m.risk;
    d["resilience"] = m.resilience;
    d["region"] = std::string(to_string(m.region));
    const double full_gain = plan.lambda_before - plan.lambda_after;
    if (full_gain > 0.0) {
      d["preserved_share"] = (plan.lambda_before - lambda_q) / full_gain;
    } else {
      d["preserved_share"] = nullptr;
    }
    out["deduction"] = std::move(d);
  }
  if (plan_export) *plan_export = plan_to_json(plan, ids, config.export_distribution);
  return out;
}

nlohmann::json contagion_json(const ScenarioConfig& config, const Analysis& analysis,
                              const std::vector<std::string>& ids,
                              std::vector<std::pair<std::string, nlohmann::json>>* traces) {
  nlohmann::json runs = nlohmann::json::array();
  if (!analysis.has_core()) return runs;

  std::vector<std::size_t> positions;
  if (config.trigger_ids.empty()) {
    for (std::size_t k = 0; k < analysis.core.size(); ++k) positions.push_back(k);
  } else {
    for (const auto& id : config.trigger_ids) {
      const auto it = std::find_if(analysis.core.begin(), analysis.core.end(),
                                   [&](std::size_t i) { return ids[i] == id; });
      if (it == analysis.core.end()) {
        throw ValidationError("trigger '" + id + "' is not part of the connected core");
      }
      positions.push_back(static_cast<std::size_t>(it - analysis.core.begin()));
    }
  }

  const Eigen::MatrixXd matrix = analysis.contagion_matrix();
  StepwiseOptions options;
  options.groups = analysis.contagion_groups();
  if (config.initial_probability == InitialProbability::kInverseCapital) {
    const std::size_t m = analysis.core.size();
    options.initial_probability.resize(static_cast<std::size_t>(matrix.rows()));
    for (std::size_t v = 0; v < options.initial_probability.size(); ++v) {
      options.initial_probability[v] = 1.0 / analysis.capital.modified_funds_of(analysis.core[v % m]);
    }
  }
  const auto labels = core_labels(analysis, ids);
  for (std::size_t k : positions) {
    const std::vector<std::size_t> seed{k};
    const ContagionTrace trace = simulate_stepwise(matrix, analysis.capital.p_min, seed, options);
    const TriggerSummary s = summarize(trace, options.groups);
    const std::string& id = ids[analysis.core[k]];
    runs.push_back({{"trigger", id},
                    {"failures", s.failures},
                    {"q_stop", s.q_stop},
                    {"outcome", std::string(to_string(s.outcome))}});
    if (traces) traces->emplace_back(id, trace_to_json(trace, labels));
  }
  return runs;
}

std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

void row(std::ostringstream& out, const std::string& key, const std::string& value) {
  out << pad(key, 22) << value << '\n';
}

void render_measures(std::ostringstream& out, const nlohmann::json& a) {
  row(out, "p_min", fixed(a.at("p_min").get<double>(), 5));
  row(out, "stability condition", a.at("stability_condition").get<std::string>());
  row(out, "lambda", fixed(a.at("lambda").get<double>(), 5));
  row(out, "SR risk", fixed(a.at("risk").get<double>(), 5));
  row(out, "SR resilience", fixed(a.at("resilience").get<double>(), 5));
  row(out, "region", a.at("region").get<std::string>());
}

void render_ranks(std::ostringstream& out, const nlohmann::json& institutions) {
  std::vector<const nlohmann::json*> rows;
  for (const auto& r : institutions) rows.push_back(&r);
  std::stable_sort(rows.begin(), rows.end(), [](const nlohmann::json* a, const nlohmann::json* b) {
    const auto ra = a->at("rank").get<std::size_t>();
    const auto rb = b->at("rank").get<std::size_t>();
    if ((ra == 0) != (rb == 0)) return rb == 0;
    return ra < rb;
  });
  out << pad("rank", 6) << pad("id", 12) << "index\n";
  for (const auto* r : rows) {
    out << pad(std::to_string(r->at("rank").get<std::size_t>()), 6)
        << pad(r->at("id").get<std::string>(), 12)
        << fixed(r->at("index_percent").get<double>(), 2) << "%\n";
  }
}

}  // namespace

std::string render_report_text(const nlohmann::json& report) {
  std::ostringstream out;
  const auto& a = report.at("analysis");
  out << "contagion report: " << a.at("label").get<std::string>() << "\n\n";
  row(out, "n", std::to_string(a.at("n").get<std::size_t>()));
  row(out, "m", std::to_string(a.at("m").get<std::size_t>()));
  render_measures(out, a);
  out << '\n';
  render_ranks(out, a.at("institutions"));

  if (report.contains("stabilisation")) {
    const auto& s = report.at("stabilisation");
    const auto& t = s.at("target");
    out << "\nstabilisation\n";
    const std::string kind = t.at("kind").get<std::string>();
    row(out, "target", kind + (kind == "risk" ? " <= " : " >= ") + fixed(t.at("value").get<double>(), 5));
    row(out, "gamma_min", fixed(s.at("gamma_min").get<double>(), 5));
    row(out, "lambda_rebalanced", fixed(s.at("lambda_rebalanced").get<double>(), 5));
    row(out, "SR risk", fixed(s.at("risk").get<double>(), 5));
    row(out, "SR resilience", fixed(s.at("resilience").get<double>(), 5));
    row(out, "region", s.at("region").get<std::string>());
    if (s.contains("deduction")) {
      const auto& d = s.at("deduction");
      row(out, "gamma_q", fixed(d.at("gamma_q").get<double>(), 5));
      row(out, "lambda_deduction", fixed(d.at("lambda").get<double>(), 5));
      if (!d.at("preserved_share").is_null()) {
        row(out, "preserved share", fixed(100.0 * d.at("preserved_share").get<double>(), 2) + "%");
      }
    }
  }

  if (report.contains("contagion")) {
    out << "\ncontagion\n";
    out << pad("trigger", 12) << pad("failures", 10) << pad("q_stop", 8) << "outcome\n";
    for (const auto& r : report.at("contagion")) {
      out << pad(r.at("trigger").get<std::string>(), 12)
          << pad(std::to_string(r.at("failures").get<std::size_t>()), 10)
          << pad(std::to_string(r.at("q_stop").get<std::size_t>()), 8)
          << r.at("outcome").get<std::string>() << '\n';
    }
  }

  if (report.contains("comparison")) {
    const auto& c = report.at("comparison");
    const auto& modes = c.at("modes");
    out << "\ncomparison: " << modes[0].get<std::string>() << " vs " << modes[1].get<std::string>()
        << '\n';
    out << pad("id", 12) << pad("rank A", 8) << pad("rank B", 8) << pad("index A", 10) << "index B\n";
    for (const auto& r : c.at("institutions")) {
      out << pad(r.at("id").get<std::string>(), 12)
          << pad(std::to_string(r.at("rank")[0].get<std::size_t>()), 8)
          << pad(std::to_string(r.at("rank")[1].get<std::size_t>()), 8)
          << pad(fixed(r.at("index_percent")[0].get<double>(), 2) + "%", 10)
          << fixed(r.at("index_percent")[1].get<double>(), 2) << "%\n";
    }
  }
  return out.str();
}

ScenarioReport run_scenario(const ScenarioConfig& config) {
  config.validate();
  const Portfolio portfolio = load_scenario_portfolio(config);
  const auto ids = portfolio.ids();
  const Analysis analysis = analyze(portfolio, config.mode, config.power);

  ScenarioReport report;
  nlohmann::json& j = report.json;
  nlohmann::json source;
  source["kind"] = config.generator ? "generator" : "directory";
  source["period"] = portfolio.period_tag();
  if (config.generator) source["generator"] = generator_metadata(*config.generator);
  if (config.reporting_threshold) source["reporting_threshold"] = *config.reporting_threshold;
  j["source"] = std::move(source);
  j["analysis"] = analysis_json(analysis, ids);

  std::filesystem::create_directories(config.output_dir);
  if (config.stabilise) {
    nlohmann::json plan;
    j["stabilisation"] = stabilisation_json(config, analysis, ids, &plan);
    write_file(config.output_dir / "plan.json", plan.dump(2) + "\n");
  }
  if (config.contagion) {
    std::vector<std::pair<std::string, nlohmann::json>> traces;
    j["contagion"] = contagion_json(config, analysis, ids, config.export_traces ? &traces : nullptr);
    for (const auto& [id, trace] : traces) {
      write_file(config.output_dir / ("trace_" + id + ".json"), trace.dump(2) + "\n");
    }
  }
  if (config.compare_with) {
    const Analysis other = analyze(portfolio, *config.compare_with, config.power);
    j["comparison"] = comparison_to_json(compare_modes(analysis, other), ids);
    j["comparison_analysis"] = analysis_json(other, ids);
  }

  if (config.export_dot) {
    const auto labels = analysis.spec.mode == AnalysisMode::kSingle ? ids : unfolded_labels(ids);
    write_file(config.output_dir / "structure.dot", to_dot(analysis.full, analysis.scc, labels));
  }
  if (config.export_unfolded && analysis.tensor) {
    std::ostringstream csv;
    std::vector<std::string> labels;
    for (std::size_t i : analysis.core) labels.push_back(ids[i]);
    write_unfolded_csv(csv, *analysis.tensor, labels);
    write_file(config.output_dir / "unfolded.csv", csv.str());
  }

  report.text = render_report_text(j);
  write_file(config.output_dir / "report.json", j.dump(2) + "\n");
  write_file(config.output_dir / "report.txt", report.text);
  return report;
}

}  // namespace contagion
