#include "contagion/synthetic.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>

#include "contagion/errors.hpp"

namespace contagion {

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 == 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

void GeneratorConfig::validate() const {
  auto fail = [](const std::string& what) { throw ValidationError("generator config: " + what); };
  if (n < 2) fail("n must be at least 2");
  for (double d : density) {
    if (!(d >= 0.0 && d <= 1.0)) fail("density must lie in [0, 1]");
  }
  if (!(hub_share >= 0.0 && hub_share <= 1.0)) fail("hub_share must lie in [0, 1]");
  if (!(periphery_attachment >= 0.0)) fail("periphery_attachment must be >= 0");
  if (!(capital_scale > 0.0) || !std::isfinite(capital_scale)) fail("capital_scale must be > 0");
  if (!(capital_dispersion >= 0.0)) fail("capital_dispersion must be >= 0");
  if (!(p_min_low > 0.0)) fail("p_min_low must be > 0");
  if (!(p_min_low <= p_min_high)) fail("p_min band is empty");
  if (!(p_ratio_spread >= 1.0)) fail("p_ratio_spread must be >= 1");
  if (!(p_min_high * p_ratio_spread < 1.0)) fail("p_min_high * p_ratio_spread must stay below 1");
  for (double x : intensity) {
    if (!(x >= 0.0) || !std::isfinite(x)) fail("intensity must be finite and >= 0");
  }
  if (!(amount_dispersion >= 0.0)) fail("amount_dispersion must be >= 0");
  if (!(nac_ratio_low >= 0.0 && nac_ratio_low <= nac_ratio_high && nac_ratio_high <= 1.0)) {
    fail("NAC ratio band must satisfy 0 <= low <= high <= 1");
  }
}

nlohmann::json to_json(const GeneratorConfig& c) {
  return {{"n", c.n},
          {"seed", c.seed},
          {"density", c.density},
          {"hub_share", c.hub_share},
          {"periphery_attachment", c.periphery_attachment},
          {"capital_scale", c.capital_scale},
          {"capital_dispersion", c.capital_dispersion},
          {"p_min_low", c.p_min_low},
          {"p_min_high", c.p_min_high},
          {"p_ratio_spread", c.p_ratio_spread},
          {"intensity", c.intensity},
          {"amount_dispersion", c.amount_dispersion},
          {"nac_ratio_low", c.nac_ratio_low},
          {"nac_ratio_high", c.nac_ratio_high}};
}

GeneratorConfig generator_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("generator config must be a JSON object");
  GeneratorConfig c;
  const std::set<std::string> known = {
      "n", "seed", "density", "hub_share", "periphery_attachment", "capital_scale",
      "capital_dispersion", "p_min_low", "p_min_high", "p_ratio_spread", "intensity",
      "amount_dispersion", "nac_ratio_low", "nac_ratio_high"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ValidationError("generator config: unknown key '" + key + "'");
  }
  try {
    auto read = [&](const char* key, auto& field) {
      if (j.contains(key)) j.at(key).get_to(field);
    };
    read("n", c.n);
    read("seed", c.seed);
    read("density", c.density);
    read("hub_share", c.hub_share);
    read("periphery_attachment", c.periphery_attachment);
    read("capital_scale", c.capital_scale);
    read("capital_dispersion", c.capital_dispersion);
    read("p_min_low", c.p_min_low);
    read("p_min_high", c.p_min_high);
    read("p_ratio_spread", c.p_ratio_spread);
    read("intensity", c.intensity);
    read("amount_dispersion", c.amount_dispersion);
    read("nac_ratio_low", c.nac_ratio_low);
    read("nac_ratio_high", c.nac_ratio_high);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("generator config: ") + e.what());
  }
  return c;
}

namespace {

std::string institution_id(std::size_t i, std::size_t n) {
  const std::size_t width = std::to_string(n).size();
  std::string digits = std::to_string(i + 1);
  return "B" + std::string(width - digits.size(), '0') + digits;
}

// Exposure amounts for one layer keyed (reporter, counterparty).
std::map<LayerExposures::Key, double> draw_layer(const GeneratorConfig& c, Rng& rng,
                                                 std::size_t layer,
                                                 const std::vector<double>& own_funds,
                                                 const std::vector<bool>& hub) {
  const std::size_t n = c.n;
  auto weight = [&](std::size_t counterparty) { return hub[counterparty] ? 1.0 : c.periphery_attachment; };
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      if (i != j) total += weight(i);
    }
  }
  const double pairs = static_cast<double>(n * (n - 1));
  const double scale = total > 0.0 ? c.density[layer] * pairs / total : 0.0;
  const double expected_per_reporter = std::max(1.0, c.density[layer] * static_cast<double>(n - 1));
  const double sigma = c.amount_dispersion;

  std::map<LayerExposures::Key, double> out;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j) continue;
      if (!rng.bernoulli(std::min(1.0, scale * weight(i)))) continue;
      const double size = std::exp(sigma * rng.normal() - 0.5 * sigma * sigma);
      out[{j, i}] = c.intensity[layer] * own_funds[j] * size / expected_per_reporter;
    }
  }
  return out;
}

}  // namespace

Portfolio generate(const GeneratorConfig& c) {
  c.validate();
  Rng rng(c.seed);
  const std::size_t n = c.n;

  std::vector<double> own_funds(n);
  for (auto& x : own_funds) {
    x = std::max(1.0, c.capital_scale * std::exp(c.capital_dispersion * rng.normal()));
  }

  const double p_min = rng.uniform(c.p_min_low, c.p_min_high);
  const auto lowest = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
  auto highest = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n - 1));
  if (highest >= lowest) ++highest;
  std::vector<double> ratio(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ratio[i] = i == lowest ? p_min
               : i == highest ? p_min * c.p_ratio_spread
                              : p_min * std::pow(c.p_ratio_spread, u);
  }

  // Periphery members: a seeded partial shuffle.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto k = i + static_cast<std::size_t>(rng.uniform() * static_cast<double>(n - i));
    std::swap(order[i], order[std::min(k, n - 1)]);
  }
  const auto hubs = static_cast<std::size_t>(std::lround(c.hub_share * static_cast<double>(n)));
  std::vector<bool> hub(n, false);
  for (std::size_t k = 0; k < hubs && k < n; ++k) hub[order[k]] = true;

  std::vector<InstitutionRecord> records;
  records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Amount capital = Amount::from_double(own_funds[i]);
    const Amount minimum = Amount::from_double(capital.to_double() * (1.0 - ratio[i]));
    records.push_back({institution_id(i, n), capital, minimum});
  }

  std::vector<LayerExposures> tables;
  auto to_table = [](Layer layer, Basis basis, const std::map<LayerExposures::Key, double>& values) {
    LayerExposures t{layer, basis, {}};
    for (const auto& [key, v] : values) {
      const Amount a = Amount::from_double(v);
      if (!a.is_zero()) t.entries.emplace(key, a);
    }
    return t;
  };
  tables.push_back(to_table(Layer::kFixedIncome, Basis::kMtmGross,
                            draw_layer(c, rng, 0, own_funds, hub)));
  tables.push_back(to_table(Layer::kSecuritiesFinancing, Basis::kNotionalGross,
                            draw_layer(c, rng, 1, own_funds, hub)));
  const auto ead = draw_layer(c, rng, 2, own_funds, hub);
  std::map<LayerExposures::Key, double> nac;
  for (const auto& [key, v] : ead) {
    // Rounded EAD times a ratio <= 1 keeps NAC <= EAD after rounding.
    nac[key] = Amount::from_double(v).to_double() * rng.uniform(c.nac_ratio_low, c.nac_ratio_high);
  }
  tables.push_back(to_table(Layer::kDerivatives, Basis::kEad, ead));
  tables.push_back(to_table(Layer::kDerivatives, Basis::kNac, nac));

  return Portfolio(std::move(records), std::move(tables), "synthetic-" + std::to_string(c.seed));
}

nlohmann::json generator_metadata(const GeneratorConfig& config) {
  return {{"generator", to_json(config)}, {"random_algorithm", std::string(kRandomAlgorithm)}};
}

Portfolio generate_to_directory(const GeneratorConfig& config,
                                const std::filesystem::path& directory) {
  Portfolio portfolio = generate(config);
  write_portfolio(portfolio, directory);
  std::ofstream out(directory / "generator.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (directory / "generator.json").string());
  out << generator_metadata(config).dump(2) << '\n';
  return portfolio;
}

}  // namespace contagion
