#pragma once

// Seeded generation of desk-scale portfolios with a hub/periphery exposure
// pattern on every layer.

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string_view>

#include "contagion/multiplex_tensor.hpp"
#include "contagion/portfolio.hpp"
#include "json.hpp"

namespace contagion {

inline constexpr std::string_view kRandomAlgorithm = "mt19937_64+box-muller";

// Platform-independent draws: raw mt19937_64 output converted by hand, since
// the std distributions are implementation defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();                      // [0, 1), 53 bits
  double uniform(double lo, double hi);  // [lo, hi)
  double normal();                       // standard normal via Box-Muller
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct GeneratorConfig {
  std::size_t n = 22;
  std::uint64_t seed = 1;

  // Expected fraction of ordered pairs with a reported exposure, per layer in
  // FI, SF, D order.
  std::array<double, kLayerCount> density = {0.25, 0.25, 0.3};

  // Hub tier share of the institutions; the rest are periphery. Periphery
  // institutions report exposures to hubs, but are rarely reported on.
  double hub_share = 0.85;
  double periphery_attachment = 0.02;  // relative to a hub counterparty

  // Own funds are lognormal: capital_scale * exp(capital_dispersion * z).
  double capital_scale = 10000.0;
  double capital_dispersion = 0.8;

  // p_min is drawn from [p_min_low, p_min_high]; p_i then spans
  // [p_min, p_min * p_ratio_spread] with both ends attained.
  double p_min_low = 0.12;
  double p_min_high = 0.18;
  double p_ratio_spread = 4.0;

  // Expected total exposure reported by an institution in a layer, as a
  // fraction of its own funds.
  std::array<double, kLayerCount> intensity = {0.2, 0.2, 0.15};
  double amount_dispersion = 0.7;

  // NAC = EAD * u with u uniform on [nac_ratio_low, nac_ratio_high].
  double nac_ratio_low = 0.3;
  double nac_ratio_high = 0.9;

  // Throws ValidationError naming the first infeasible field.
  void validate() const;
};

nlohmann::json to_json(const GeneratorConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
GeneratorConfig generator_config_from_json(const nlohmann::json& j);

// Tables: FI MtM_gross, SF Notional_gross, D EAD and D NAC.
Portfolio generate(const GeneratorConfig& config);

// Config plus the random algorithm identifier, as written next to the CSVs.
nlohmann::json generator_metadata(const GeneratorConfig& config);

// generate() + write_portfolio() + generator.json.
Portfolio generate_to_directory(const GeneratorConfig& config,
                                const std::filesystem::path& directory);

}  // namespace contagion
