#include "contagion/layer_impact.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace contagion {

namespace {

constexpr std::ptrdiff_t kAbsent = -1;

std::vector<std::ptrdiff_t> positions_of(std::span<const std::size_t> members, std::size_t n) {
  std::vector<std::ptrdiff_t> pos(n, kAbsent);
  for (std::size_t k = 0; k < members.size(); ++k) {
    if (members[k] >= n) throw std::invalid_argument("member index out of range");
    if (pos[members[k]] != kAbsent) throw std::invalid_argument("duplicate member index");
    pos[members[k]] = static_cast<std::ptrdiff_t>(k);
  }
  return pos;
}

std::vector<std::size_t> resolve_members(std::span<const std::size_t> requested,
                                         const std::vector<std::size_t>& fallback) {
  if (!requested.empty()) return {requested.begin(), requested.end()};
  return fallback;
}

// Capital used as denominator for the reporter `j`.
double denominator(const Portfolio& portfolio, CapitalBasis basis, const ModifiedCapital* capital,
                   std::size_t j) {
  if (basis == CapitalBasis::kRaw) return portfolio.institution(j).own_funds.to_double();
  if (!capital || !capital->contains(j)) {
    throw std::invalid_argument("no capital context for institution '" +
                                portfolio.institution(j).id + "' carrying exposures");
  }
  return capital->modified_funds_of(j);
}

}  // namespace

std::optional<std::size_t> ModifiedCapital::position(std::size_t institution) const {
  const auto it = std::find(members.begin(), members.end(), institution);
  if (it == members.end()) return std::nullopt;
  return static_cast<std::size_t>(it - members.begin());
}

double ModifiedCapital::modified_funds_of(std::size_t institution) const {
  const auto k = position(institution);
  if (!k) throw std::out_of_range("institution has no modified capital entry");
  return modified_funds[*k];
}

double ModifiedCapital::alpha_of(std::size_t institution) const {
  const auto k = position(institution);
  if (!k) throw std::out_of_range("institution has no modified capital entry");
  return alpha[*k];
}

ModifiedCapital compute_modified_capital(const Portfolio& portfolio,
                                         std::span<const std::size_t> members) {
  if (members.empty()) throw std::invalid_argument("modified capital needs a non-empty member set");
  positions_of(members, portfolio.size());  // range and duplicate checks

  ModifiedCapital out;
  out.members.assign(members.begin(), members.end());
  out.p_min = std::numeric_limits<double>::infinity();
  for (std::size_t i : members) {
    out.p_min = std::min(out.p_min, portfolio.institution(i).available_ratio());
  }
  out.alpha.reserve(members.size());
  out.modified_funds.reserve(members.size());
  for (std::size_t i : members) {
    const auto& record = portfolio.institution(i);
    const double alpha = record.available_ratio() / out.p_min;
    out.alpha.push_back(alpha);
    // A_i / p_min equals alpha_i * C_i without the extra rounding step.
    out.modified_funds.push_back(record.available_funds() / out.p_min);
  }
  return out;
}

std::vector<std::size_t> all_institutions(const Portfolio& portfolio) {
  std::vector<std::size_t> out(portfolio.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
  return out;
}

std::string_view to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::kEad:
      return "EAD";
    case Scenario::kNac:
      return "NAC";
    case Scenario::kFixedIncome:
      return "FI";
    case Scenario::kSecuritiesFinancing:
      return "SF";
  }
  return "?";
}

std::string_view to_string(CapitalBasis basis) {
  return basis == CapitalBasis::kRaw ? "raw" : "modified";
}

Scenario parse_scenario(std::string_view token) {
  if (token == "EAD") return Scenario::kEad;
  if (token == "NAC") return Scenario::kNac;
  if (token == "FI") return Scenario::kFixedIncome;
  if (token == "SF") return Scenario::kSecuritiesFinancing;
  throw std::invalid_argument("unknown scenario '" + std::string(token) + "'");
}

CapitalBasis parse_capital_basis(std::string_view token) {
  if (token == "raw") return CapitalBasis::kRaw;
  if (token == "modified") return CapitalBasis::kModified;
  throw std::invalid_argument("unknown capital basis '" + std::string(token) + "'");
}

Layer layer_of(Scenario scenario) {
  switch (scenario) {
    case Scenario::kFixedIncome:
      return Layer::kFixedIncome;
    case Scenario::kSecuritiesFinancing:
      return Layer::kSecuritiesFinancing;
    default:
      return Layer::kDerivatives;
  }
}

Basis basis_of(Scenario scenario) {
  switch (scenario) {
    case Scenario::kEad:
      return Basis::kEad;
    case Scenario::kNac:
      return Basis::kNac;
    case Scenario::kFixedIncome:
      return Basis::kMtmGross;
    case Scenario::kSecuritiesFinancing:
      return Basis::kNotionalGross;
  }
  return Basis::kEad;
}

CapitalBasis default_capital_basis(Scenario scenario) {
  return layer_of(scenario) == Layer::kDerivatives ? CapitalBasis::kModified : CapitalBasis::kRaw;
}

LayerImpactMatrix build_derivatives_impact(const Portfolio& portfolio,
                                           const ModifiedCapital& capital, Basis basis,
                                           std::span<const std::size_t> members) {
  if (basis != Basis::kEad && basis != Basis::kNac) {
    throw std::invalid_argument("derivatives impact needs the EAD or NAC basis");
  }
  const auto& table = portfolio.table(Layer::kDerivatives, basis);

  LayerImpactMatrix out;
  out.scenario = basis == Basis::kEad ? Scenario::kEad : Scenario::kNac;
  out.capital_basis = CapitalBasis::kModified;
  out.index = resolve_members(members, capital.members);
  out.capital = capital;
  const auto pos = positions_of(out.index, portfolio.size());
  const auto m = static_cast<Eigen::Index>(out.index.size());
  out.values = Eigen::MatrixXd::Zero(m, m);

  for (const auto& [key, amount] : table.entries) {
    const auto [reporter, counterparty] = key;
    if (pos[reporter] == kAbsent || pos[counterparty] == kAbsent || amount.is_zero()) continue;
    const double c = denominator(portfolio, CapitalBasis::kModified, &capital, reporter);
    // counterparty impacts reporter
    out.values(pos[counterparty], pos[reporter]) = amount.to_double() / c;
  }
  return out;
}

LayerImpactMatrix build_netted_gross_impact(const Portfolio& portfolio, Layer layer,
                                            CapitalBasis basis, const ModifiedCapital* capital,
                                            std::span<const std::size_t> members) {
  Basis table_basis;
  Scenario scenario;
  if (layer == Layer::kFixedIncome) {
    table_basis = Basis::kMtmGross;
    scenario = Scenario::kFixedIncome;
  } else if (layer == Layer::kSecuritiesFinancing) {
    table_basis = Basis::kNotionalGross;
    scenario = Scenario::kSecuritiesFinancing;
  } else {
    throw std::invalid_argument("netted gross impact is defined for the FI and SF layers");
  }
  if (basis == CapitalBasis::kModified && !capital) {
    throw std::invalid_argument("modified capital basis needs a capital context");
  }
  const auto& table = portfolio.table(layer, table_basis);

  LayerImpactMatrix out;
  out.scenario = scenario;
  out.capital_basis = basis;
  out.index = resolve_members(
      members, basis == CapitalBasis::kModified ? capital->members : all_institutions(portfolio));
  if (basis == CapitalBasis::kModified) out.capital = *capital;
  const auto pos = positions_of(out.index, portfolio.size());
  const auto m = static_cast<Eigen::Index>(out.index.size());
  out.values = Eigen::MatrixXd::Zero(m, m);

  for (const auto& [key, amount] : table.entries) {
    const auto [reporter, counterparty] = key;
    if (pos[reporter] == kAbsent || pos[counterparty] == kAbsent) continue;
    const double net = amount.to_double() - table.amount(counterparty, reporter);
    if (net <= 0.0) continue;
    const double c = denominator(portfolio, basis, capital, reporter);
    out.values(pos[counterparty], pos[reporter]) = net / c;
  }
  return out;
}

LayerImpactMatrix build_layer_impact(const Portfolio& portfolio, Scenario scenario,
                                     CapitalBasis basis, const ModifiedCapital* capital,
                                     std::span<const std::size_t> members) {
  if (scenario == Scenario::kEad || scenario == Scenario::kNac) {
    if (basis != CapitalBasis::kModified) {
      throw std::invalid_argument("derivatives impact uses the modified capital basis");
    }
    if (!capital) throw std::invalid_argument("derivatives impact needs a capital context");
    return build_derivatives_impact(portfolio, *capital, basis_of(scenario), members);
  }
  return build_netted_gross_impact(portfolio, layer_of(scenario), basis, capital, members);
}

}  // namespace contagion
