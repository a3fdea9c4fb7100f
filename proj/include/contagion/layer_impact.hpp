#pragma once

// Modified-capital context and single-layer impact matrices.
//
// Orientation: values(a, b) is the impact of institution index[a] on
// institution index[b]. For the derivatives layer that is the exposure
// reported by b towards a, scaled by b's capital.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "contagion/portfolio.hpp"

namespace contagion {

struct ModifiedCapital {
  double p_min = 1.0;                  // min p_i over members
  std::vector<std::size_t> members;    // institution indices, in the order given
  std::vector<double> alpha;           // alpha_i = p_i / p_min, aligned with members
  std::vector<double> modified_funds;  // alpha_i * C_i, aligned with members

  bool contains(std::size_t institution) const { return position(institution).has_value(); }
  std::optional<std::size_t> position(std::size_t institution) const;
  // Throws std::out_of_range for a non-member.
  double modified_funds_of(std::size_t institution) const;
  double alpha_of(std::size_t institution) const;
};

// p_min and per-member alpha / C^modified. Throws std::invalid_argument on an
// empty or out-of-range member set.
ModifiedCapital compute_modified_capital(const Portfolio& portfolio,
                                         std::span<const std::size_t> members);

// Every institution in file order.
std::vector<std::size_t> all_institutions(const Portfolio& portfolio);

enum class Scenario { kEad, kNac, kFixedIncome, kSecuritiesFinancing };
enum class CapitalBasis { kRaw, kModified };

std::string_view to_string(Scenario scenario);
std::string_view to_string(CapitalBasis basis);
Scenario parse_scenario(std::string_view token);  // "EAD" | "NAC" | "FI" | "SF"
CapitalBasis parse_capital_basis(std::string_view token);  // "raw" | "modified"

Layer layer_of(Scenario scenario);
Basis basis_of(Scenario scenario);

// Standalone default: modified for the derivatives scenarios, raw for FI/SF.
CapitalBasis default_capital_basis(Scenario scenario);

struct LayerImpactMatrix {
  Scenario scenario = Scenario::kEad;
  CapitalBasis capital_basis = CapitalBasis::kModified;
  std::vector<std::size_t> index;         // matrix position -> institution index
  Eigen::MatrixXd values;                 // non-negative, zero diagonal
  std::optional<ModifiedCapital> capital; // present for the modified basis

  std::size_t size() const { return index.size(); }
};

// s_ab = X(b reports on a) / C_b^modified with X the EAD or NAC table.
// `members` defaults to the capital context's members; an institution in
// `members` without capital context that reports a positive exposure inside
// the set raises std::invalid_argument.
LayerImpactMatrix build_derivatives_impact(const Portfolio& portfolio,
                                           const ModifiedCapital& capital, Basis basis,
                                           std::span<const std::size_t> members = {});

// s_ab = max(0, G(b->a) - G(a->b)) / C_b with G the gross FI MtM or SF
// notional table and C raw or modified own funds. `members` defaults to the
// capital context's members (modified) or every institution (raw).
LayerImpactMatrix build_netted_gross_impact(const Portfolio& portfolio, Layer layer,
                                            CapitalBasis basis,
                                            const ModifiedCapital* capital = nullptr,
                                            std::span<const std::size_t> members = {});

// Dispatches on the scenario.
LayerImpactMatrix build_layer_impact(const Portfolio& portfolio, Scenario scenario,
                                     CapitalBasis basis, const ModifiedCapital* capital,
                                     std::span<const std::size_t> members = {});

}  // namespace contagion
