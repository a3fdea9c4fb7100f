#pragma once

// Institutions, layered bilateral exposures and their CSV ingestion.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace contagion {

// Market layers in the fixed block order used everywhere (FI, SF, D).
enum class Layer : int { kFixedIncome = 0, kSecuritiesFinancing = 1, kDerivatives = 2 };

// Valuation basis of a reported exposure table.
enum class Basis { kEad, kNac, kMtmGross, kNotionalGross };

std::string_view to_string(Layer layer);
std::string_view to_string(Basis basis);
Layer parse_layer(std::string_view token);  // "FI" | "SF" | "D"
Basis parse_basis(std::string_view token);  // "EAD" | "NAC" | "MtM_gross" | "Notional_gross"

// D accepts EAD or NAC, FI accepts MtM_gross, SF accepts Notional_gross.
bool basis_allowed(Layer layer, Basis basis);

inline constexpr int layer_slot(Layer layer) { return static_cast<int>(layer); }

// Exact decimal money amount stored as integer units of 10^-scale.
class Amount {
 public:
  using Units = std::int64_t;
  static constexpr int kDefaultScale = 2;
  static constexpr int kMaxScale = 9;

  constexpr Amount() = default;
  static Amount from_units(Units units, int scale = kDefaultScale);

  // Parses "[-]digits[.digits]" with at most `scale` fractional digits.
  // Throws std::invalid_argument on anything else.
  static Amount parse(std::string_view text, int scale = kDefaultScale);

  // Rounds half away from zero onto the given scale.
  static Amount from_double(double value, int scale = kDefaultScale);

  Units units() const { return units_; }
  int scale() const { return scale_; }
  double to_double() const;
  std::string to_string() const;

  bool is_negative() const { return units_ < 0; }
  bool is_zero() const { return units_ == 0; }

  std::strong_ordering operator<=>(const Amount& other) const;
  bool operator==(const Amount& other) const { return (*this <=> other) == 0; }

 private:
  Amount(Units units, int scale) : units_(units), scale_(scale) {}

  Units units_ = 0;
  int scale_ = kDefaultScale;
};

struct InstitutionRecord {
  std::string id;
  Amount own_funds;    // C_i
  Amount min_capital;  // MC_i

  double available_funds() const { return own_funds.to_double() - min_capital.to_double(); }
  // p_i = A_i / C_i
  double available_ratio() const { return available_funds() / own_funds.to_double(); }

  bool operator==(const InstitutionRecord&) const = default;
};

// Directed bilateral exposures of one layer on one valuation basis.
// Keys are (reporter j, counterparty i) as institution indices.
struct LayerExposures {
  using Key = std::pair<std::size_t, std::size_t>;

  Layer layer = Layer::kDerivatives;
  Basis basis = Basis::kEad;
  std::map<Key, Amount> entries;

  // Reported exposure of `reporter` to `counterparty`, zero when absent.
  double amount(std::size_t reporter, std::size_t counterparty) const;

  bool operator==(const LayerExposures&) const = default;
};

struct TableKey {
  Layer layer;
  Basis basis;
  auto operator<=>(const TableKey&) const = default;
};

// Validated, immutable set of institutions and exposure tables for one period.
class Portfolio {
 public:
  Portfolio() = default;

  // Validates every invariant; throws ValidationError.
  Portfolio(std::vector<InstitutionRecord> institutions, std::vector<LayerExposures> tables,
            std::string period_tag = {});

  std::size_t size() const { return institutions_.size(); }
  const std::vector<InstitutionRecord>& institutions() const { return institutions_; }
  const InstitutionRecord& institution(std::size_t index) const { return institutions_.at(index); }
  const std::map<TableKey, LayerExposures>& tables() const { return tables_; }
  const std::string& period_tag() const { return period_tag_; }

  std::optional<std::size_t> index_of(std::string_view id) const;
  const LayerExposures* find(Layer layer, Basis basis) const;
  // Throws std::invalid_argument naming the missing table.
  const LayerExposures& table(Layer layer, Basis basis) const;

  std::vector<std::string> ids() const;

  bool operator==(const Portfolio& other) const {
    return institutions_ == other.institutions_ && tables_ == other.tables_ &&
           period_tag_ == other.period_tag_;
  }

 private:
  std::vector<InstitutionRecord> institutions_;
  std::map<TableKey, LayerExposures> tables_;
  std::string period_tag_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct ExposureSource {
  Layer layer;
  Basis basis;
  std::filesystem::path path;
};

// Reads institutions.csv and the listed exposure files. Index order is the
// institutions file order. Errors carry file name and 1-based line number.
Portfolio load_portfolio(const std::filesystem::path& institutions_file,
                         const std::vector<ExposureSource>& exposure_files,
                         int scale = Amount::kDefaultScale, std::string period_tag = {});

// Finds exposures_<layer>_<basis>.csv files inside a directory.
std::vector<ExposureSource> discover_exposure_files(const std::filesystem::path& directory);

// Canonical file name for a table, e.g. exposures_D_EAD.csv.
std::string exposure_file_name(Layer layer, Basis basis);

// Writes institutions.csv plus one exposures file per table present.
void write_portfolio(const Portfolio& portfolio, const std::filesystem::path& directory);

// Drops every exposure strictly below `threshold`.
Portfolio apply_reporting_threshold(const Portfolio& portfolio, const Amount& threshold);

}  // namespace contagion
