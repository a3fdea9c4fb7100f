#include "contagion/portfolio.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "contagion/errors.hpp"

namespace contagion {

namespace {

constexpr std::array<std::int64_t, Amount::kMaxScale + 1> kPow10 = {
    1,      10,      100,      1000,      10000,
    100000, 1000000, 10000000, 100000000, 1000000000};

__extension__ typedef __int128 WideUnits;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_row(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

struct CsvRow {
  std::size_t line;
  std::vector<std::string> fields;
};

// Reads a comma separated file whose first line must equal `header`.
// Blank lines are skipped.
std::vector<CsvRow> read_csv(const std::filesystem::path& path,
                             const std::vector<std::string_view>& header) {
  std::ifstream in(path);
  const std::string file = path.filename().string();
  if (!in) throw ParseError({file, 0}, "cannot open file");

  std::vector<CsvRow> rows;
  std::string raw;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
    if (trim(line).empty()) continue;
    auto fields = split_row(line);
    if (!header_seen) {
      if (fields != header) {
        std::string expected;
        for (std::size_t k = 0; k < header.size(); ++k) {
          if (k) expected += ',';
          expected += header[k];
        }
        throw ParseError({file, line_no}, "expected header '" + expected + "'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != header.size()) {
      throw ParseError({file, line_no}, "expected " + std::to_string(header.size()) +
                                            " fields, found " + std::to_string(fields.size()));
    }
    CsvRow row{line_no, {}};
    for (auto f : fields) row.fields.emplace_back(f);
    rows.push_back(std::move(row));
  }
  if (!header_seen) throw ParseError({file, 1}, "missing header");
  return rows;
}

Amount parse_amount(const std::string& text, const SourceLocation& where, int scale) {
  try {
    return Amount::parse(text, scale);
  } catch (const std::invalid_argument& e) {
    throw ParseError(where, e.what());
  }
}

void check_record(const InstitutionRecord& r, const SourceLocation& where) {
  if (r.id.empty()) throw ValidationError(where, "empty institution id");
  if (r.own_funds.units() <= 0) {
    throw ValidationError(where, "institution '" + r.id + "': own_funds must be positive");
  }
  if (r.min_capital.is_negative()) {
    throw ValidationError(where, "institution '" + r.id + "': min_capital must be non-negative");
  }
  if (r.min_capital >= r.own_funds) {
    throw ValidationError(where,
                          "institution '" + r.id + "': min_capital must be below own_funds");
  }
}

}  // namespace

std::string_view to_string(Layer layer) {
  switch (layer) {
    case Layer::kFixedIncome:
      return "FI";
    case Layer::kSecuritiesFinancing:
      return "SF";
    case Layer::kDerivatives:
      return "D";
  }
  return "?";
}

std::string_view to_string(Basis basis) {
  switch (basis) {
    case Basis::kEad:
      return "EAD";
    case Basis::kNac:
      return "NAC";
    case Basis::kMtmGross:
      return "MtM_gross";
    case Basis::kNotionalGross:
      return "Notional_gross";
  }
  return "?";
}

Layer parse_layer(std::string_view token) {
  if (token == "FI") return Layer::kFixedIncome;
  if (token == "SF") return Layer::kSecuritiesFinancing;
  if (token == "D") return Layer::kDerivatives;
  throw std::invalid_argument("unknown layer '" + std::string(token) + "'");
}

Basis parse_basis(std::string_view token) {
  if (token == "EAD") return Basis::kEad;
  if (token == "NAC") return Basis::kNac;
  if (token == "MtM_gross") return Basis::kMtmGross;
  if (token == "Notional_gross") return Basis::kNotionalGross;
  throw std::invalid_argument("unknown basis '" + std::string(token) + "'");
}

bool basis_allowed(Layer layer, Basis basis) {
  switch (layer) {
    case Layer::kDerivatives:
      return basis == Basis::kEad || basis == Basis::kNac;
    case Layer::kFixedIncome:
      return basis == Basis::kMtmGross;
    case Layer::kSecuritiesFinancing:
      return basis == Basis::kNotionalGross;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Amount

Amount Amount::from_units(Units units, int scale) {
  if (scale < 0 || scale > kMaxScale) throw std::invalid_argument("amount scale out of range");
  return Amount(units, scale);
}

Amount Amount::parse(std::string_view text, int scale) {
  if (scale < 0 || scale > kMaxScale) throw std::invalid_argument("amount scale out of range");
  std::string_view s = trim(text);
  if (s.empty()) throw std::invalid_argument("empty amount");
  bool negative = false;
  if (s.front() == '-') {
    negative = true;
    s.remove_prefix(1);
  }
  const auto dot = s.find('.');
  const std::string_view whole = s.substr(0, dot);
  const std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
  if (whole.empty() && frac.empty()) {
    throw std::invalid_argument("malformed amount '" + std::string(text) + "'");
  }
  if (dot != std::string_view::npos && frac.empty()) {
    throw std::invalid_argument("malformed amount '" + std::string(text) + "'");
  }
  auto all_digits = [](std::string_view d) {
    return std::all_of(d.begin(), d.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  if (!all_digits(whole) || !all_digits(frac)) {
    throw std::invalid_argument("malformed amount '" + std::string(text) + "'");
  }
  if (frac.size() > static_cast<std::size_t>(scale)) {
    throw std::invalid_argument("amount '" + std::string(text) + "' has more than " +
                                std::to_string(scale) + " decimal places");
  }
  constexpr Units kMax = std::numeric_limits<Units>::max();
  Units units = 0;
  auto push_digit = [&](char c) {
    const Units d = c - '0';
    if (units > (kMax - d) / 10) {
      throw std::invalid_argument("amount '" + std::string(text) + "' out of range");
    }
    units = units * 10 + d;
  };
  for (char c : whole) push_digit(c);
  for (char c : frac) push_digit(c);
  for (std::size_t k = frac.size(); k < static_cast<std::size_t>(scale); ++k) push_digit('0');
  return Amount(negative ? -units : units, scale);
}

Amount Amount::from_double(double value, int scale) {
  if (scale < 0 || scale > kMaxScale) throw std::invalid_argument("amount scale out of range");
  const double scaled = std::round(value * static_cast<double>(kPow10[scale]));
  if (!std::isfinite(scaled) || std::fabs(scaled) > 9.0e18) {
    throw std::invalid_argument("amount out of range");
  }
  return Amount(static_cast<Units>(scaled), scale);
}

double Amount::to_double() const {
  return static_cast<double>(units_) / static_cast<double>(kPow10[scale_]);
}

std::string Amount::to_string() const {
  const bool negative = units_ < 0;
  const unsigned long long magnitude =
      negative ? 0ULL - static_cast<unsigned long long>(units_) : static_cast<unsigned long long>(units_);
  const auto pow = static_cast<unsigned long long>(kPow10[scale_]);
  std::string out = negative ? "-" : "";
  out += std::to_string(magnitude / pow);
  if (scale_ > 0) {
    std::string frac = std::to_string(magnitude % pow);
    out += '.';
    out += std::string(static_cast<std::size_t>(scale_) - frac.size(), '0');
    out += frac;
  }
  return out;
}

std::strong_ordering Amount::operator<=>(const Amount& other) const {
  const int scale = std::max(scale_, other.scale_);
  const WideUnits lhs = static_cast<WideUnits>(units_) * kPow10[scale - scale_];
  const WideUnits rhs = static_cast<WideUnits>(other.units_) * kPow10[scale - other.scale_];
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

// ---------------------------------------------------------------------------
// Portfolio

double LayerExposures::amount(std::size_t reporter, std::size_t counterparty) const {
  const auto it = entries.find({reporter, counterparty});
  return it == entries.end() ? 0.0 : it->second.to_double();
}

Portfolio::Portfolio(std::vector<InstitutionRecord> institutions,
                     std::vector<LayerExposures> tables, std::string period_tag)
    : institutions_(std::move(institutions)), period_tag_(std::move(period_tag)) {
  for (std::size_t i = 0; i < institutions_.size(); ++i) {
    check_record(institutions_[i], {});
    if (!index_.emplace(institutions_[i].id, i).second) {
      throw ValidationError("duplicate institution id '" + institutions_[i].id + "'");
    }
  }
  const std::size_t n = institutions_.size();
  for (auto& table : tables) {
    const std::string name(to_string(table.layer));
    if (!basis_allowed(table.layer, table.basis)) {
      throw ValidationError("basis " + std::string(to_string(table.basis)) +
                            " is not valid for layer " + name);
    }
    for (const auto& [key, value] : table.entries) {
      const auto [reporter, counterparty] = key;
      if (reporter >= n || counterparty >= n) {
        throw ValidationError("layer " + name + ": exposure refers to an unknown institution");
      }
      if (reporter == counterparty) {
        throw ValidationError("layer " + name + ": self-exposure of '" +
                              institutions_[reporter].id + "'");
      }
      if (value.is_negative()) {
        throw ValidationError("layer " + name + ": negative amount from '" +
                              institutions_[reporter].id + "' to '" +
                              institutions_[counterparty].id + "'");
      }
    }
    const TableKey key{table.layer, table.basis};
    if (!tables_.emplace(key, std::move(table)).second) {
      throw ValidationError("duplicate exposure table for layer " + name);
    }
  }
}

std::optional<std::size_t> Portfolio::index_of(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const LayerExposures* Portfolio::find(Layer layer, Basis basis) const {
  const auto it = tables_.find({layer, basis});
  return it == tables_.end() ? nullptr : &it->second;
}

const LayerExposures& Portfolio::table(Layer layer, Basis basis) const {
  if (const auto* t = find(layer, basis)) return *t;
  throw std::invalid_argument("portfolio has no " + std::string(to_string(layer)) + "/" +
                              std::string(to_string(basis)) + " exposure table");
}

std::vector<std::string> Portfolio::ids() const {
  std::vector<std::string> out;
  out.reserve(institutions_.size());
  for (const auto& r : institutions_) out.push_back(r.id);
  return out;
}

// ---------------------------------------------------------------------------
// Files

Portfolio load_portfolio(const std::filesystem::path& institutions_file,
                         const std::vector<ExposureSource>& exposure_files, int scale,
                         std::string period_tag) {
  const std::string inst_name = institutions_file.filename().string();
  std::vector<InstitutionRecord> institutions;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& row : read_csv(institutions_file, {"id", "own_funds", "min_capital"})) {
    const SourceLocation where{inst_name, row.line};
    InstitutionRecord record{row.fields[0], parse_amount(row.fields[1], where, scale),
                             parse_amount(row.fields[2], where, scale)};
    check_record(record, where);
    if (!index.emplace(record.id, institutions.size()).second) {
      throw ValidationError(where, "duplicate institution id '" + record.id + "'");
    }
    institutions.push_back(std::move(record));
  }

  std::vector<LayerExposures> tables;
  std::set<TableKey> seen;
  for (const auto& source : exposure_files) {
    const std::string file = source.path.filename().string();
    if (!basis_allowed(source.layer, source.basis)) {
      throw ValidationError({file, 0}, "basis " + std::string(to_string(source.basis)) +
                                           " is not valid for layer " +
                                           std::string(to_string(source.layer)));
    }
    if (!seen.insert({source.layer, source.basis}).second) {
      throw ValidationError({file, 0}, "exposure table listed twice");
    }
    LayerExposures table{source.layer, source.basis, {}};
    for (const auto& row : read_csv(source.path, {"reporter_id", "counterparty_id", "amount"})) {
      const SourceLocation where{file, row.line};
      const auto reporter = index.find(row.fields[0]);
      if (reporter == index.end()) {
        throw ValidationError(where, "unknown reporter id '" + row.fields[0] + "'");
      }
      const auto counterparty = index.find(row.fields[1]);
      if (counterparty == index.end()) {
        throw ValidationError(where, "unknown counterparty id '" + row.fields[1] + "'");
      }
      if (reporter->second == counterparty->second) {
        throw ValidationError(where, "self-exposure of '" + row.fields[0] + "'");
      }
      const Amount amount = parse_amount(row.fields[2], where, scale);
      if (amount.is_negative()) throw ValidationError(where, "negative amount");
      if (!table.entries.emplace(std::pair{reporter->second, counterparty->second}, amount)
               .second) {
        throw ValidationError(where, "duplicate exposure from '" + row.fields[0] + "' to '" +
                                         row.fields[1] + "'");
      }
    }
    tables.push_back(std::move(table));
  }
  return Portfolio(std::move(institutions), std::move(tables), std::move(period_tag));
}

std::string exposure_file_name(Layer layer, Basis basis) {
  return "exposures_" + std::string(to_string(layer)) + "_" + std::string(to_string(basis)) +
         ".csv";
}

std::vector<ExposureSource> discover_exposure_files(const std::filesystem::path& directory) {
  std::vector<ExposureSource> out;
  for (Layer layer : {Layer::kFixedIncome, Layer::kSecuritiesFinancing, Layer::kDerivatives}) {
    for (Basis basis : {Basis::kEad, Basis::kNac, Basis::kMtmGross, Basis::kNotionalGross}) {
      if (!basis_allowed(layer, basis)) continue;
      const auto path = directory / exposure_file_name(layer, basis);
      if (std::filesystem::exists(path)) out.push_back({layer, basis, path});
    }
  }
  return out;
}

void write_portfolio(const Portfolio& portfolio, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  auto open = [](const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
  };
  {
    auto out = open(directory / "institutions.csv");
    out << "id,own_funds,min_capital\n";
    for (const auto& r : portfolio.institutions()) {
      out << r.id << ',' << r.own_funds.to_string() << ',' << r.min_capital.to_string() << '\n';
    }
  }
  for (const auto& [key, table] : portfolio.tables()) {
    auto out = open(directory / exposure_file_name(key.layer, key.basis));
    out << "reporter_id,counterparty_id,amount\n";
    for (const auto& [pair, amount] : table.entries) {
      out << portfolio.institution(pair.first).id << ','
          << portfolio.institution(pair.second).id << ',' << amount.to_string() << '\n';
    }
  }
}

Portfolio apply_reporting_threshold(const Portfolio& portfolio, const Amount& threshold) {
  if (threshold.is_negative()) throw std::invalid_argument("reporting threshold must be >= 0");
  std::vector<LayerExposures> tables;
  for (const auto& [key, table] : portfolio.tables()) {
    LayerExposures kept{table.layer, table.basis, {}};
    for (const auto& [pair, amount] : table.entries) {
      if (amount >= threshold) kept.entries.emplace(pair, amount);
    }
    tables.push_back(std::move(kept));
  }
  return Portfolio(portfolio.institutions(), std::move(tables), portfolio.period_tag());
}

}  // namespace contagion
