#include "doctest.h"

#include "contagion/errors.hpp"
#include "contagion/portfolio.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace contagion;
using fixture::bank;

namespace {

std::string institutions_csv(std::size_t n) {
  std::string out = "id,own_funds,min_capital\n";
  for (std::size_t i = 0; i < n; ++i) {
    out += "B" + std::to_string(i) + "," + std::to_string(1000 + 10 * i) + ".00,600.50\n";
  }
  return out;
}

}  // namespace

TEST_CASE("amount parsing is exact and strict") {
  CHECK(Amount::parse("12.34").units() == 1234);
  CHECK(Amount::parse("12").units() == 1200);
  CHECK(Amount::parse("-0.5").units() == -50);
  CHECK(Amount::parse("7.125", 3).to_string() == "7.125");
  CHECK(Amount::parse("0.10").to_string() == "0.10");
  CHECK_THROWS_AS(Amount::parse("1.234"), std::invalid_argument);
  CHECK_THROWS_AS(Amount::parse("1,000"), std::invalid_argument);
  CHECK_THROWS_AS(Amount::parse("1e3"), std::invalid_argument);
  CHECK_THROWS_AS(Amount::parse(""), std::invalid_argument);
  CHECK_THROWS_AS(Amount::parse("."), std::invalid_argument);
  CHECK_THROWS_AS(Amount::parse("3."), std::invalid_argument);
  CHECK(Amount::parse("1.5", 1) == Amount::parse("1.50", 2));
  CHECK(Amount::parse("1.49") < Amount::parse("1.5", 1));
  CHECK(Amount::from_double(2.5, 0).units() == 3);
  CHECK(Amount::from_double(-2.5, 0).units() == -3);
}

TEST_CASE("institution ratios") {
  const auto r = bank("A", 100, 60);
  CHECK(r.available_funds() == doctest::Approx(40));
  CHECK(r.available_ratio() == doctest::Approx(0.4));
}

TEST_CASE("portfolio construction validates invariants") {
  CHECK_THROWS_AS(Portfolio({bank("A", 100, 100)}, {}), ValidationError);
  CHECK_THROWS_AS(Portfolio({bank("A", 0, 0)}, {}), ValidationError);
  CHECK_THROWS_AS(Portfolio({bank("A", 100, 1), bank("A", 50, 1)}, {}), ValidationError);
  CHECK_THROWS_AS(Portfolio({bank("A", 100, 1), bank("B", 50, 1)},
                            {fixture::table(Layer::kDerivatives, Basis::kEad, {{0, 0, 1}})}),
                  ValidationError);
  CHECK_THROWS_AS(Portfolio({bank("A", 100, 1), bank("B", 50, 1)},
                            {fixture::table(Layer::kFixedIncome, Basis::kEad, {{0, 1, 1}})}),
                  ValidationError);
  CHECK_THROWS_AS(Portfolio({bank("A", 100, 1), bank("B", 50, 1)},
                            {fixture::table(Layer::kDerivatives, Basis::kEad, {{0, 5, 1}})}),
                  ValidationError);
  CHECK_THROWS_AS(Portfolio({bank("A", 100, 1), bank("B", 50, 1)},
                            {fixture::table(Layer::kDerivatives, Basis::kEad, {{0, 1, -1}})}),
                  ValidationError);
}

TEST_CASE("loading 22 institutions with three layers") {
  fixture::TempDir dir;
  dir.write("institutions.csv", institutions_csv(22));
  dir.write("exposures_D_EAD.csv", "reporter_id,counterparty_id,amount\nB0,B1,10.00\nB1,B0,5\n");
  dir.write("exposures_FI_MtM_gross.csv", "reporter_id,counterparty_id,amount\nB2,B3,1.5\n");
  dir.write("exposures_SF_Notional_gross.csv", "reporter_id,counterparty_id,amount\n");
  const auto sources = discover_exposure_files(dir.path());
  REQUIRE(sources.size() == 3);
  const Portfolio p = load_portfolio(dir / "institutions.csv", sources);
  CHECK(p.size() == 22);
  CHECK(p.institution(0).id == "B0");
  CHECK(p.table(Layer::kDerivatives, Basis::kEad).amount(0, 1) == doctest::Approx(10.0));
  CHECK(p.table(Layer::kDerivatives, Basis::kEad).amount(1, 0) == doctest::Approx(5.0));
  CHECK(p.table(Layer::kSecuritiesFinancing, Basis::kNotionalGross).entries.empty());
  CHECK(p.find(Layer::kDerivatives, Basis::kNac) == nullptr);
  CHECK_THROWS_AS(p.table(Layer::kDerivatives, Basis::kNac), std::invalid_argument);
}

TEST_CASE("load errors carry file and line") {
  fixture::TempDir dir;
  auto expect = [&](const std::string& inst, const std::string& exposures, const std::string& needle,
                    bool parse) {
    dir.write("institutions.csv", inst);
    dir.write("exposures_D_EAD.csv", exposures);
    const std::vector<ExposureSource> sources{
        {Layer::kDerivatives, Basis::kEad, dir / "exposures_D_EAD.csv"}};
    try {
      load_portfolio(dir / "institutions.csv", sources);
      FAIL("expected an error");
    } catch (const ParseError& e) {
      CHECK(parse);
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    } catch (const ValidationError& e) {
      CHECK_FALSE(parse);
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  const std::string ok_inst = "id,own_funds,min_capital\nA,100,50\nB,200,160\n";
  const std::string head = "reporter_id,counterparty_id,amount\n";
  expect("id,own_funds,min_capital\nA,100,50\nB,200,200\n", head,
         "institutions.csv:3: institution 'B'", false);
  expect(ok_inst, head + "A,C,1\n", "exposures_D_EAD.csv:2: unknown counterparty", false);
  expect(ok_inst, head + "A,B,1\nA,A,1\n", "exposures_D_EAD.csv:3: self-exposure", false);
  expect(ok_inst, head + "A,B,-1\n", "exposures_D_EAD.csv:2: negative", false);
  expect(ok_inst, head + "A,B,1\nA,B,2\n", "exposures_D_EAD.csv:3: duplicate", false);
  expect(ok_inst, head + "A,B,abc\n", "exposures_D_EAD.csv:2: malformed", true);
  expect(ok_inst, head + "A,B\n", "exposures_D_EAD.csv:2: expected 3 fields", true);
  expect(ok_inst, "from,to,amount\n", "exposures_D_EAD.csv:1: expected header", true);
  expect("id,own_funds,min_capital\nA,100.123,50\n", head, "institutions.csv:2:", true);
}

TEST_CASE("bom and blank lines are tolerated") {
  fixture::TempDir dir;
  dir.write("institutions.csv", "\xEF\xBB\xBFid,own_funds,min_capital\n\nA,100,50\r\nB,200,100\n\n");
  const Portfolio p = load_portfolio(dir / "institutions.csv", {});
  CHECK(p.size() == 2);
  CHECK(p.ids() == std::vector<std::string>{"A", "B"});
}

TEST_CASE("write then load is a round trip") {
  oracle::Gen g(11);
  std::vector<InstitutionRecord> banks;
  for (int i = 0; i < 7; ++i) {
    banks.push_back(bank("X" + std::to_string(i), g.range(100, 1000), g.range(1, 90)));
  }
  std::vector<fixture::Entry> d, fi;
  for (std::size_t a = 0; a < 7; ++a) {
    for (std::size_t b = 0; b < 7; ++b) {
      if (a != b && g.coin(0.4)) d.push_back({a, b, g.range(0, 50)});
      if (a != b && g.coin(0.4)) fi.push_back({a, b, g.range(0, 50)});
    }
  }
  const Portfolio original(banks, {fixture::table(Layer::kDerivatives, Basis::kEad, d),
                                   fixture::table(Layer::kFixedIncome, Basis::kMtmGross, fi)});
  fixture::TempDir dir;
  write_portfolio(original, dir.path());
  const Portfolio once = load_portfolio(dir / "institutions.csv", discover_exposure_files(dir.path()));
  CHECK(once == original);
  fixture::TempDir dir2;
  write_portfolio(once, dir2.path());
  CHECK(load_portfolio(dir2 / "institutions.csv", discover_exposure_files(dir2.path())) == once);
}

TEST_CASE("reporting threshold") {
  const std::vector<InstitutionRecord> banks{bank("A", 100, 50), bank("B", 100, 50),
                                             bank("C", 100, 50), bank("D", 100, 50)};
  SUBCASE("zero threshold is the identity") {
    const Portfolio p(banks, {fixture::table(Layer::kDerivatives, Basis::kEad, {{0, 1, 0}, {1, 2, 3}})});
    CHECK(apply_reporting_threshold(p, Amount::parse("0")) == p);
  }
  SUBCASE("single small entry removed") {
    const Portfolio p(banks, {fixture::table(Layer::kDerivatives, Basis::kEad, {{0, 1, 5}})});
    CHECK(apply_reporting_threshold(p, Amount::parse("10"))
              .table(Layer::kDerivatives, Basis::kEad)
              .entries.empty());
  }
  SUBCASE("entries at the threshold are kept") {
    const Portfolio p(banks, {fixture::table(Layer::kDerivatives, Basis::kEad,
                                             {{0, 1, 3}, {1, 2, 10}, {2, 3, 12}})});
    const auto& kept =
        apply_reporting_threshold(p, Amount::parse("10")).table(Layer::kDerivatives, Basis::kEad);
    CHECK(kept.entries.size() == 2);
    CHECK(kept.amount(1, 2) == 10.0);
    CHECK(kept.amount(2, 3) == 12.0);
  }
  SUBCASE("negative threshold rejected") {
    const Portfolio p(banks, {});
    CHECK_THROWS_AS(apply_reporting_threshold(p, Amount::parse("-1")), std::invalid_argument);
  }
}

TEST_CASE("threshold matches a filter oracle and is monotone") {
  oracle::Gen g(5);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = g.between(2, 8);
    std::vector<InstitutionRecord> banks;
    for (std::size_t i = 0; i < n; ++i) banks.push_back(bank("I" + std::to_string(i), 100, 10));
    std::vector<fixture::Entry> entries;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (a != b && g.coin(0.5)) entries.push_back({a, b, std::round(g.range(0, 20))});
      }
    }
    const Portfolio p(banks, {fixture::table(Layer::kSecuritiesFinancing, Basis::kNotionalGross, entries)});
    std::size_t previous = entries.size() + 1;
    for (int t = 0; t <= 21; t += 3) {
      const auto& kept = apply_reporting_threshold(p, Amount::from_double(t))
                             .table(Layer::kSecuritiesFinancing, Basis::kNotionalGross);
      std::size_t expected = 0;
      for (const auto& e : entries) {
        if (e.amount >= t) {
          ++expected;
          CHECK(kept.amount(e.reporter, e.counterparty) == e.amount);
        }
      }
      CHECK(kept.entries.size() == expected);
      CHECK(kept.entries.size() <= previous);
      previous = kept.entries.size();
    }
  }
}
