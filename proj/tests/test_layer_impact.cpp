#include "doctest.h"

#include "contagion/layer_impact.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace contagion;
using fixture::bank;

TEST_CASE("modified capital from the direct formula") {
  const Portfolio p({bank("A", 100, 50), bank("B", 200, 160)}, {});
  const auto cap = compute_modified_capital(p, all_institutions(p));
  CHECK(cap.p_min == doctest::Approx(0.2));
  CHECK(cap.alpha[0] == doctest::Approx(2.5));
  CHECK(cap.alpha[1] == doctest::Approx(1.0));
  CHECK(cap.modified_funds[0] == doctest::Approx(250));
  CHECK(cap.modified_funds[1] == doctest::Approx(200));
  CHECK(cap.modified_funds_of(1) == doctest::Approx(200));
  CHECK_THROWS_AS(compute_modified_capital(p, std::vector<std::size_t>{}), std::invalid_argument);
}

TEST_CASE("modified capital with equal ratios is the identity") {
  const Portfolio p({bank("A", 100, 80), bank("B", 300, 240), bank("C", 50, 40)}, {});
  const auto cap = compute_modified_capital(p, all_institutions(p));
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(cap.alpha[k] == doctest::Approx(1.0));
    CHECK(cap.modified_funds[k] == doctest::Approx(p.institution(k).own_funds.to_double()));
  }
}

TEST_CASE("modified capital restricted to members") {
  const Portfolio p({bank("A", 100, 50), bank("B", 200, 160), bank("C", 100, 70)}, {});
  const std::vector<std::size_t> members{0, 2};
  const auto cap = compute_modified_capital(p, members);
  CHECK(cap.p_min == doctest::Approx(0.3));
  CHECK_FALSE(cap.contains(1));
  CHECK_THROWS_AS(cap.modified_funds_of(1), std::out_of_range);
}

TEST_CASE("modified capital invariants on random instances") {
  oracle::Gen g(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<InstitutionRecord> banks;
    const std::size_t n = g.between(1, 10);
    for (std::size_t i = 0; i < n; ++i) {
      const double c = g.range(10, 1000);
      banks.push_back(bank("I" + std::to_string(i), c, c * g.range(0.0, 0.95)));
    }
    const Portfolio p(banks, {});
    const auto cap = compute_modified_capital(p, all_institutions(p));
    for (std::size_t k = 0; k < n; ++k) {
      CHECK(cap.alpha[k] >= 1.0);
      const double ratio = p.institution(k).available_funds() / cap.modified_funds[k];
      CHECK(std::abs(ratio - cap.p_min) <= 1e-12 * cap.p_min);
    }
  }
}

TEST_CASE("derivatives impact entries") {
  const Portfolio p({bank("A", 200, 100), bank("B", 200, 100), bank("C", 400, 300)},
                    {fixture::table(Layer::kDerivatives, Basis::kEad, {{1, 0, 10}, {0, 1, 4}, {2, 0, 30}}),
                     fixture::table(Layer::kDerivatives, Basis::kNac, {{1, 0, 5}})});
  const auto cap = compute_modified_capital(p, all_institutions(p));
  // p = (0.5, 0.5, 0.25): p_min 0.25, C^mod = (400, 400, 400)
  const auto ead = build_derivatives_impact(p, cap, Basis::kEad);
  CHECK(ead.values(0, 1) == doctest::Approx(10.0 / 400));
  CHECK(ead.values(1, 0) == doctest::Approx(4.0 / 400));
  CHECK(ead.values(0, 2) == doctest::Approx(30.0 / 400));
  CHECK(ead.values(2, 0) == 0.0);
  CHECK(ead.values(1, 2) == 0.0);
  for (int k = 0; k < 3; ++k) CHECK(ead.values(k, k) == 0.0);
  const auto nac = build_derivatives_impact(p, cap, Basis::kNac);
  CHECK(nac.values(0, 1) == doctest::Approx(5.0 / 400));
  CHECK(nac.values.sum() == doctest::Approx(5.0 / 400));
  CHECK_THROWS_AS(build_derivatives_impact(p, cap, Basis::kMtmGross), std::invalid_argument);
}

TEST_CASE("derivatives impact from the direct formula") {
  const Portfolio p({bank("A", 100, 50), bank("B", 100, 80)},
                    {fixture::table(Layer::kDerivatives, Basis::kEad, {{1, 0, 10}})});
  // p = (0.5, 0.2); C^mod_B = 20 / 0.2 = 100, so s_AB = 10 / 100
  const auto cap = compute_modified_capital(p, all_institutions(p));
  CHECK(build_derivatives_impact(p, cap, Basis::kEad).values(0, 1) == doctest::Approx(0.1));
}

TEST_CASE("derivatives impact over a member subset needs capital context") {
  const Portfolio p({bank("A", 100, 50), bank("B", 100, 50), bank("C", 100, 50)},
                    {fixture::table(Layer::kDerivatives, Basis::kEad, {{1, 0, 10}, {2, 1, 3}})});
  const std::vector<std::size_t> two{0, 1};
  const auto cap = compute_modified_capital(p, two);
  const auto m = build_derivatives_impact(p, cap, Basis::kEad);
  CHECK(m.size() == 2);
  CHECK(m.values(0, 1) == doctest::Approx(0.1));
  const std::vector<std::size_t> three{0, 1, 2};
  CHECK_THROWS_AS(build_derivatives_impact(p, cap, Basis::kEad, three), std::invalid_argument);
}

TEST_CASE("netted gross impact") {
  const Portfolio p({bank("A", 100, 50), bank("B", 100, 50)},
                    {fixture::table(Layer::kFixedIncome, Basis::kMtmGross, {{1, 0, 30}, {0, 1, 10}}),
                     fixture::table(Layer::kSecuritiesFinancing, Basis::kNotionalGross,
                                    {{1, 0, 7}, {0, 1, 7}})});
  const auto fi = build_netted_gross_impact(p, Layer::kFixedIncome, CapitalBasis::kRaw);
  CHECK(fi.values(0, 1) == doctest::Approx(0.2));
  CHECK(fi.values(1, 0) == 0.0);
  const auto sf = build_netted_gross_impact(p, Layer::kSecuritiesFinancing, CapitalBasis::kRaw);
  CHECK(sf.values.isZero());
  CHECK_THROWS_AS(build_netted_gross_impact(p, Layer::kFixedIncome, CapitalBasis::kModified),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_netted_gross_impact(p, Layer::kDerivatives, CapitalBasis::kRaw),
                  std::invalid_argument);
}

TEST_CASE("netted gross impact matches a pairwise oracle") {
  oracle::Gen g(17);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = g.between(2, 6);
    std::vector<InstitutionRecord> banks;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = std::round(g.range(50, 500));
      banks.push_back(bank("I" + std::to_string(i), c, std::round(c * g.range(0.1, 0.9))));
    }
    std::vector<fixture::Entry> gross;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (a != b && g.coin(0.6)) gross.push_back({a, b, std::round(g.range(0, 40))});
      }
    }
    const Portfolio p(banks, {fixture::table(Layer::kSecuritiesFinancing, Basis::kNotionalGross, gross)});
    const auto cap = compute_modified_capital(p, all_institutions(p));
    for (CapitalBasis basis : {CapitalBasis::kRaw, CapitalBasis::kModified}) {
      const auto m = build_netted_gross_impact(p, Layer::kSecuritiesFinancing, basis, &cap);
      const auto& t = p.table(Layer::kSecuritiesFinancing, Basis::kNotionalGross);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          const auto a = static_cast<Eigen::Index>(i);
          const auto b = static_cast<Eigen::Index>(j);
          if (i == j) {
            CHECK(m.values(a, b) == 0.0);
            continue;
          }
          const double c = basis == CapitalBasis::kRaw ? p.institution(j).own_funds.to_double()
                                                       : cap.modified_funds[j];
          const double expected = std::max(0.0, t.amount(j, i) - t.amount(i, j)) / c;
          CHECK(m.values(a, b) == doctest::Approx(expected).epsilon(1e-14));
          CHECK(m.values(a, b) * m.values(b, a) == 0.0);
        }
      }
    }
  }
}

TEST_CASE("default condition equivalence between raw and modified capital") {
  oracle::Gen g(23);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = g.between(2, 6);
    std::vector<InstitutionRecord> banks;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = std::round(g.range(50, 500));
      banks.push_back(bank("I" + std::to_string(i), c, std::round(c * g.range(0.2, 0.9))));
    }
    std::vector<fixture::Entry> ead;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (a != b && g.coin(0.7)) ead.push_back({a, b, std::round(g.range(0, 60))});
      }
    }
    const Portfolio p(banks, {fixture::table(Layer::kDerivatives, Basis::kEad, ead)});
    const auto cap = compute_modified_capital(p, all_institutions(p));
    const auto s = build_derivatives_impact(p, cap, Basis::kEad);
    const auto& t = p.table(Layer::kDerivatives, Basis::kEad);
    // random failed set
    std::vector<bool> failed(n);
    for (std::size_t j = 0; j < n; ++j) failed[j] = g.coin(0.5);
    for (std::size_t i = 0; i < n; ++i) {
      double raw = 0.0, modified = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (!failed[j] || j == i) continue;
        raw += t.amount(i, j) / p.institution(i).own_funds.to_double();
        modified += s.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
      }
      const double p_i = p.institution(i).available_ratio();
      // skip knife-edge cases that floating point cannot separate
      if (std::abs(raw - p_i) < 1e-12) continue;
      CHECK((raw > p_i) == (modified > cap.p_min));
    }
  }
}

TEST_CASE("impacts are invariant to a common scale") {
  const std::vector<fixture::Entry> ead{{1, 0, 10}, {0, 2, 4}, {2, 1, 30}};
  const Portfolio p({bank("A", 200, 100), bank("B", 300, 100), bank("C", 400, 300)},
                    {fixture::table(Layer::kDerivatives, Basis::kEad, ead)});
  std::vector<fixture::Entry> scaled = ead;
  for (auto& e : scaled) e.amount *= 8;
  const Portfolio q({bank("A", 1600, 800), bank("B", 2400, 800), bank("C", 3200, 2400)},
                    {fixture::table(Layer::kDerivatives, Basis::kEad, scaled)});
  const auto a = build_derivatives_impact(p, compute_modified_capital(p, all_institutions(p)), Basis::kEad);
  const auto b = build_derivatives_impact(q, compute_modified_capital(q, all_institutions(q)), Basis::kEad);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("scenario dispatch and defaults") {
  CHECK(default_capital_basis(Scenario::kEad) == CapitalBasis::kModified);
  CHECK(default_capital_basis(Scenario::kNac) == CapitalBasis::kModified);
  CHECK(default_capital_basis(Scenario::kFixedIncome) == CapitalBasis::kRaw);
  CHECK(default_capital_basis(Scenario::kSecuritiesFinancing) == CapitalBasis::kRaw);
  CHECK(parse_scenario("SF") == Scenario::kSecuritiesFinancing);
  CHECK_THROWS_AS(parse_scenario("XX"), std::invalid_argument);
  const Portfolio p({bank("A", 100, 50), bank("B", 100, 50)},
                    {fixture::table(Layer::kDerivatives, Basis::kEad, {{1, 0, 10}})});
  const auto cap = compute_modified_capital(p, all_institutions(p));
  CHECK_THROWS_AS(build_layer_impact(p, Scenario::kEad, CapitalBasis::kRaw, &cap), std::invalid_argument);
  CHECK(build_layer_impact(p, Scenario::kEad, CapitalBasis::kModified, &cap).values(0, 1) ==
        doctest::Approx(0.1));
}
