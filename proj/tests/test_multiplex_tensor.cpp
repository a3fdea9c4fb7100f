#include "doctest.h"

#include <sstream>

#include "contagion/multiplex_tensor.hpp"
#include "support/oracles.hpp"

using namespace contagion;

namespace {

LayerImpactMatrix layer(Scenario scenario, Eigen::MatrixXd values) {
  LayerImpactMatrix out;
  out.scenario = scenario;
  out.values = std::move(values);
  for (Eigen::Index i = 0; i < out.values.rows(); ++i) out.index.push_back(static_cast<std::size_t>(i));
  return out;
}

// Zero pattern of the rank-4 tensor, checked on the unfolded matrix.
bool zero_pattern_holds(const Eigen::MatrixXd& u, Eigen::Index m) {
  for (Eigen::Index r = 0; r < 3 * m; ++r) {
    for (Eigen::Index c = 0; c < 3 * m; ++c) {
      const bool same_institution = r % m == c % m;
      const bool same_layer = r / m == c / m;
      if (same_institution == same_layer && u(r, c) != 0.0) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("interlayer coupling is the column sum of the source layer") {
  CHECK(interlayer_coupling(layer(Scenario::kEad, Eigen::MatrixXd::Zero(3, 3))).isZero());
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(2, 2);
  s(0, 1) = 0.3;
  const Eigen::VectorXd c = interlayer_coupling(layer(Scenario::kEad, s));
  CHECK(c(0) == 0.0);
  CHECK(c(1) == doctest::Approx(0.3));

  oracle::Gen g(7);
  const Eigen::MatrixXd r = oracle::random_matrix(g, 5, 0.6);
  const Eigen::VectorXd sums = interlayer_coupling(layer(Scenario::kEad, r));
  for (Eigen::Index i = 0; i < 5; ++i) {
    double expected = 0.0;
    for (Eigen::Index q = 0; q < 5; ++q) expected += r(q, i);
    CHECK(sums(i) == doctest::Approx(expected).epsilon(1e-15));
  }
}

TEST_CASE("build multiplex from the derivatives layer only") {
  const auto zero = Eigen::MatrixXd::Zero(3, 3);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
  d(0, 1) = 0.2;
  d(2, 1) = 0.1;
  d(1, 0) = 0.4;
  const auto t = build_multiplex(layer(Scenario::kFixedIncome, zero),
                                 layer(Scenario::kSecuritiesFinancing, zero), layer(Scenario::kEad, d));
  CHECK(t.within(0).isZero());
  CHECK(t.within(1).isZero());
  CHECK(t.within(2) == d);
  for (std::size_t k : {0u, 1u}) {
    CHECK(t.coupling(2, k)(0) == doctest::Approx(0.4));
    CHECK(t.coupling(2, k)(1) == doctest::Approx(0.3));
    CHECK(t.coupling(2, k)(2) == 0.0);
    CHECK(t.coupling(k, 2).isZero());
  }
  CHECK(t.coupling(0, 1).isZero());
  CHECK(t(1, 1, 2, 0) == doctest::Approx(0.3));
  CHECK(t(0, 1, 2, 0) == 0.0);
  CHECK(t(0, 1, 2, 2) == 0.2);
  CHECK(zero_pattern_holds(t.unfold(), 3));

  const auto all_zero = build_multiplex(layer(Scenario::kFixedIncome, zero),
                                        layer(Scenario::kSecuritiesFinancing, zero),
                                        layer(Scenario::kEad, zero));
  CHECK(all_zero.unfold().isZero());
  CHECK_THROWS_AS(build_multiplex(layer(Scenario::kFixedIncome, zero),
                                  layer(Scenario::kSecuritiesFinancing, Eigen::MatrixXd::Zero(2, 2)),
                                  layer(Scenario::kEad, zero)),
                  std::invalid_argument);
}

TEST_CASE("unfold places a single entry") {
  MultiplexImpactTensor::Blocks within{Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 2),
                                       Eigen::MatrixXd::Zero(2, 2)};
  within[2](0, 1) = 0.4;
  MultiplexImpactTensor::Couplings none;
  for (auto& row : none) {
    for (auto& v : row) v = Eigen::VectorXd::Zero(2);
  }
  const MultiplexImpactTensor t(within, none, {0, 1});
  const Eigen::MatrixXd u = t.unfold();
  CHECK(u(4, 5) == 0.4);
  CHECK(u.cwiseAbs().sum() == doctest::Approx(0.4));
}

TEST_CASE("construction rejects broken invariants") {
  MultiplexImpactTensor::Blocks within{Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 2),
                                       Eigen::MatrixXd::Zero(2, 2)};
  MultiplexImpactTensor::Couplings none;
  for (auto& row : none) {
    for (auto& v : row) v = Eigen::VectorXd::Zero(2);
  }
  auto diag = within;
  diag[1](1, 1) = 0.1;
  CHECK_THROWS_AS(MultiplexImpactTensor(diag, none, {0, 1}), std::invalid_argument);
  auto negative = within;
  negative[0](0, 1) = -0.1;
  CHECK_THROWS_AS(MultiplexImpactTensor(negative, none, {0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(MultiplexImpactTensor(within, none, {0, 1, 2}), std::invalid_argument);
  Eigen::MatrixXd off = Eigen::MatrixXd::Zero(6, 6);
  off(0, 3) = 0.5;  // FI(0) -> SF(1): different institution across layers
  CHECK_THROWS_AS(MultiplexImpactTensor::fold(off, {0, 1}), std::invalid_argument);
}

TEST_CASE("random tensors keep the zero pattern and round trip exactly") {
  oracle::Gen g(19);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t m = g.between(1, 8);
    const auto t = oracle::random_tensor(g, m, 0.4);
    const Eigen::MatrixXd u = t.unfold();
    CHECK(zero_pattern_holds(u, static_cast<Eigen::Index>(m)));
    const auto back = MultiplexImpactTensor::fold(u, t.index());
    CHECK(back == t);
    CHECK(back.unfold() == u);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t l = 0; l < 3; ++l) {
          for (std::size_t k = 0; k < 3; ++k) {
            CHECK(t(i, j, l, k) == u(static_cast<Eigen::Index>(l * m + i),
                                     static_cast<Eigen::Index>(k * m + j)));
          }
        }
      }
    }
  }
}

TEST_CASE("matrix-free transpose product agrees with the unfolded matrix") {
  oracle::Gen g(29);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t m = g.between(1, 9);
    const auto t = oracle::random_tensor(g, m, 0.5);
    Eigen::VectorXd x(static_cast<Eigen::Index>(3 * m));
    for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = g.range(-1, 1);
    const Eigen::VectorXd expected = t.unfold().transpose() * x;
    CHECK((t.apply_transpose(x) - expected).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("derived tensors") {
  oracle::Gen g(31);
  const auto t = oracle::random_tensor(g, 4, 0.7);
  const auto bare = t.without_couplings();
  for (std::size_t l = 0; l < 3; ++l) {
    CHECK(bare.within(l) == t.within(l));
    for (std::size_t k = 0; k < 3; ++k) {
      if (k != l) CHECK(bare.coupling(l, k).isZero());
    }
  }
  const Eigen::Vector4d f(1.0, 2.0, 4.0, 0.5);
  const auto scaled = t.with_target_columns_divided(f);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      for (std::size_t l = 0; l < 3; ++l) {
        for (std::size_t k = 0; k < 3; ++k) {
          CHECK(scaled(i, j, l, k) == doctest::Approx(t(i, j, l, k) / f(static_cast<Eigen::Index>(j))));
        }
      }
    }
  }
  const Eigen::MatrixXd agg = t.aggregate_impact();
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      double expected = 0.0;
      for (std::size_t l = 0; l < 3; ++l) {
        for (std::size_t k = 0; k < 3; ++k) expected += t(i, j, l, k);
      }
      CHECK(agg(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) == doctest::Approx(expected));
    }
  }
}

TEST_CASE("fold eigenvector") {
  const auto ones = fold_eigenvector(Eigen::VectorXd::Ones(6));
  CHECK(ones.eigenmatrix == Eigen::MatrixXd::Ones(2, 3));
  CHECK(ones.row_sums == Eigen::Vector2d(3, 3));
  Eigen::VectorXd v = Eigen::VectorXd::Zero(6);
  v(3) = 1.0;  // SF block, second institution
  CHECK(fold_eigenvector(v).row_sums == Eigen::Vector2d(0, 1));
  CHECK_THROWS_AS(fold_eigenvector(Eigen::VectorXd::Ones(5)), std::invalid_argument);

  oracle::Gen g(37);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = g.between(1, 10);
    Eigen::VectorXd x(static_cast<Eigen::Index>(3 * m));
    for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = g.unit();
    const auto folded = fold_eigenvector(x);
    std::vector<double> expected(m, 0.0);
    for (Eigen::Index k = 0; k < x.size(); ++k) expected[static_cast<std::size_t>(k) % m] += x(k);
    for (std::size_t i = 0; i < m; ++i) {
      CHECK(folded.row_sums(static_cast<Eigen::Index>(i)) == doctest::Approx(expected[i]));
    }
  }
}

TEST_CASE("unfolded csv export") {
  oracle::Gen g(3);
  const auto t = oracle::random_tensor(g, 2, 0.8);
  std::ostringstream out;
  write_unfolded_csv(out, t, {"A", "B"});
  const std::string csv = out.str();
  CHECK(csv.rfind("source,FI:A,FI:B,SF:A,SF:B,D:A,D:B\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
  CHECK_THROWS_AS(write_unfolded_csv(out, t, {"A"}), std::invalid_argument);
}
