#include "pdsape/errors.hpp"
#include "pdsape/penalty.hpp"
#include "pdsape/simulation.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace pdsape;

TEST_CASE("inverse normal cdf") {
  CHECK(inv_norm_cdf(0.5) == 0.0);
  // 40-digit reference value, rounded
  CHECK(std::abs(inv_norm_cdf(0.975) - 1.959963984540054) < 1e-12);
  std::mt19937_64 rng(8);
  // q a multiple of 2^-53 below 1/2, so that 1 - q is exact; magnitudes spread over 2^-53..2^-1
  for (int i = 0; i < 2000; ++i) {
    const std::uint64_t top = std::uint64_t{1} << (1 + i % 52);
    const std::uint64_t m = std::uniform_int_distribution<std::uint64_t>(1, top - 1)(rng);
    const double q = std::ldexp(static_cast<double>(m), -53);
    const double x = inv_norm_cdf(q);
    CHECK(std::abs(x + inv_norm_cdf(1.0 - q)) <= 1e-14 * std::max(1.0, std::abs(x)));
    if (q > 1e-3 && q < 1 - 1e-3) CHECK(std::abs(oracle::phi_cdf(x) - q) <= 1e-14);
  }
  CHECK_THROWS_AS(inv_norm_cdf(0.0), DomainError);
  CHECK_THROWS_AS(inv_norm_cdf(1.0), DomainError);
  CHECK_THROWS_AS(inv_norm_cdf(std::nan("")), DomainError);
}

TEST_CASE("lambda rules") {
  PenaltyConfig cfg;
  SUBCASE("gamma forced to 1, p = 1 gives zero") {
    cfg.gamma = 1.0;
    CHECK(lambda_for(PenaltyKind::LogitBeta, 50, 1, cfg) == doctest::Approx(0.0));
  }
  SUBCASE("G = 200, p = 300 against a 40-digit evaluation") {
    CHECK(lambda_for(PenaltyKind::LogitBeta, 200, 300, cfg) == doctest::Approx(62.25043544035344).epsilon(1e-12));
    CHECK(lambda_for(PenaltyKind::NodewiseGamma, 200, 300, cfg) ==
          doctest::Approx(80.73583457777006).epsilon(1e-12));
    CHECK(lambda_for(PenaltyKind::WeightedZeta, 200, 300, cfg) == doctest::Approx(80.7455058104036).epsilon(1e-12));
  }
  SUBCASE("zeta lambda dominates logit lambda; all increase in p") {
    for (Index p : {2, 5, 40, 300}) {
      CHECK(lambda_for(PenaltyKind::WeightedZeta, 100, p, cfg) >= lambda_for(PenaltyKind::LogitBeta, 100, p, cfg));
      for (auto kind : {PenaltyKind::LogitBeta, PenaltyKind::NodewiseGamma, PenaltyKind::WeightedZeta})
        CHECK(lambda_for(kind, 100, p + 1, cfg) > lambda_for(kind, 100, p, cfg));
    }
  }
  SUBCASE("default gamma is clamped to [1/G, 1/log G]") {
    CHECK(cfg.gamma_for(200) == doctest::Approx(0.1 / std::log(200.0)));
    CHECK(cfg.gamma_for(3) >= 1.0 / 3.0 - 1e-15);
  }
  SUBCASE("invalid configuration") {
    cfg.c = 1.0;
    CHECK_THROWS_AS(cfg.check(), ConfigError);
  }
}

TEST_CASE("logit loadings") {
  SUBCASE("m = 0, one cluster of size 1, X = (2)") {
    Eigen::MatrixXd X(1, 1);
    X << 2.0;
    auto ds = oracle::make_dataset(X, Eigen::VectorXd::Ones(1), {0});
    auto L = loadings_logit(ds, nullptr, 0, {});
    CHECK(L.loadings[0] == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("m = 1 at a perfect fit") {
    std::mt19937_64 rng(2);
    Eigen::VectorXd b(3);
    b << 0.2, -0.5, 0.4;
    auto raw = oracle::random_logit(rng, 6, 3, 3, b);
    Eigen::VectorXd y(raw.n());
    for (Index i = 0; i < raw.n(); ++i) y[i] = oracle::sigmoid(raw.X().to_dense().row(i).dot(b));
    auto ds = ClusteredDataset(y, raw.X(), raw.cluster_starts(), raw.cluster_ids());
    auto L = loadings_logit(ds, &b, 1, {});
    CHECK(L.loadings.cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("m = 0 on an M1 draw against a double loop") {
    auto ds = simulate_dgp(DgpSpec::make(DgpModel::M1, 0.0, 40, 100, 15, 3));
    auto L = loadings_logit(ds, nullptr, 0, {});
    const Eigen::MatrixXd X = ds.X().to_dense();
    for (Index j = 0; j < ds.p(); ++j) {
      double s = 0.0;
      for (Index g = 0; g < ds.G(); ++g)
        for (Index i = ds.cluster_begin(g); i < ds.cluster_end(g); ++i)
          s += static_cast<double>(ds.cluster_size(g)) * X(i, j) * X(i, j);
      const double ref = 0.5 * std::sqrt(s / static_cast<double>(ds.G()));
      CHECK(std::abs(L.loadings[j] - ref) <= 1e-12 * ref);
    }
  }
  SUBCASE("scale equivariance in a column") {
    std::mt19937_64 rng(9);
    auto ds = oracle::random_logit(rng, 8, 2, 3, Eigen::VectorXd::Zero(3));
    Eigen::MatrixXd X = ds.X().to_dense();
    X.col(2) *= 3.5;
    ClusteredDataset scaled(ds.y(), Design(X), ds.cluster_starts(), ds.cluster_ids());
    CHECK(loadings_logit(scaled, nullptr, 0, {}).loadings[2] ==
          doctest::Approx(3.5 * loadings_logit(ds, nullptr, 0, {}).loadings[2]).epsilon(1e-14));
  }
  SUBCASE("penalize_intercept = false zeroes the intercept loading") {
    std::mt19937_64 rng(9);
    auto ds = oracle::random_logit(rng, 8, 2, 3, Eigen::VectorXd::Zero(3));
    PenaltyConfig cfg;
    cfg.penalize_intercept = false;
    auto L = loadings_logit(ds, nullptr, 0, cfg);
    CHECK(L.loadings[0] == 0.0);
    CHECK(L.loadings[1] > 0.0);
  }
}

TEST_CASE("weighted loadings") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> z;
  Eigen::MatrixXd X(7, 3);
  for (Index i = 0; i < 7; ++i)
    for (Index j = 0; j < 3; ++j) X(i, j) = z(rng);
  auto ds = oracle::make_dataset(X, Eigen::VectorXd::Zero(7), {0, 0, 0, 1, 1, 2, 2});
  Eigen::VectorXd f2(7);
  f2 << 0.25, 0.1, 0.2, 0.05, 0.15, 0.22, 0.12;

  SUBCASE("m = 0 with zero target") {
    auto L = loadings_weighted(ds, Eigen::VectorXd::Constant(7, 0.2), Eigen::VectorXd::Zero(7), nullptr, 0,
                               std::nullopt, {});
    CHECK(L.loadings.isZero());
  }
  SUBCASE("m >= 1 with zero residuals") {
    Eigen::VectorXd gamma(2);
    gamma << 0.7, -1.2;
    Eigen::VectorXd D = X.col(1) * 0.7 + X.col(2) * -1.2;
    // target column 0 excluded: residual D - X_{-0} gamma == 0 by construction
    Eigen::MatrixXd Xd = X;
    Xd.col(0) = D;
    auto ds2 = oracle::make_dataset(Xd, Eigen::VectorXd::Zero(7), {0, 0, 0, 1, 1, 2, 2});
    auto L = loadings_weighted(ds2, f2, D, &gamma, 1, Index{0}, {});
    CHECK(L.loadings.size() == 2);
    CHECK(L.loadings.cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("m = 0 on a 3-cluster toy problem against a hand loop") {
    const Index k = 1;
    const Eigen::VectorXd D = X.col(k);
    auto L = loadings_weighted(ds, f2, D, nullptr, 0, k, {});
    double s = 0.0;
    for (Index g = 0; g < 3; ++g) {
      double cs = 0.0;
      for (Index i = ds.cluster_begin(g); i < ds.cluster_end(g); ++i) cs += std::sqrt(f2[i]) * D[i];
      s += cs * cs;
    }
    const double tail = std::sqrt(s / 3.0);
    for (Index c = 0; c < 2; ++c) {
      const Index j = c < k ? c : c + 1;
      double mx = 0.0;
      for (Index i = 0; i < 7; ++i) mx = std::max(mx, std::abs(std::sqrt(f2[i]) * X(i, j)));
      CHECK(std::abs(L.loadings[c] - 2.0 * mx * tail) <= 1e-12 * L.loadings[c]);
    }
  }
  SUBCASE("m = 1 on a toy problem against a hand loop") {
    Eigen::VectorXd zeta(3);
    zeta << 0.1, -0.3, 0.05;
    const Eigen::VectorXd S = Eigen::VectorXd::LinSpaced(7, -1, 1);
    auto L = loadings_weighted(ds, f2, S, &zeta, 1, std::nullopt, {});
    for (Index j = 0; j < 3; ++j) {
      double s = 0.0;
      for (Index g = 0; g < 3; ++g) {
        double cs = 0.0;
        for (Index i = ds.cluster_begin(g); i < ds.cluster_end(g); ++i)
          cs += f2[i] * (S[i] - X.row(i).dot(zeta)) * X(i, j);
        s += cs * cs;
      }
      CHECK(std::abs(L.loadings[j] - 2.0 * std::sqrt(s / 3.0)) <= 1e-12 * L.loadings[j]);
    }
  }
  SUBCASE("nonpositive weight is a domain error") {
    Eigen::VectorXd bad = f2;
    bad[3] = 0.0;
    CHECK_THROWS_AS(loadings_weighted(ds, bad, X.col(0), nullptr, 0, std::nullopt, {}), DomainError);
  }
}
