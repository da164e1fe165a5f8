#include "pdsape/ape.hpp"
#include "pdsape/logistic.hpp"
#include "pdsape/simulation.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>
#include <set>

using namespace pdsape;

namespace {

PipelineConfig unpenalized() {
  PipelineConfig c;
  c.penalty.lambda_scale = 0.0;
  return c;
}

}  // namespace

TEST_CASE("lambda = 0, p = 2: beta_tilde is the MLE and supports are full") {
  std::mt19937_64 rng(1);
  Eigen::VectorXd b(2);
  b << 0.2, -0.6;
  auto ds = oracle::random_logit(rng, 80, 2, 2, b);
  std::vector<Index> targets{1};
  auto bundle = estimate_nuisance(ds, targets, unpenalized());
  const Eigen::VectorXd mle = oracle::newton_mle(ds.X().to_dense(), ds.y());
  CHECK((bundle.beta_tilde.beta - mle).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(bundle.beta_hat.support == std::vector<Index>{0, 1});
  CHECK(support_union(bundle, 1) == std::vector<Index>{0, 1});
  CHECK(bundle.at(1).mu_tilde.allFinite());
}

TEST_CASE("f^2 <= 1/4 and S_hat changes sign where the fit crosses 1/2") {
  auto ds = simulate_dgp(DgpSpec::make(DgpModel::M1, 0.5, 40, 100, 12, 3));
  std::vector<Index> targets{1, 2};
  auto bundle = estimate_nuisance(ds, targets);
  CHECK(bundle.f_hat_sq.maxCoeff() <= 0.25);
  CHECK(bundle.f_hat_sq.minCoeff() > 0.0);
  for (Index k : targets) {
    const auto& t = bundle.at(k);
    const double bk = t.beta_tilde_k.beta[k];
    for (Index i = 0; i < ds.n(); ++i) {
      const double side = 0.5 - bundle.fitted_prob[i];
      CHECK(t.S_hat[i] == doctest::Approx(bk * 2.0 * side).epsilon(1e-12));
      if (bk != 0.0 && side != 0.0) CHECK((t.S_hat[i] > 0) == ((bk > 0) == (side > 0)));
    }
  }
}

TEST_CASE("support union") {
  NuisanceBundle b;
  TargetNuisance t;
  t.k = 0;
  b.targets = {0};
  SUBCASE("all nuisance supports empty") {
    b.per_target = {t};
    CHECK(support_union(b, 0) == std::vector<Index>{0});
  }
  SUBCASE("nodewise column 0 maps to original column 1 when k = 0") {
    t.nodewise.support = {0};
    b.per_target = {t};
    CHECK(support_union(b, 0) == std::vector<Index>{0, 1});
  }
  SUBCASE("random instance against a brute-force union") {
    std::mt19937_64 rng(4);
    std::bernoulli_distribution pick(0.2);
    const Index p = 30, k = 7;
    t.k = k;
    std::set<Index> ref{k};
    for (Index j = 0; j < p; ++j) {
      if (pick(rng)) {
        b.beta_hat.support.push_back(j);
        ref.insert(j);
      }
      if (pick(rng)) {
        t.zeta.lasso.support.push_back(j);
        ref.insert(j);
      }
      if (j != k && pick(rng)) {
        t.nodewise.support.push_back(j < k ? j : j - 1);
        ref.insert(j);
      }
    }
    b.targets = {k};
    b.per_target = {t};
    CHECK(support_union(b, k) == std::vector<Index>(ref.begin(), ref.end()));
  }
}

TEST_CASE("orthogonal score special cases") {
  std::vector<double> x{1.0, -0.4, 2.0};
  Eigen::VectorXd beta(3);
  beta << 0.3, 1.1, -0.2;
  double eta = 0.0;
  for (int j = 0; j < 3; ++j) eta += x[static_cast<std::size_t>(j)] * beta[j];
  const double G = 4.0, n = 10.0;
  SUBCASE("y = Lambda(x'beta) and alpha G/n = beta_k Lambda' gives 0") {
    const double alpha = beta[1] * logistic::density(eta) * n / G;
    Eigen::VectorXd mu(3);
    mu << 0.5, -1.0, 2.0;
    CHECK(std::abs(orthogonal_score(x, logistic::cdf(eta), alpha, beta, mu, 1, G, n)) < 1e-15);
  }
  SUBCASE("mu = 0 leaves alpha G/n - beta_k Lambda'") {
    const double s = orthogonal_score(x, 1.0, 0.7, beta, Eigen::VectorXd::Zero(3), 1, G, n);
    CHECK(s == doctest::Approx(0.7 * G / n - beta[1] * logistic::density(eta)).epsilon(1e-15));
  }
}

TEST_CASE("plug-in APE at zero coefficients is zero") {
  std::mt19937_64 rng(2);
  auto ds = oracle::random_logit(rng, 5, 3, 3, Eigen::VectorXd::Zero(3));
  CHECK(plugin_ape(ds, Eigen::VectorXd::Zero(3), 1) == 0.0);
}

TEST_CASE("one cluster, one observation: sigma^2 is the squared score") {
  Eigen::MatrixXd X(1, 2);
  X << 1.0, 0.5;
  auto ds = oracle::make_dataset(X, Eigen::VectorXd::Ones(1), {0});
  Eigen::VectorXd beta(2), mu(2);
  beta << 0.1, 0.8;
  mu << -0.3, 0.4;
  const double alpha = 0.12;
  auto s = cluster_scores(ds, alpha, beta, beta[1], mu);
  const double eta = 0.1 + 0.4;
  const double direct = alpha - 0.8 * logistic::density(eta) - (-0.3 + 0.2) * (1.0 - logistic::cdf(eta));
  REQUIRE(s.size() == 1);
  CHECK(s[0] == doctest::Approx(direct).epsilon(1e-15));
  CHECK(std::sqrt(s.squaredNorm() / 1.0) == doctest::Approx(std::abs(direct)));
}

TEST_CASE("lambda = 0, low dimension: alpha_tilde equals the plug-in APE at the MLE") {
  std::mt19937_64 rng(3);
  Eigen::VectorXd b(4);
  b << -0.2, 0.8, -0.5, 0.3;
  auto ds = oracle::random_logit(rng, 150, 2, 4, b);
  const Eigen::VectorXd mle = oracle::newton_mle(ds.X().to_dense(), ds.y());
  std::vector<Index> targets{1, 2, 3};
  auto res = run_pipeline(ds, targets, unpenalized());
  for (const auto& r : res.results) {
    const double G = static_cast<double>(ds.G()), n = static_cast<double>(ds.n());
    CHECK(std::abs(r.ape - plugin_ape(ds, mle, r.k)) < 1e-6);
    CHECK(r.alpha_tilde == doctest::Approx(r.ape * n / G).epsilon(1e-14));
  }
}

TEST_CASE("pipeline is identical for every thread count and cluster order is irrelevant to alpha") {
  auto ds = simulate_dgp(DgpSpec::make(DgpModel::M2, 0.5, 60, 150, 40, 8));
  std::vector<Index> targets{1, 2, 3, 4};
  PipelineConfig c1, c4;
  c1.threads = 1;
  c4.threads = 4;
  auto a = run_pipeline(ds, targets, c1);
  auto b = run_pipeline(ds, targets, c4);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    CHECK(a.results[i].alpha_tilde == b.results[i].alpha_tilde);
    CHECK(a.results[i].sigma_tilde == b.results[i].sigma_tilde);
    CHECK(a.results[i].support_union == b.results[i].support_union);
  }
}

TEST_CASE("variance score switch") {
  auto ds = simulate_dgp(DgpSpec::make(DgpModel::M1, 0.5, 50, 120, 20, 4));
  std::vector<Index> targets{1};
  PipelineConfig harm;
  harm.use_beta_tilde_k = true;
  auto r = run_pipeline(ds, targets, harm).results[0];
  CHECK(r.variance_scores == r.bootstrap_scores);
  auto lit = run_pipeline(ds, targets).results[0];
  CHECK(lit.alpha_tilde == r.alpha_tilde);
  CHECK(lit.bootstrap_scores == r.bootstrap_scores);
}
