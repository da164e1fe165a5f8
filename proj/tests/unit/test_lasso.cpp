#include "pdsape/errors.hpp"
#include "pdsape/lasso.hpp"
#include "pdsape/logistic.hpp"
#include "pdsape/simulation.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace pdsape;

namespace {

PenaltyLoadings manual(double lambda, Eigen::VectorXd loadings, PenaltyKind kind = PenaltyKind::LogitBeta) {
  PenaltyLoadings L;
  L.lambda = lambda;
  L.loadings = std::move(loadings);
  L.kind = kind;
  return L;
}

struct WlsCase {
  Eigen::MatrixXd X;
  Eigen::VectorXd y, w;
};

WlsCase random_wls(std::mt19937_64& rng, Index n, Index p) {
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0.02, 0.25);
  WlsCase c{Eigen::MatrixXd(n, p), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) c.X(i, j) = z(rng);
    c.y[i] = c.X(i, 0) - 0.5 * c.X(i, p - 1) + z(rng);
    c.w[i] = u(rng);
  }
  return c;
}

}  // namespace

TEST_CASE("lasso logit: huge lambda zeroes everything") {
  std::mt19937_64 rng(1);
  Eigen::VectorXd b(4);
  b << 0.5, 1.0, -1.0, 0.0;
  auto ds = oracle::random_logit(rng, 30, 2, 4, b);
  auto L = loadings_logit(ds, nullptr, 0, {});
  L.lambda *= 1e6;
  auto fit = solve_lasso_logit(ds, L);
  CHECK(fit.coef.isZero());
  CHECK(fit.support.empty());
}

TEST_CASE("lasso logit: lambda = 0 reproduces the restricted MLE") {
  std::mt19937_64 rng(2);
  Eigen::VectorXd b(2);
  b << -0.3, 0.9;
  auto ds = oracle::random_logit(rng, 40, 2, 2, b);
  auto fit = solve_lasso_logit(ds, manual(0.0, Eigen::VectorXd::Ones(2)));
  std::vector<Index> full{0, 1};
  auto mle = fit_restricted_logit(ds, full);
  CHECK((fit.coef - mle.beta).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("lasso logit: p = 1 against a golden-section minimizer") {
  std::mt19937_64 rng(3);
  Eigen::VectorXd b(1);
  b << 1.2;
  auto ds = oracle::random_logit(rng, 25, 2, 1, b, false);
  const double G = static_cast<double>(ds.G());
  const Eigen::MatrixXd X = ds.X().to_dense();
  for (double lambda : {0.5, 3.0, 8.0}) {
    const double ell = 0.8;
    auto fit = solve_lasso_logit(ds, manual(lambda, Eigen::VectorXd::Constant(1, ell)));
    auto obj = [&](double t) {
      double s = 0.0;
      for (Index i = 0; i < ds.n(); ++i) {
        const double eta = X(i, 0) * t;
        s += -ds.y()[i] * eta + std::log1p(std::exp(eta));
      }
      return s / G + lambda / G * ell * std::abs(t);
    };
    const double ref = oracle::golden_min(obj, -10.0, 10.0);
    CHECK(std::abs(fit.coef[0] - ref) < 1e-6);
  }
}

TEST_CASE("weighted lasso: zero response gives zero coefficients") {
  std::mt19937_64 rng(4);
  auto c = random_wls(rng, 30, 4);
  auto fit = solve_weighted_lasso(Eigen::VectorXd::Zero(30), Design(c.X), c.w, 10.0,
                                  manual(1.0, Eigen::VectorXd::Ones(4), PenaltyKind::WeightedZeta), std::nullopt);
  CHECK(fit.coef.isZero());
}

TEST_CASE("weighted lasso: lambda = 0 matches WLS on the full support") {
  std::mt19937_64 rng(5);
  auto c = random_wls(rng, 40, 3);
  auto fit = solve_weighted_lasso(c.y, Design(c.X), c.w, 40.0,
                                  manual(0.0, Eigen::VectorXd::Ones(3), PenaltyKind::WeightedZeta), std::nullopt);
  std::vector<Index> full{0, 1, 2};
  auto ref = fit_restricted_wls(c.y, Design(c.X), c.w, full);
  CHECK((fit.coef - ref.beta).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("weighted lasso: single column soft-threshold closed form") {
  std::mt19937_64 rng(6);
  auto c = random_wls(rng, 50, 1);
  const double G = 17.0, ell = 1.3;
  for (double lambda : {0.0, 0.4, 2.0, 50.0}) {
    auto fit = solve_weighted_lasso(c.y, Design(c.X), c.w, G,
                                    manual(lambda, Eigen::VectorXd::Constant(1, ell), PenaltyKind::WeightedZeta),
                                    std::nullopt);
    const double wxy = (c.w.array() * c.X.col(0).array() * c.y.array()).sum();
    const double wxx = (c.w.array() * c.X.col(0).array().square()).sum();
    const double t = lambda * ell;  // (lambda ell / G) G
    const double ref = (wxy > t ? wxy - t : wxy < -t ? wxy + t : 0.0) / wxx;
    CHECK(std::abs(fit.coef[0] - ref) < 1e-10);
  }
}

TEST_CASE("weighted lasso: halving the factor and doubling lambda is the same problem") {
  std::mt19937_64 rng(7);
  auto c = random_wls(rng, 60, 6);
  Eigen::VectorXd ell = Eigen::VectorXd::LinSpaced(6, 0.5, 1.5);
  auto a = solve_weighted_lasso(c.y, Design(c.X), c.w, 60.0, manual(1.5, ell, PenaltyKind::WeightedZeta),
                                std::nullopt, {}, nullptr, 2.0);
  auto b = solve_weighted_lasso(c.y, Design(c.X), c.w, 60.0, manual(3.0, ell, PenaltyKind::WeightedZeta),
                                std::nullopt, {}, nullptr, 1.0);
  CHECK((a.coef - b.coef).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(a.support == b.support);
}

TEST_CASE("weighted lasso: excluded column uses reduced indexing") {
  std::mt19937_64 rng(8);
  auto c = random_wls(rng, 40, 4);
  auto fit = solve_weighted_lasso(c.X.col(2), Design(c.X), c.w, 40.0,
                                  manual(0.0, Eigen::VectorXd::Ones(3), PenaltyKind::NodewiseGamma), Index{2});
  CHECK(fit.coef.size() == 3);
  std::vector<Index> others{0, 1, 3};
  auto ref = fit_restricted_wls(c.X.col(2), Design(c.X), c.w, others);
  CHECK(std::abs(fit.coef[2] - ref.beta[3]) < 1e-8);
}

TEST_CASE("objective trace is nonincreasing") {
  auto ds = simulate_dgp(DgpSpec::make(DgpModel::M3, 0.5, 60, 150, 40, 12));
  LassoConfig cfg;
  cfg.record_objective = true;
  auto L = loadings_logit(ds, nullptr, 0, {});
  L.lambda *= 0.3;
  auto fit = solve_lasso_logit(ds, L, cfg);
  REQUIRE(fit.objective_trace.size() >= 2);
  for (std::size_t i = 1; i < fit.objective_trace.size(); ++i)
    CHECK(fit.objective_trace[i] <= fit.objective_trace[i - 1] + 1e-12 * std::abs(fit.objective_trace[i - 1]));
}

TEST_CASE("dense and sparse designs give the same lasso path") {
  auto ds = simulate_dgp(DgpSpec::make(DgpModel::M1, 0.0, 50, 120, 30, 5));
  auto sp = ds.with_sparse_design();
  auto L = loadings_logit(ds, nullptr, 0, {});
  L.lambda *= 0.5;
  auto a = solve_lasso_logit(ds, L);
  auto b = solve_lasso_logit(sp, L);
  CHECK(a.support == b.support);
  CHECK((a.coef - b.coef).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kkt check") {
  std::mt19937_64 rng(9);
  auto c = random_wls(rng, 50, 5);
  const Design X(c.X);
  auto prob = weighted_problem(c.y, X, c.w, 50.0, manual(2.0, Eigen::VectorXd::Ones(5), PenaltyKind::WeightedZeta),
                               std::nullopt);
  SUBCASE("zero is optimal when every gradient is under its threshold") {
    SelectionFit zero{Eigen::VectorXd::Zero(5), {}, 0, 0, 0, {}};
    auto prob_big = prob;
    const double gmax = prob.gradient(zero.coef).cwiseAbs().maxCoeff();
    prob_big.penalty.lambda = 1.01 * gmax * 50.0 / 2.0;
    CHECK(kkt_check(zero, prob_big, 1e-12).ok());
  }
  SUBCASE("solver output passes, a perturbed copy does not") {
    auto fit = solve(prob);
    CHECK(kkt_check(fit, prob, 1e-6).ok());
    auto bad = fit;
    bad.coef[0] += 0.1;
    CHECK_FALSE(kkt_check(bad, prob, 1e-6).ok());
  }
}

TEST_CASE("solver certifies itself on 50 random M1-style problems") {
  int violations = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    auto ds = simulate_dgp(DgpSpec::make(DgpModel::M1, s % 2 ? 0.5 : 0.0, 40, 100, 30, 100 + s));
    auto L = loadings_logit(ds, nullptr, 0, {});
    L.lambda *= 0.2 + 0.02 * static_cast<double>(s);
    auto fit = solve_lasso_logit(ds, L);
    violations += !kkt_check(fit, logit_problem(ds, L), 1e-6).ok();
  }
  CHECK(violations == 0);
}

TEST_CASE("invalid inputs") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(3, 2);
  X(1, 1) = std::nan("");
  CHECK_THROWS(solve_weighted_lasso(Eigen::VectorXd::Ones(3), Design(X), Eigen::VectorXd::Ones(3), 3.0,
                                    manual(1.0, Eigen::VectorXd::Ones(2)), std::nullopt));
  Eigen::MatrixXd ok = Eigen::MatrixXd::Ones(3, 2);
  CHECK_THROWS(solve_weighted_lasso(Eigen::VectorXd::Ones(3), Design(ok), -Eigen::VectorXd::Ones(3), 3.0,
                                    manual(1.0, Eigen::VectorXd::Ones(2)), std::nullopt));
}
