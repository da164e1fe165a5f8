#include "pdsape/ape.hpp"

#include "pdsape/errors.hpp"
#include "pdsape/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pdsape {

namespace {

// Rethrows a numerical failure with the failing sub-problem prepended.
template <class F>
auto tagged(const std::string& tag, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(tag + ": " + e.what(), e.kkt_violation());
  } catch (const SeparationError& e) {
    throw SeparationError(tag + ": " + e.what());
  } catch (const SingularError& e) {
    throw SingularError(tag + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(tag + ": " + e.what());
  }
}

std::string target_tag(Index k, const std::string& kind) { return "target " + std::to_string(k) + " (" + kind + ")"; }

}  // namespace

const TargetNuisance& NuisanceBundle::at(Index k) const {
  for (const auto& t : per_target)
    if (t.k == k) return t;
  throw ShapeError("no nuisance estimates for column " + std::to_string(k));
}

void estimate_outcome(const ClusteredDataset& ds, const PipelineConfig& cfg, NuisanceBundle& bundle) {
  cfg.penalty.check();
  const VectorXd* warm = nullptr;
  for (int m = 0; m <= cfg.penalty.m_bar; ++m) {
    bundle.beta_penalty = loadings_logit(ds, m == 0 ? nullptr : &bundle.beta_tilde.beta, m, cfg.penalty);
    bundle.beta_hat = tagged("lasso Logit", [&] { return solve_lasso_logit(ds, bundle.beta_penalty, cfg.lasso, warm); });
    warm = &bundle.beta_hat.coef;
    bundle.beta_tilde =
        tagged("post-lasso Logit", [&] { return fit_restricted_logit(ds, bundle.beta_hat.support, cfg.newton); });
  }
  const VectorXd eta = ds.X().multiply(bundle.beta_tilde.beta);
  bundle.f_hat_sq.resize(ds.n());
  bundle.fitted_prob.resize(ds.n());
  for (Index i = 0; i < ds.n(); ++i) {
    bundle.f_hat_sq[i] = logistic::density(eta[i]);
    bundle.fitted_prob[i] = logistic::cdf(eta[i]);
  }
  if (!(bundle.f_hat_sq.array() > 0.0).all())
    throw NumericalError("post-lasso Logit fitted probabilities reach 0 or 1; regression weights vanish");
}

TargetNuisance estimate_target_nuisance(const ClusteredDataset& ds, const NuisanceBundle& shared, Index k,
                                        const PipelineConfig& cfg) {
  if (k < 0 || k >= ds.p()) throw ShapeError("target column " + std::to_string(k) + " out of range");
  TargetNuisance t;
  t.k = k;
  std::vector<Index> support = shared.beta_hat.support;
  support.push_back(k);
  t.beta_tilde_k = tagged(target_tag(k, "restricted Logit"),
                          [&] { return fit_restricted_logit(ds, support, cfg.newton); });

  const double bk = t.beta_tilde_k.beta[k];
  t.S_hat = bk * (1.0 - 2.0 * shared.fitted_prob.array()).matrix();
  t.zeta = tagged(target_tag(k, "zeta"), [&] {
    return weighted_post_lasso(ds, shared.f_hat_sq, t.S_hat, std::nullopt, cfg.penalty, cfg.lasso);
  });
  t.nodewise = tagged(target_tag(k, "nodewise"),
                      [&] { return nodewise_fit(ds, shared.f_hat_sq, k, cfg.penalty, cfg.lasso); });
  t.theta = theta_row(t.nodewise, shared.f_hat_sq, static_cast<double>(ds.G()));
  t.mu_tilde = t.zeta.coef_tilde + t.theta.theta_tilde;
  return t;
}

NuisanceBundle estimate_nuisance(const ClusteredDataset& ds, std::span<const Index> targets,
                                 const PipelineConfig& cfg) {
  if (targets.empty()) throw ShapeError("target set is empty");
  for (Index k : targets)
    if (k < 0 || k >= ds.p()) throw ShapeError("target column " + std::to_string(k) + " out of range");
  NuisanceBundle bundle;
  bundle.targets.assign(targets.begin(), targets.end());
  estimate_outcome(ds, cfg, bundle);
  bundle.per_target.resize(targets.size());
  parallel_for(static_cast<std::int64_t>(targets.size()), cfg.threads, [&](std::int64_t i) {
    bundle.per_target[static_cast<std::size_t>(i)] =
        estimate_target_nuisance(ds, bundle, targets[static_cast<std::size_t>(i)], cfg);
  });
  return bundle;
}

std::vector<Index> support_union(const NuisanceBundle& bundle, Index k) {
  const TargetNuisance& t = bundle.at(k);
  std::vector<Index> s{k};
  s.insert(s.end(), bundle.beta_hat.support.begin(), bundle.beta_hat.support.end());
  s.insert(s.end(), t.zeta.lasso.support.begin(), t.zeta.lasso.support.end());
  for (Index c : t.nodewise.support) s.push_back(original_column(c, k));
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

double orthogonal_score(std::span<const double> x, double y, double alpha, const VectorXd& beta, const VectorXd& mu,
                        Index k, double G, double n) {
  double eta = 0.0;
  double mu_x = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    eta += x[j] * beta[static_cast<Index>(j)];
    mu_x += x[j] * mu[static_cast<Index>(j)];
  }
  return score_value(y, eta, mu_x, alpha, beta[k], G, n);
}

VectorXd cluster_scores(const ClusteredDataset& ds, double alpha, const VectorXd& beta, double beta_k,
                        const VectorXd& mu) {
  const VectorXd eta = ds.X().multiply(beta);
  const VectorXd mu_x = ds.X().multiply(mu);
  const double G = static_cast<double>(ds.G());
  const double n = static_cast<double>(ds.n());
  VectorXd s = VectorXd::Zero(ds.G());
  for (Index g = 0; g < ds.G(); ++g)
    for (Index i = ds.cluster_begin(g); i < ds.cluster_end(g); ++i)
      s[g] += score_value(ds.y()[i], eta[i], mu_x[i], alpha, beta_k, G, n);
  return s;
}

double plugin_ape(const ClusteredDataset& ds, const VectorXd& beta, Index k) {
  const VectorXd eta = ds.X().multiply(beta);
  double s = 0.0;
  for (Index i = 0; i < ds.n(); ++i) s += logistic::density(eta[i]);
  return beta[k] * s / static_cast<double>(ds.n());
}

ApeResult estimate_ape(const ClusteredDataset& ds, const NuisanceBundle& bundle, Index k, const PipelineConfig& cfg) {
  const TargetNuisance& t = bundle.at(k);
  ApeResult r;
  r.k = k;
  r.support_union = support_union(bundle, k);
  const RestrictedFit check = tagged(target_tag(k, "final restricted Logit on " +
                                                       std::to_string(r.support_union.size()) + " columns"),
                                     [&] { return fit_restricted_logit(ds, r.support_union, cfg.newton); });
  r.beta_check = check.beta;
  r.converged = check.converged;

  const double G = static_cast<double>(ds.G());
  const double n = static_cast<double>(ds.n());
  const VectorXd eta = ds.X().multiply(r.beta_check);
  double dsum = 0.0;
  for (Index i = 0; i < ds.n(); ++i) dsum += logistic::density(eta[i]);
  r.alpha_tilde = r.beta_check[k] * dsum / G;
  r.ape = r.alpha_tilde * G / n;

  const VectorXd& bt = bundle.beta_tilde.beta;
  const double bk_tilde_k = t.beta_tilde_k.beta[k];
  r.bootstrap_scores = cluster_scores(ds, r.alpha_tilde, bt, bk_tilde_k, t.mu_tilde);
  r.variance_scores =
      cfg.use_beta_tilde_k ? r.bootstrap_scores : cluster_scores(ds, r.alpha_tilde, bt, bt[k], t.mu_tilde);
  r.sigma_tilde = std::sqrt(r.variance_scores.squaredNorm() / G);
  return r;
}

PipelineResult run_pipeline(const ClusteredDataset& ds, std::span<const Index> targets, const PipelineConfig& cfg) {
  PipelineResult out;
  out.bundle = estimate_nuisance(ds, targets, cfg);
  out.results.resize(targets.size());
  parallel_for(static_cast<std::int64_t>(targets.size()), cfg.threads, [&](std::int64_t i) {
    out.results[static_cast<std::size_t>(i)] = estimate_ape(ds, out.bundle, targets[static_cast<std::size_t>(i)], cfg);
  });
  return out;
}

}  // namespace pdsape
