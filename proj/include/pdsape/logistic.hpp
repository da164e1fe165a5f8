#pragma once

#include "pdsape/data.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace pdsape {

/// Logistic link and its derivatives.
namespace logistic {

/// Lambda(t) = 1 / (1 + exp(-t)), evaluated without overflow.
inline double cdf(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

/// Lambda'(t) = Lambda(t)(1 - Lambda(t)).
inline double density(double t) {
  const double e = std::exp(-std::abs(t));
  const double d = 1.0 + e;
  return e / (d * d);
}

/// Lambda''(t) = Lambda'(t)(1 - 2 Lambda(t)).
inline double density_derivative(double t) { return density(t) * (1.0 - 2.0 * cdf(t)); }

/// log(1 + exp(t)).
inline double softplus(double t) {
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

/// Lambda^{-1}(u) = log(u / (1 - u)).
inline double quantile(double u) { return std::log(u) - std::log1p(-u); }

}  // namespace logistic

struct NewtonConfig {
  int max_iter = 100;
  int max_halvings = 50;
  double coef_tol = 1e-8;
  double grad_tol = 1e-9;
  /// |beta_j| beyond this is treated as perfect separation.
  double separation_cap = 30.0;
};

/// Unpenalized fit restricted to a support; coefficients off the support are 0.
struct RestrictedFit {
  VectorXd beta;
  std::vector<Index> support;
  bool converged = false;
  int iterations = 0;
  double final_gradient_norm = 0.0;
};

/// Pooled Logit on the columns in `support`:
/// argmin (1/G) sum_g sum_i { -y x'b + log(1 + exp(x'b)) }.
RestrictedFit fit_restricted_logit(const ClusteredDataset& ds, std::span<const Index> support,
                                   const NewtonConfig& config = {});

/// Weighted least squares on the columns in `support`:
/// argmin sum_i w_i (y_i - x_i'b)^2. Throws SingularError when the normal
/// equations stay singular after ridge escalation, including all-zero weights.
RestrictedFit fit_restricted_wls(const VectorXd& y, const Design& X, const VectorXd& weights,
                                 std::span<const Index> support);

/// Mean logistic loss (1/G) sum { -y eta + softplus(eta) }.
double logit_loss(const VectorXd& y, const VectorXd& eta, double G);

/// Sorted, deduplicated copy of an index list.
std::vector<Index> normalized_support(std::span<const Index> support, Index p);

}  // namespace pdsape
