#pragma once

#include "pdsape/data.hpp"

#include <optional>
#include <string>

namespace pdsape {

/// Standard normal CDF.
double norm_cdf(double x);

/// Standard normal quantile, Wichura's AS241 (PPND16). Throws DomainError
/// unless 0 < q < 1.
double inv_norm_cdf(double q);

enum class PenaltyKind { LogitBeta, NodewiseGamma, WeightedZeta };

std::string to_string(PenaltyKind kind);

struct PenaltyConfig {
  double c = 1.1;
  /// Explicit confidence parameter. When unset, 0.1 / log G clamped to
  /// [1/G, 1/log G]; an explicit value is used as given.
  std::optional<double> gamma;
  /// Number of loading refinement iterations after m = 0.
  int m_bar = 1;
  /// When false, the intercept column gets a zero loading (unpenalized).
  bool penalize_intercept = true;
  /// Multiplies every lambda; 0 turns all three lasso problems into
  /// unpenalized fits.
  double lambda_scale = 1.0;

  double gamma_for(Index G) const;
  void check() const;
};

/// lambda and the diagonal of Psi for one penalized problem.
struct PenaltyLoadings {
  double lambda = 0.0;
  VectorXd loadings;
  int iteration = 0;
  PenaltyKind kind = PenaltyKind::LogitBeta;
};

/// c sqrt(G) Phi^{-1}(1 - gamma / d) with d = 2p, 2p(p-1), 2p^2 by kind.
double lambda_for(PenaltyKind kind, Index G, Index p, const PenaltyConfig& config);

/// Loadings for the lasso Logit (lambda is NaN when G < 3). m = 0 uses the design alone; m >= 1 needs
/// the post-lasso coefficients of the previous iteration.
PenaltyLoadings loadings_logit(const ClusteredDataset& ds, const VectorXd* beta_tilde, int m,
                               const PenaltyConfig& config);

/// Loadings for the weighted lasso of `target` on X (column `excluded_col`
/// removed for nodewise problems). Loadings are indexed by the problem's own
/// columns. `coef_tilde`, when m >= 1, is in the same indexing.
PenaltyLoadings loadings_weighted(const ClusteredDataset& ds, const VectorXd& f_hat_sq, const VectorXd& target,
                                  const VectorXd* coef_tilde, int m, std::optional<Index> excluded_col,
                                  const PenaltyConfig& config);

/// Map a column of the reduced (column k removed) problem to the original design.
inline Index original_column(Index reduced, Index excluded) { return reduced < excluded ? reduced : reduced + 1; }
/// Inverse of original_column; `original` must differ from `excluded`.
inline Index reduced_column(Index original, Index excluded) { return original < excluded ? original : original - 1; }

}  // namespace pdsape
