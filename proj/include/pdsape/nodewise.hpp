#pragma once

#include "pdsape/data.hpp"
#include "pdsape/lasso.hpp"
#include "pdsape/penalty.hpp"

#include <optional>
#include <vector>

namespace pdsape {

/// Weighted lasso with iterated loadings followed by a post-lasso WLS refit.
/// Coefficient vectors use the problem's own indexing (column
/// `excluded_col` removed when set).
struct WeightedSelection {
  SelectionFit lasso;
  VectorXd coef_tilde;
  /// Selected columns in the original design indexing.
  std::vector<Index> support_original;
  PenaltyLoadings penalty;
};

/// Runs m = 0..m_bar: loadings, lasso (warm-started), post-lasso refit.
WeightedSelection weighted_post_lasso(const ClusteredDataset& ds, const VectorXd& f_hat_sq, const VectorXd& target,
                                      std::optional<Index> excluded_col, const PenaltyConfig& penalty_cfg,
                                      const LassoConfig& lasso_cfg = {});

/// One cluster-nodewise regression of column k on the others.
struct NodewiseRow {
  Index k = 0;
  /// Post-lasso coefficients over the p-1 columns other than k.
  VectorXd gamma_tilde;
  double tau_sq = 0.0;
  /// Selected columns, reduced (p-1) indexing.
  std::vector<Index> support;
  SelectionFit lasso;
};

/// Throws SingularError naming k when tau^2 <= 1e-12.
NodewiseRow nodewise_fit(const ClusteredDataset& ds, const VectorXd& f_hat_sq, Index k,
                         const PenaltyConfig& penalty_cfg, const LassoConfig& lasso_cfg = {});

/// D'F^2 (D - X gamma) / G against tau^2; zero up to rounding when gamma
/// solves the weighted normal equations on its support.
double tau_sq_identity_check(const NodewiseRow& row, const ClusteredDataset& ds, const VectorXd& f_hat_sq);

struct ThetaRow {
  Index k = 0;
  VectorXd theta_tilde;
};

/// (-gamma with 1 at slot k) scaled by sum f^2 / (G tau^2).
ThetaRow theta_row(const NodewiseRow& row, const VectorXd& f_hat_sq, double G);

/// Expands a reduced (p-1) vector to length p with `fill` at slot k.
VectorXd embed_reduced(const VectorXd& reduced, Index k, double fill);
/// Inverse of embed_reduced.
VectorXd extract_reduced(const VectorXd& full, Index k);

}  // namespace pdsape
