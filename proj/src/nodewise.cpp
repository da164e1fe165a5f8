#include "pdsape/nodewise.hpp"

#include "pdsape/errors.hpp"
#include "pdsape/logistic.hpp"

#include <cmath>
#include <sstream>

namespace pdsape {

VectorXd embed_reduced(const VectorXd& reduced, Index k, double fill) {
  VectorXd full(reduced.size() + 1);
  for (Index c = 0; c < reduced.size(); ++c) full[original_column(c, k)] = reduced[c];
  full[k] = fill;
  return full;
}

VectorXd extract_reduced(const VectorXd& full, Index k) {
  VectorXd reduced(full.size() - 1);
  for (Index c = 0; c < reduced.size(); ++c) reduced[c] = full[original_column(c, k)];
  return reduced;
}

WeightedSelection weighted_post_lasso(const ClusteredDataset& ds, const VectorXd& f_hat_sq, const VectorXd& target,
                                      std::optional<Index> excluded_col, const PenaltyConfig& penalty_cfg,
                                      const LassoConfig& lasso_cfg) {
  const Index q = excluded_col ? ds.p() - 1 : ds.p();
  const double G = static_cast<double>(ds.G());
  WeightedSelection out;
  out.coef_tilde = VectorXd::Zero(q);
  out.lasso.coef = VectorXd::Zero(q);
  if (q == 0) return out;

  const VectorXd* warm = nullptr;
  for (int m = 0; m <= penalty_cfg.m_bar; ++m) {
    out.penalty = loadings_weighted(ds, f_hat_sq, target, m == 0 ? nullptr : &out.coef_tilde, m, excluded_col,
                                    penalty_cfg);
    out.lasso = solve_weighted_lasso(target, ds.X(), f_hat_sq, G, out.penalty, excluded_col, lasso_cfg, warm);
    warm = &out.lasso.coef;

    out.support_original.clear();
    for (Index c : out.lasso.support) out.support_original.push_back(excluded_col ? original_column(c, *excluded_col) : c);
    const RestrictedFit refit = fit_restricted_wls(target, ds.X(), f_hat_sq, out.support_original);
    out.coef_tilde = excluded_col ? extract_reduced(refit.beta, *excluded_col) : refit.beta;
  }
  return out;
}

NodewiseRow nodewise_fit(const ClusteredDataset& ds, const VectorXd& f_hat_sq, Index k,
                         const PenaltyConfig& penalty_cfg, const LassoConfig& lasso_cfg) {
  if (k < 0 || k >= ds.p()) throw ShapeError("nodewise target column " + std::to_string(k) + " out of range");
  if (f_hat_sq.size() != ds.n()) throw ShapeError("weights length must equal n");
  const VectorXd D = ds.X().col(k);
  WeightedSelection sel = weighted_post_lasso(ds, f_hat_sq, D, k, penalty_cfg, lasso_cfg);

  NodewiseRow row;
  row.k = k;
  row.gamma_tilde = std::move(sel.coef_tilde);
  row.support = sel.lasso.support;
  row.lasso = std::move(sel.lasso);

  VectorXd resid = D;
  for (Index c = 0; c < row.gamma_tilde.size(); ++c)
    if (row.gamma_tilde[c] != 0.0) ds.X().col_axpy(original_column(c, k), -row.gamma_tilde[c], resid);
  row.tau_sq = f_hat_sq.dot(resid.cwiseProduct(resid)) / static_cast<double>(ds.G());
  if (!(row.tau_sq > 1e-12)) {
    std::ostringstream os;
    os << "nodewise regression for column " << k << " is near-singular (tau^2 = " << row.tau_sq << ")";
    throw SingularError(os.str());
  }
  return row;
}

double tau_sq_identity_check(const NodewiseRow& row, const ClusteredDataset& ds, const VectorXd& f_hat_sq) {
  const VectorXd D = ds.X().col(row.k);
  VectorXd resid = D;
  for (Index c = 0; c < row.gamma_tilde.size(); ++c)
    if (row.gamma_tilde[c] != 0.0) ds.X().col_axpy(original_column(c, row.k), -row.gamma_tilde[c], resid);
  const double identity = D.dot(f_hat_sq.cwiseProduct(resid)) / static_cast<double>(ds.G());
  return std::abs(row.tau_sq - identity);
}

ThetaRow theta_row(const NodewiseRow& row, const VectorXd& f_hat_sq, double G) {
  ThetaRow out;
  out.k = row.k;
  const double scale = f_hat_sq.sum() / (G * row.tau_sq);
  out.theta_tilde = embed_reduced(-row.gamma_tilde, row.k, 1.0) * scale;
  return out;
}

}  // namespace pdsape
