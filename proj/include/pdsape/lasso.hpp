#pragma once

#include "pdsape/data.hpp"
#include "pdsape/penalty.hpp"

#include <optional>
#include <vector>

namespace pdsape {

struct LassoConfig {
  /// Target KKT violation on the (1/G)-scaled objective.
  double tol = 1e-8;
  /// Proximal Newton iterations for the Logit problem.
  int max_outer = 200;
  /// Coordinate-descent passes per quadratic subproblem.
  int max_sweeps = 100000;
  /// Floor on IRLS working weights.
  double weight_floor = 1e-5;
  /// Coefficients below this magnitude are set to exactly zero on exit.
  double zero_snap = 1e-12;
  /// Keep the objective after every pass in SelectionFit::objective_trace.
  bool record_objective = false;
};

enum class LassoKind { Logit, WeightedLeastSquares };

/// One penalized problem. Coefficients live in the problem's own column
/// indexing: all design columns, or all but `excluded_col`.
///
///   Logit: (1/G) sum { -y x'b + log(1 + exp(x'b)) } + (lambda/G) sum_c l_c |b_c|
///   WLS:   (1/G) sum w (y - x'b)^2 + factor (lambda/G) sum_c l_c |b_c|
struct LassoProblem {
  LassoKind kind = LassoKind::Logit;
  const Design* design = nullptr;
  const VectorXd* response = nullptr;
  const VectorXd* weights = nullptr;
  double G = 1.0;
  PenaltyLoadings penalty;
  std::optional<Index> excluded_col;
  double penalty_factor = 1.0;

  Index dim() const;
  Index column(Index c) const { return excluded_col ? original_column(c, *excluded_col) : c; }
  /// Subgradient threshold factor * lambda * l_c / G.
  double threshold(Index c) const;
  VectorXd linear_predictor(const VectorXd& coef) const;
  /// Gradient of the smooth part of the objective.
  VectorXd gradient(const VectorXd& coef) const;
  double objective(const VectorXd& coef) const;
  void check() const;
};

struct SelectionFit {
  VectorXd coef;
  std::vector<Index> support;
  double objective = 0.0;
  double kkt_violation = 0.0;
  int iterations = 0;
  std::vector<double> objective_trace;
};

struct KktViolation {
  Index column;  // problem indexing
  double gradient;
  double coef;
  double excess;
};

struct KktReport {
  double max_violation = 0.0;
  std::vector<KktViolation> violations;
  bool ok() const { return violations.empty(); }
};

LassoProblem logit_problem(const ClusteredDataset& ds, PenaltyLoadings penalty);
LassoProblem weighted_problem(const VectorXd& target, const Design& X, const VectorXd& weights, double G,
                              PenaltyLoadings penalty, std::optional<Index> excluded_col,
                              double penalty_factor = 2.0);

/// Lasso Logit by proximal Newton: IRLS quadratic model, cyclic coordinate
/// descent with soft-thresholding inside, backtracking on the true objective.
SelectionFit solve_lasso_logit(const ClusteredDataset& ds, const PenaltyLoadings& penalty,
                               const LassoConfig& config = {}, const VectorXd* warm_start = nullptr);

/// Weighted lasso by exact coordinate updates.
SelectionFit solve_weighted_lasso(const VectorXd& target, const Design& X, const VectorXd& weights, double G,
                                  const PenaltyLoadings& penalty, std::optional<Index> excluded_col,
                                  const LassoConfig& config = {}, const VectorXd* warm_start = nullptr,
                                  double penalty_factor = 2.0);

SelectionFit solve(const LassoProblem& problem, const LassoConfig& config = {}, const VectorXd* warm_start = nullptr);

/// First-order conditions: active c needs |grad_c + sign(b_c) t_c| <= tol,
/// inactive c needs |grad_c| <= t_c + tol.
KktReport kkt_check(const SelectionFit& fit, const LassoProblem& problem, double tol);

}  // namespace pdsape
