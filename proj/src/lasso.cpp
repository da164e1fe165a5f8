#include "pdsape/lasso.hpp"

#include "pdsape/errors.hpp"
#include "pdsape/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace pdsape {

Index LassoProblem::dim() const { return excluded_col ? design->cols() - 1 : design->cols(); }

double LassoProblem::threshold(Index c) const { return penalty_factor * penalty.lambda * penalty.loadings[c] / G; }

VectorXd LassoProblem::linear_predictor(const VectorXd& coef) const {
  VectorXd eta = VectorXd::Zero(design->rows());
  for (Index c = 0; c < dim(); ++c) design->col_axpy(column(c), coef[c], eta);
  return eta;
}

VectorXd LassoProblem::gradient(const VectorXd& coef) const {
  const VectorXd eta = linear_predictor(coef);
  VectorXd g(dim());
  if (kind == LassoKind::Logit) {
    VectorXd r(eta.size());
    for (Index i = 0; i < eta.size(); ++i) r[i] = logistic::cdf(eta[i]) - (*response)[i];
    for (Index c = 0; c < dim(); ++c) g[c] = design->col_dot(column(c), r) / G;
  } else {
    const VectorXd r = *response - eta;
    for (Index c = 0; c < dim(); ++c) g[c] = -2.0 * design->col_wdot(column(c), *weights, r) / G;
  }
  return g;
}

double LassoProblem::objective(const VectorXd& coef) const {
  const VectorXd eta = linear_predictor(coef);
  double loss = 0.0;
  if (kind == LassoKind::Logit) {
    loss = logit_loss(*response, eta, G);
  } else {
    for (Index i = 0; i < eta.size(); ++i) {
      const double r = (*response)[i] - eta[i];
      loss += (*weights)[i] * r * r;
    }
    loss /= G;
  }
  double pen = 0.0;
  for (Index c = 0; c < dim(); ++c) pen += threshold(c) * std::abs(coef[c]);
  return loss + pen;
}

void LassoProblem::check() const {
  if (design == nullptr || response == nullptr) throw ShapeError("lasso problem is missing its design or response");
  if (response->size() != design->rows()) throw ShapeError("response length does not match design rows");
  if (excluded_col && (*excluded_col < 0 || *excluded_col >= design->cols()))
    throw ShapeError("excluded column out of range");
  if (penalty.loadings.size() != dim()) throw ShapeError("penalty loadings do not match the problem dimension");
  if (!(penalty.lambda >= 0.0) || !std::isfinite(penalty.lambda))
    throw DomainError("penalty level must be finite and nonnegative");
  if (!penalty.loadings.allFinite() || (penalty.loadings.array() < 0.0).any())
    throw DomainError("penalty loadings must be finite and nonnegative");
  if (!(G > 0.0)) throw DomainError("cluster count must be positive");
  if (!response->allFinite()) throw DomainError("response contains non-finite values");
  if (kind == LassoKind::WeightedLeastSquares) {
    if (weights == nullptr || weights->size() != design->rows()) throw ShapeError("weights missing or mis-sized");
    if (!weights->allFinite() || (weights->array() <= 0.0).any()) throw DomainError("weights must be positive");
  }
  for (Index j = 0; j < design->cols(); ++j) {
    bool finite = true;
    design->visit_col(j, [&](Index, double v) { finite = finite && std::isfinite(v); });
    if (!finite) throw DomainError("design column " + std::to_string(j) + " contains NaN or infinite values");
  }
}

LassoProblem logit_problem(const ClusteredDataset& ds, PenaltyLoadings penalty) {
  LassoProblem p;
  p.kind = LassoKind::Logit;
  p.design = &ds.X();
  p.response = &ds.y();
  p.G = static_cast<double>(ds.G());
  p.penalty = std::move(penalty);
  p.penalty_factor = 1.0;
  return p;
}

LassoProblem weighted_problem(const VectorXd& target, const Design& X, const VectorXd& weights, double G,
                              PenaltyLoadings penalty, std::optional<Index> excluded_col, double penalty_factor) {
  LassoProblem p;
  p.kind = LassoKind::WeightedLeastSquares;
  p.design = &X;
  p.response = &target;
  p.weights = &weights;
  p.G = G;
  p.penalty = std::move(penalty);
  p.excluded_col = excluded_col;
  p.penalty_factor = penalty_factor;
  return p;
}

namespace {

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

// Violation of the coordinate optimality condition for
// 0.5 sum w (z - Xb)^2 + sum t_c |b_c| given grad_c = -sum w x_c r.
double coordinate_violation(double coef, double grad, double t) {
  if (coef > 0.0) return std::abs(grad + t);
  if (coef < 0.0) return std::abs(grad - t);
  return std::max(0.0, std::abs(grad) - t);
}

// Cyclic coordinate descent for 0.5 sum_i w_i (z_i - x_i'b)^2 + sum_c t_c |b_c|.
// `resid` holds z - Xb on entry and is kept in sync. Returns passes used.
class QuadraticLasso {
 public:
  QuadraticLasso(const LassoProblem& problem, const VectorXd& w, const VectorXd& t)
      : problem_(problem), w_(w), t_(t), sqnorm_(problem.dim()) {
    for (Index c = 0; c < problem.dim(); ++c) sqnorm_[c] = problem.design->col_wsq(problem.column(c), w);
  }

  // Solves until a full pass sees no coordinate violation above `tol_sum`.
  int run(VectorXd& b, VectorXd& resid, double tol_sum, int max_sweeps, std::vector<double>* trace,
          const std::function<double()>& objective) {
    const Index q = problem_.dim();
    int sweeps = 0;
    std::vector<Index> active;
    while (sweeps < max_sweeps) {
      // Full pass: measure the violation of each coordinate before updating it.
      double worst = 0.0;
      for (Index c = 0; c < q; ++c) worst = std::max(worst, update(c, b, resid, true));
      ++sweeps;
      if (trace) trace->push_back(objective());
      if (worst <= tol_sum) break;

      active.clear();
      for (Index c = 0; c < q; ++c)
        if (b[c] != 0.0) active.push_back(c);
      // Active-set passes until the active coordinates settle.
      while (sweeps < max_sweeps && !active.empty()) {
        double act = 0.0;
        for (Index c : active) act = std::max(act, update(c, b, resid, true));
        ++sweeps;
        if (trace) trace->push_back(objective());
        if (act <= 0.1 * tol_sum) break;
      }
    }
    return sweeps;
  }

 private:
  // Exact minimization along coordinate c; returns its violation before the move.
  double update(Index c, VectorXd& b, VectorXd& resid, bool measure) {
    const Index j = problem_.column(c);
    const double a = sqnorm_[c];
    const double grad = -problem_.design->col_wdot(j, w_, resid);
    const double viol = measure ? coordinate_violation(b[c], grad, t_[c]) : 0.0;
    if (a <= 0.0) {
      if (b[c] != 0.0) {
        problem_.design->col_axpy(j, b[c], resid);
        b[c] = 0.0;
      }
      return viol;
    }
    const double z = a * b[c] - grad;
    const double next = soft_threshold(z, t_[c]) / a;
    const double delta = next - b[c];
    if (delta != 0.0) {
      problem_.design->col_axpy(j, -delta, resid);
      b[c] = next;
    }
    return viol;
  }

  const LassoProblem& problem_;
  const VectorXd& w_;
  const VectorXd& t_;
  VectorXd sqnorm_;
};

void finalize(SelectionFit& fit, const LassoProblem& problem, const LassoConfig& config) {
  for (Index c = 0; c < fit.coef.size(); ++c)
    if (std::abs(fit.coef[c]) < config.zero_snap) fit.coef[c] = 0.0;
  fit.support.clear();
  for (Index c = 0; c < fit.coef.size(); ++c)
    if (fit.coef[c] != 0.0) fit.support.push_back(c);
  fit.objective = problem.objective(fit.coef);
  fit.kkt_violation = kkt_check(fit, problem, std::numeric_limits<double>::infinity()).max_violation;
}

SelectionFit solve_weighted(const LassoProblem& problem, const LassoConfig& config, const VectorXd* warm) {
  const Index q = problem.dim();
  SelectionFit fit;
  fit.coef = warm ? *warm : VectorXd::Zero(q);
  // Objective times G/2: 0.5 sum w r^2 + (factor/2) lambda sum l |b|.
  VectorXd t(q);
  for (Index c = 0; c < q; ++c) t[c] = 0.5 * problem.penalty_factor * problem.penalty.lambda * problem.penalty.loadings[c];
  VectorXd resid = *problem.response - problem.linear_predictor(fit.coef);
  QuadraticLasso cd(problem, *problem.weights, t);
  const double tol_sum = 0.5 * config.tol * problem.G;
  std::vector<double>* trace = config.record_objective ? &fit.objective_trace : nullptr;
  auto objective = [&] { return problem.objective(fit.coef); };
  double tol_inner = 0.1 * tol_sum;
  for (int round = 0; round < 8; ++round) {
    fit.iterations += cd.run(fit.coef, resid, tol_inner, config.max_sweeps - fit.iterations, trace, objective);
    finalize(fit, problem, config);
    if (fit.kkt_violation <= config.tol) return fit;
    if (fit.iterations >= config.max_sweeps) break;
    tol_inner *= 0.01;
    resid = *problem.response - problem.linear_predictor(fit.coef);
  }
  throw ConvergenceError("weighted lasso did not reach KKT tolerance", fit.kkt_violation);
}

SelectionFit solve_logit(const LassoProblem& problem, const LassoConfig& config, const VectorXd* warm) {
  const Index q = problem.dim();
  const Index n = problem.design->rows();
  const VectorXd& y = *problem.response;
  SelectionFit fit;
  fit.coef = warm ? *warm : VectorXd::Zero(q);
  VectorXd t(q);
  for (Index c = 0; c < q; ++c) t[c] = problem.penalty.lambda * problem.penalty.loadings[c];

  double F = problem.objective(fit.coef);
  if (config.record_objective) fit.objective_trace.push_back(F);
  VectorXd w(n);
  VectorXd resid(n);
  for (int outer = 1; outer <= config.max_outer; ++outer) {
    fit.iterations = outer;
    const VectorXd eta = problem.linear_predictor(fit.coef);
    for (Index i = 0; i < n; ++i) {
      const double mu = logistic::cdf(eta[i]);
      w[i] = std::max(logistic::density(eta[i]), config.weight_floor);
      // Working residual z - eta with z = eta + (y - mu) / w.
      resid[i] = (y[i] - mu) / w[i];
    }
    // Stop once the current point satisfies the KKT conditions.
    SelectionFit probe;
    probe.coef = fit.coef;
    const double viol = kkt_check(probe, problem, std::numeric_limits<double>::infinity()).max_violation;
    if (viol <= config.tol) {
      finalize(fit, problem, config);
      if (fit.kkt_violation <= config.tol) return fit;
    }

    VectorXd b = fit.coef;
    QuadraticLasso cd(problem, w, t);
    const double tol_sum = std::max(0.01 * config.tol * problem.G, 1e-3 * viol * problem.G);
    cd.run(b, resid, tol_sum, config.max_sweeps, nullptr, [] { return 0.0; });

    // Backtracking along the proximal Newton direction.
    const VectorXd d = b - fit.coef;
    const VectorXd grad = problem.gradient(fit.coef);
    double pen_old = 0.0;
    double pen_new = 0.0;
    for (Index c = 0; c < q; ++c) {
      pen_old += problem.threshold(c) * std::abs(fit.coef[c]);
      pen_new += problem.threshold(c) * std::abs(b[c]);
    }
    const double descent = grad.dot(d) + pen_new - pen_old;
    double step = 1.0;
    bool moved = false;
    for (int h = 0; h < 60; ++h, step *= 0.5) {
      const VectorXd trial = fit.coef + step * d;
      const double Ft = problem.objective(trial);
      // Near the optimum the decrease drops below rounding in F; allow that much slack.
      if (Ft <= F + 1e-4 * step * std::min(descent, 0.0) + 1e-12 * std::max(1.0, std::abs(F))) {
        moved = (trial - fit.coef).cwiseAbs().maxCoeff() > 0.0;
        fit.coef = trial;
        F = Ft;
        break;
      }
    }
    if (config.record_objective) fit.objective_trace.push_back(F);
    if (!moved) {
      finalize(fit, problem, config);
      if (fit.kkt_violation <= config.tol) return fit;
      throw ConvergenceError("lasso Logit line search stalled", fit.kkt_violation);
    }
  }
  finalize(fit, problem, config);
  if (fit.kkt_violation <= config.tol) return fit;
  throw ConvergenceError("lasso Logit did not converge in " + std::to_string(config.max_outer) + " iterations",
                         fit.kkt_violation);
}

}  // namespace

SelectionFit solve(const LassoProblem& problem, const LassoConfig& config, const VectorXd* warm_start) {
  problem.check();
  if (warm_start && warm_start->size() != problem.dim()) throw ShapeError("warm start has the wrong length");
  return problem.kind == LassoKind::Logit ? solve_logit(problem, config, warm_start)
                                          : solve_weighted(problem, config, warm_start);
}

SelectionFit solve_lasso_logit(const ClusteredDataset& ds, const PenaltyLoadings& penalty, const LassoConfig& config,
                               const VectorXd* warm_start) {
  return solve(logit_problem(ds, penalty), config, warm_start);
}

SelectionFit solve_weighted_lasso(const VectorXd& target, const Design& X, const VectorXd& weights, double G,
                                  const PenaltyLoadings& penalty, std::optional<Index> excluded_col,
                                  const LassoConfig& config, const VectorXd* warm_start, double penalty_factor) {
  return solve(weighted_problem(target, X, weights, G, penalty, excluded_col, penalty_factor), config, warm_start);
}

KktReport kkt_check(const SelectionFit& fit, const LassoProblem& problem, double tol) {
  KktReport report;
  const VectorXd grad = problem.gradient(fit.coef);
  for (Index c = 0; c < problem.dim(); ++c) {
    const double t = problem.threshold(c);
    const double b = fit.coef[c];
    double excess;
    if (b > 0.0)
      excess = std::abs(grad[c] + t);
    else if (b < 0.0)
      excess = std::abs(grad[c] - t);
    else
      excess = std::max(0.0, std::abs(grad[c]) - t);
    report.max_violation = std::max(report.max_violation, excess);
    if (excess > tol) report.violations.push_back({c, grad[c], b, excess});
  }
  return report;
}

}  // namespace pdsape
