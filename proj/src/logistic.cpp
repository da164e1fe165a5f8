#include "pdsape/logistic.hpp"

#include "pdsape/errors.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <sstream>

namespace pdsape {

namespace {

std::string describe(std::span<const Index> support) {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (i) os << ",";
    if (i == 8 && support.size() > 10) {
      os << "... (" << support.size() << " columns)";
      break;
    }
    os << support[i];
  }
  os << "}";
  return os.str();
}

// Solves H d = g for symmetric positive (semi)definite H with escalating ridge.
// A zero diagonal entry (a column with no weighted mass) is never ridged away.
bool solve_spd(const MatrixXd& H, const VectorXd& g, VectorXd& d) {
  if (!H.allFinite() || !g.allFinite()) return false;
  if ((H.diagonal().array() <= 0.0).any()) return false;
  const double scale = H.diagonal().maxCoeff();
  for (double ridge : {0.0, 1e-10, 1e-8}) {
    MatrixXd A = H;
    A.diagonal().array() += ridge * scale;
    Eigen::LDLT<MatrixXd> ldlt(A);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) continue;
    const auto& D = ldlt.vectorD();
    if (D.minCoeff() <= 1e-13 * scale) continue;
    d = ldlt.solve(g);
    if (d.allFinite()) return true;
  }
  return false;
}

}  // namespace

std::vector<Index> normalized_support(std::span<const Index> support, Index p) {
  std::vector<Index> s(support.begin(), support.end());
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  for (Index j : s)
    if (j < 0 || j >= p) throw ShapeError("support index " + std::to_string(j) + " out of range");
  return s;
}

double logit_loss(const VectorXd& y, const VectorXd& eta, double G) {
  double s = 0.0;
  for (Index i = 0; i < y.size(); ++i) s += -y[i] * eta[i] + logistic::softplus(eta[i]);
  return s / G;
}

RestrictedFit fit_restricted_logit(const ClusteredDataset& ds, std::span<const Index> support_in,
                                   const NewtonConfig& config) {
  RestrictedFit fit;
  fit.support = normalized_support(support_in, ds.p());
  fit.beta = VectorXd::Zero(ds.p());
  const auto& S = fit.support;
  const double G = static_cast<double>(ds.G());
  const VectorXd& y = ds.y();
  if (S.empty()) {
    fit.converged = true;
    return fit;
  }
  const MatrixXd XS = ds.X().gather(S);
  const Index s = XS.cols();
  VectorXd b = VectorXd::Zero(s);
  VectorXd eta = VectorXd::Zero(ds.n());
  double loss = logit_loss(y, eta, G);

  for (int iter = 1; iter <= config.max_iter; ++iter) {
    fit.iterations = iter;
    VectorXd resid(ds.n());
    VectorXd w(ds.n());
    for (Index i = 0; i < ds.n(); ++i) {
      resid[i] = y[i] - logistic::cdf(eta[i]);
      w[i] = logistic::density(eta[i]);
    }
    const VectorXd grad = XS.transpose() * resid / G;
    fit.final_gradient_norm = grad.cwiseAbs().maxCoeff();
    const MatrixXd H = XS.transpose() * w.asDiagonal() * XS / G;
    VectorXd step;
    if (!solve_spd(H, grad, step))
      throw SingularError("restricted Logit Hessian is singular on support " + describe(S));
    // Under separation the gradient vanishes while the Newton step stays O(1).
    if (fit.final_gradient_norm < config.grad_tol && step.cwiseAbs().maxCoeff() < 1e-3) {
      fit.converged = true;
      break;
    }

    double t = 1.0;
    VectorXd b_new;
    VectorXd eta_new;
    double loss_new = loss;
    bool accepted = false;
    for (int h = 0; h <= config.max_halvings; ++h, t *= 0.5) {
      b_new = b + t * step;
      eta_new = XS * b_new;
      loss_new = logit_loss(y, eta_new, G);
      if (loss_new <= loss + 1e-14 * std::max(1.0, std::abs(loss))) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    const double change = (b_new - b).cwiseAbs().maxCoeff();
    b = std::move(b_new);
    eta = std::move(eta_new);
    loss = loss_new;
    if (b.cwiseAbs().maxCoeff() > config.separation_cap)
      throw SeparationError("perfect separation suspected on support " + describe(S) + ": |beta| exceeds " +
                            std::to_string(config.separation_cap));
    if (change < config.coef_tol) {
      // One more gradient evaluation at the accepted point.
      VectorXd r(ds.n());
      for (Index i = 0; i < ds.n(); ++i) r[i] = y[i] - logistic::cdf(eta[i]);
      fit.final_gradient_norm = (XS.transpose() * r / G).cwiseAbs().maxCoeff();
      fit.converged = true;
      break;
    }
  }
  if (!fit.converged)
    throw ConvergenceError("restricted Logit did not converge on support " + describe(S), fit.final_gradient_norm);
  for (Index c = 0; c < s; ++c) fit.beta[S[static_cast<std::size_t>(c)]] = b[c];
  return fit;
}

RestrictedFit fit_restricted_wls(const VectorXd& y, const Design& X, const VectorXd& weights,
                                 std::span<const Index> support_in) {
  if (y.size() != X.rows() || weights.size() != X.rows()) throw ShapeError("WLS inputs have mismatched lengths");
  if ((weights.array() < 0.0).any()) throw DomainError("WLS weights must be nonnegative");
  RestrictedFit fit;
  fit.support = normalized_support(support_in, X.cols());
  fit.beta = VectorXd::Zero(X.cols());
  fit.converged = true;
  fit.iterations = 1;
  const auto& S = fit.support;
  if (S.empty()) return fit;
  const MatrixXd XS = X.gather(S);
  const MatrixXd XtW = XS.transpose() * weights.asDiagonal();
  const MatrixXd H = XtW * XS;
  const VectorXd rhs = XtW * y;
  VectorXd b;
  if (!solve_spd(H, rhs, b))
    throw SingularError("weighted least squares is rank deficient on support " + describe(S));
  // Iterative refinement: the residual's weighted orthogonality to X_S is
  // what downstream identities rely on.
  VectorXd resid = y - XS * b;
  for (int pass = 0; pass < 2; ++pass) {
    VectorXd delta;
    if (!solve_spd(H, XtW * resid, delta)) break;
    b += delta;
    resid = y - XS * b;
  }
  for (std::size_t c = 0; c < S.size(); ++c) fit.beta[S[c]] = b[static_cast<Index>(c)];
  fit.final_gradient_norm = (XtW * resid).cwiseAbs().maxCoeff();
  return fit;
}

}  // namespace pdsape
