#include "pdsape/penalty.hpp"

#include "pdsape/errors.hpp"
#include "pdsape/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pdsape {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

// Horner evaluation, coefficients in increasing degree.
template <std::size_t N>
double horner(const double (&c)[N], double x) {
  double s = 0.0;
  for (std::size_t i = N; i-- > 0;) s = s * x + c[i];
  return s;
}

}  // namespace

double inv_norm_cdf(double q) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("inverse normal CDF needs 0 < q < 1");

  static constexpr double a[] = {3.3871328727963666080e0, 1.3314166789178437745e+2, 1.9715909503065514427e+3,
                                 1.3731693765509461125e+4, 4.5921953931549871457e+4, 6.7265770927008700853e+4,
                                 3.3430575583588128105e+4, 2.5090809287301226727e+3};
  static constexpr double b[] = {1.0,
                                 4.2313330701600911252e+1,
                                 6.8718700749205790830e+2,
                                 5.3941960214247511077e+3,
                                 2.1213794301586595867e+4,
                                 3.9307895800092710610e+4,
                                 2.8729085735721942674e+4,
                                 5.2264952788528545610e+3};
  static constexpr double c[] = {1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
                                 3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
                                 2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static constexpr double d[] = {1.0,
                                 2.05319162663775882187e0,
                                 1.67638483018380384940e0,
                                 6.89767334985100004550e-1,
                                 1.48103976427480074590e-1,
                                 1.51986665636164571966e-2,
                                 5.47593808499534494600e-4,
                                 1.05075007164441684324e-9};
  static constexpr double e[] = {6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
                                 2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                 2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr double f[] = {1.0,
                                 5.99832206555887937690e-1,
                                 1.36929880922735805310e-1,
                                 1.48753612908506148525e-2,
                                 7.86869131145613259100e-4,
                                 1.84631831751005468180e-5,
                                 1.42151175831644588870e-7,
                                 2.04426310338993978564e-15};

  const double dq = q - 0.5;
  if (std::abs(dq) <= 0.425) {
    const double r = 0.180625 - dq * dq;
    return dq * horner(a, r) / horner(b, r);
  }
  double r = std::sqrt(-std::log(dq < 0.0 ? q : 1.0 - q));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = horner(c, r) / horner(d, r);
  } else {
    r -= 5.0;
    value = horner(e, r) / horner(f, r);
  }
  return dq < 0.0 ? -value : value;
}

std::string to_string(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::LogitBeta: return "logit-beta";
    case PenaltyKind::NodewiseGamma: return "nodewise-gamma";
    case PenaltyKind::WeightedZeta: return "weighted-zeta";
  }
  return "unknown";
}

double PenaltyConfig::gamma_for(Index G) const {
  if (gamma) return *gamma;
  const double g = static_cast<double>(G);
  const double upper = 1.0 / std::log(g);
  const double lower = 1.0 / g;
  return std::clamp(0.1 / std::log(g), std::min(lower, upper), upper);
}

void PenaltyConfig::check() const {
  if (!(c > 1.0)) throw ConfigError("penalty.c must exceed 1");
  if (gamma && !(*gamma > 0.0 && *gamma <= 1.0)) throw ConfigError("penalty.gamma must lie in (0, 1]");
  if (m_bar < 0) throw ConfigError("penalty.m_bar must be nonnegative");
  if (!(lambda_scale >= 0.0) || !std::isfinite(lambda_scale))
    throw ConfigError("penalty.lambda_scale must be finite and nonnegative");
}

double lambda_for(PenaltyKind kind, Index G, Index p, const PenaltyConfig& config) {
  config.check();
  if (G < 3) throw DomainError("penalty level needs G >= 3");
  if (p < 1) throw DomainError("penalty level needs p >= 1");
  const double gamma = config.gamma_for(G);
  const double pd = static_cast<double>(p);
  double denom = 2.0 * pd;
  switch (kind) {
    case PenaltyKind::LogitBeta: denom = 2.0 * pd; break;
    case PenaltyKind::NodewiseGamma: denom = 2.0 * pd * std::max(pd - 1.0, 1.0); break;
    case PenaltyKind::WeightedZeta: denom = 2.0 * pd * pd; break;
  }
  // Phi^{-1}(1 - a) as -Phi^{-1}(a): 1 - a would round away most digits of a.
  const double base = config.c * std::sqrt(static_cast<double>(G)) * (0.0 - inv_norm_cdf(gamma / denom));
  return config.lambda_scale * base;
}

namespace {

// Loadings are defined for any G; lambda only for G >= 3.
double penalty_level(PenaltyKind kind, Index G, Index p, const PenaltyConfig& config) {
  if (G < 3) return std::numeric_limits<double>::quiet_NaN();
  return lambda_for(kind, G, p, config);
}

}  // namespace

PenaltyLoadings loadings_logit(const ClusteredDataset& ds, const VectorXd* beta_tilde, int m,
                               const PenaltyConfig& config) {
  PenaltyLoadings out;
  out.kind = PenaltyKind::LogitBeta;
  out.iteration = m;
  out.lambda = penalty_level(PenaltyKind::LogitBeta, ds.G(), ds.p(), config);
  out.loadings.resize(ds.p());
  const double G = static_cast<double>(ds.G());
  if (m == 0) {
    // (1/G) sum_g sum_i n_g x_ij^2, with n_g the size of the row's own cluster.
    VectorXd cluster_size(ds.n());
    for (Index g = 0; g < ds.G(); ++g)
      cluster_size.segment(ds.cluster_begin(g), ds.cluster_size(g)).setConstant(static_cast<double>(ds.cluster_size(g)));
    for (Index j = 0; j < ds.p(); ++j) out.loadings[j] = 0.5 * std::sqrt(ds.X().col_wsq(j, cluster_size) / G);
  } else {
    if (beta_tilde == nullptr) throw ShapeError("logit loadings for m >= 1 need the previous post-lasso fit");
    if (beta_tilde->size() != ds.p()) throw ShapeError("post-lasso coefficients have the wrong length");
    const VectorXd eta = ds.X().multiply(*beta_tilde);
    VectorXd resid(ds.n());
    for (Index i = 0; i < ds.n(); ++i) resid[i] = ds.y()[i] - logistic::cdf(eta[i]);
    for (Index j = 0; j < ds.p(); ++j) out.loadings[j] = std::sqrt(ds.mean_squared_cluster_score(j, resid));
  }
  if (!config.penalize_intercept)
    if (auto ic = ds.intercept_column()) out.loadings[*ic] = 0.0;
  return out;
}

PenaltyLoadings loadings_weighted(const ClusteredDataset& ds, const VectorXd& f_hat_sq, const VectorXd& target,
                                  const VectorXd* coef_tilde, int m, std::optional<Index> excluded_col,
                                  const PenaltyConfig& config) {
  if (f_hat_sq.size() != ds.n() || target.size() != ds.n()) throw ShapeError("weights/target length must equal n");
  if ((f_hat_sq.array() <= 0.0).any() || !f_hat_sq.allFinite())
    throw DomainError("regression weights must be positive");
  const Index p = ds.p();
  const Index q = excluded_col ? p - 1 : p;
  PenaltyLoadings out;
  out.kind = excluded_col ? PenaltyKind::NodewiseGamma : PenaltyKind::WeightedZeta;
  out.iteration = m;
  out.lambda = penalty_level(out.kind, ds.G(), p, config);
  out.loadings = VectorXd::Zero(q);
  const VectorXd f_hat = f_hat_sq.cwiseSqrt();
  auto column_of = [&](Index c) { return excluded_col ? original_column(c, *excluded_col) : c; };

  if (m == 0) {
    const VectorXd ft = f_hat.cwiseProduct(target);
    const double scale = std::sqrt(ds.mean_squared_cluster_sum(ft));
    for (Index c = 0; c < q; ++c) out.loadings[c] = 2.0 * ds.X().col_scaled_absmax(column_of(c), f_hat) * scale;
  } else {
    if (coef_tilde == nullptr) throw ShapeError("weighted loadings for m >= 1 need the previous post-lasso fit");
    if (coef_tilde->size() != q) throw ShapeError("post-lasso coefficients have the wrong length");
    VectorXd fitted = VectorXd::Zero(ds.n());
    for (Index c = 0; c < q; ++c) ds.X().col_axpy(column_of(c), (*coef_tilde)[c], fitted);
    const VectorXd wres = f_hat_sq.cwiseProduct(target - fitted);
    for (Index c = 0; c < q; ++c)
      out.loadings[c] = 2.0 * std::sqrt(ds.mean_squared_cluster_score(column_of(c), wres));
  }
  if (!config.penalize_intercept) {
    if (auto ic = ds.intercept_column(); ic && (!excluded_col || *ic != *excluded_col))
      out.loadings[excluded_col ? reduced_column(*ic, *excluded_col) : *ic] = 0.0;
  }
  return out;
}

}  // namespace pdsape
