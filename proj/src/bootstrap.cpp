#include "pdsape/bootstrap.hpp"

#include "pdsape/errors.hpp"
#include "pdsape/parallel.hpp"
#include "pdsape/rng.hpp"

#include <algorithm>
#include <cmath>

namespace pdsape {

void BootstrapConfig::check() const {
  if (B < 1) throw ConfigError("bootstrap B must be at least 1");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("significance level must lie in (0, 1)");
}

double test_statistic(std::span<const ApeResult> results, std::span<const double> nulls, double G, bool studentize) {
  if (nulls.size() != results.size()) throw ShapeError("nulls must align with the target set");
  double T = 0.0;
  for (std::size_t j = 0; j < results.size(); ++j) {
    const double s = studentize ? results[j].sigma_tilde : 1.0;
    if (studentize && !(s > 0.0))
      throw NumericalError("degenerate variance for column " + std::to_string(results[j].k));
    T = std::max(T, std::sqrt(G) * std::abs(results[j].alpha_tilde - nulls[j]) / s);
  }
  return T;
}

namespace {

double replicate_max(const MatrixXd& scores, const VectorXd& denom, std::uint64_t seed, std::uint64_t b,
                     VectorXd& acc) {
  acc.setZero();
  for (Index g = 0; g < scores.rows(); ++g) {
    const double xi = counter_normal(seed, b, static_cast<std::uint64_t>(g));
    for (Index k = 0; k < scores.cols(); ++k) acc[k] += xi * scores(g, k);
  }
  double w = 0.0;
  for (Index k = 0; k < scores.cols(); ++k) w = std::max(w, std::abs(acc[k]) / denom[k]);
  return w;
}

VectorXd denominators(const MatrixXd& scores, const VectorXd& scale) {
  if (scale.size() != scores.cols()) throw ShapeError("one scale per target is required");
  return std::sqrt(static_cast<double>(scores.rows())) * scale;
}

}  // namespace

VectorXd multiplier_maxima_serial(const MatrixXd& scores, const VectorXd& scale, int B, std::uint64_t seed) {
  const VectorXd denom = denominators(scores, scale);
  VectorXd W(B);
  VectorXd acc(scores.cols());
  for (int b = 0; b < B; ++b) W[b] = replicate_max(scores, denom, seed, static_cast<std::uint64_t>(b), acc);
  return W;
}

VectorXd multiplier_maxima(const MatrixXd& scores, const VectorXd& scale, int B, std::uint64_t seed, int threads) {
  const VectorXd denom = denominators(scores, scale);
  VectorXd W(B);
  const int t = resolve_threads(threads);
  if (t <= 1) return multiplier_maxima_serial(scores, scale, B, seed);
#pragma omp parallel num_threads(t)
  {
    VectorXd acc(scores.cols());
#pragma omp for schedule(static)
    for (int b = 0; b < B; ++b) W[b] = replicate_max(scores, denom, seed, static_cast<std::uint64_t>(b), acc);
  }
  return W;
}

double critical_value(const VectorXd& W, double a) {
  if (W.size() == 0) throw ConfigError("no bootstrap replicates");
  if (!(a > 0.0 && a < 1.0)) throw ConfigError("significance level must lie in (0, 1)");
  const double B = static_cast<double>(W.size());
  // Guard against (1 - a) B landing a hair above an integer, e.g. 0.95 * 300.
  auto rank = static_cast<Index>(std::ceil((1.0 - a) * B - 1e-9));
  rank = std::clamp<Index>(rank, 1, W.size());
  std::vector<double> sorted(W.data(), W.data() + W.size());
  std::nth_element(sorted.begin(), sorted.begin() + (rank - 1), sorted.end());
  return sorted[static_cast<std::size_t>(rank - 1)];
}

MatrixXd score_matrix(std::span<const ApeResult> results) {
  if (results.empty()) throw ShapeError("target set is empty");
  const Index G = results.front().bootstrap_scores.size();
  MatrixXd S(G, static_cast<Index>(results.size()));
  for (std::size_t j = 0; j < results.size(); ++j) {
    if (results[j].bootstrap_scores.size() != G) throw ShapeError("score vectors differ in length");
    S.col(static_cast<Index>(j)) = results[j].bootstrap_scores;
  }
  return S;
}

std::vector<Interval> simultaneous_intervals(double c_a, std::span<const ApeResult> results, double G, double n,
                                             bool studentize) {
  std::vector<Interval> out;
  out.reserve(results.size());
  for (const auto& r : results) {
    const double half = (studentize ? r.sigma_tilde : 1.0) * c_a / std::sqrt(G);
    Interval I;
    I.k = r.k;
    I.lower = r.alpha_tilde - half;
    I.upper = r.alpha_tilde + half;
    I.ape_lower = I.lower * G / n;
    I.ape_upper = I.upper * G / n;
    out.push_back(I);
  }
  return out;
}

BootstrapOutcome bootstrap_maxima(std::span<const ApeResult> results, const ClusteredDataset& ds,
                                  std::span<const double> nulls, const BootstrapConfig& config) {
  config.check();
  const MatrixXd S = score_matrix(results);
  if (S.rows() != ds.G()) throw ShapeError("scores do not match the dataset's cluster count");
  VectorXd scale(S.cols());
  for (std::size_t j = 0; j < results.size(); ++j) {
    scale[static_cast<Index>(j)] = config.studentize ? results[j].sigma_tilde : 1.0;
    if (!(scale[static_cast<Index>(j)] > 0.0))
      throw NumericalError("degenerate variance for column " + std::to_string(results[j].k));
  }
  const double G = static_cast<double>(ds.G());
  BootstrapOutcome out;
  out.level = config.level;
  out.W = multiplier_maxima(S, scale, config.B, config.seed, config.threads);
  out.c_a = critical_value(out.W, config.level);
  out.T = test_statistic(results, nulls, G, config.studentize);
  out.reject = out.T > out.c_a;
  out.intervals = simultaneous_intervals(out.c_a, results, G, static_cast<double>(ds.n()), config.studentize);
  return out;
}

}  // namespace pdsape
