#pragma once

#include "pdsape/ape.hpp"
#include "pdsape/data.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace pdsape {

struct BootstrapConfig {
  int B = 600;
  double level = 0.05;
  /// Divide by sigma_tilde_k; false uses 1 instead.
  bool studentize = true;
  std::uint64_t seed = 0;
  int threads = 0;

  void check() const;
};

struct Interval {
  Index k = 0;
  double lower = 0.0;
  double upper = 0.0;
  double ape_lower = 0.0;
  double ape_upper = 0.0;
};

struct BootstrapOutcome {
  /// Replicate maxima W^1..W^B.
  VectorXd W;
  double c_a = 0.0;
  double T = 0.0;
  bool reject = false;
  double level = 0.05;
  std::vector<Interval> intervals;
};

/// max_k sqrt(G) |alpha_k - null_k| / sigma_k (sigma_k = 1 when not studentized).
/// Throws NumericalError when a studentizing sigma is 0.
double test_statistic(std::span<const ApeResult> results, std::span<const double> nulls, double G, bool studentize);

/// Gaussian multiplier maxima: W^b = max_k |sum_g xi_g^b scores(g, k)| / (sqrt(G) scale_k),
/// with xi_g^b a standard normal keyed by (seed, b, g) and shared across k.
VectorXd multiplier_maxima(const MatrixXd& scores, const VectorXd& scale, int B, std::uint64_t seed, int threads);
/// Straight loop over b, g, k; the reference the parallel kernel must match bitwise.
VectorXd multiplier_maxima_serial(const MatrixXd& scores, const VectorXd& scale, int B, std::uint64_t seed);

/// Order statistic of rank ceil((1 - a) B) (1-based), no interpolation.
double critical_value(const VectorXd& W, double a);

/// G x |A| matrix of cached bootstrap scores.
MatrixXd score_matrix(std::span<const ApeResult> results);

/// Replicates, critical value at config.level, T against `nulls`, intervals.
BootstrapOutcome bootstrap_maxima(std::span<const ApeResult> results, const ClusteredDataset& ds,
                                  std::span<const double> nulls, const BootstrapConfig& config);

/// alpha_k -/+ sigma_k c_a / sqrt(G) (or c_a / sqrt(G)), plus the APE scale (times G/n).
std::vector<Interval> simultaneous_intervals(double c_a, std::span<const ApeResult> results, double G, double n,
                                             bool studentize);

}  // namespace pdsape
