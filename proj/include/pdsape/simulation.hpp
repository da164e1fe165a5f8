#pragma once

#include "pdsape/ape.hpp"
#include "pdsape/data.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pdsape {

/// M1-M5: Gaussian covariates, M6-M10: contaminated mixture; rho = .1, .3, .5,
/// .7, .9 within each group. LD: low-dimensional i.i.d. design without
/// intercept, beta = [.1, -1, 1, 0, ...].
enum class DgpModel { M1, M2, M3, M4, M5, M6, M7, M8, M9, M10, LD };

std::string to_string(DgpModel m);
std::optional<DgpModel> parse_dgp(const std::string& name);
/// "M1, ..., M10, LD".
std::string dgp_names();

struct DgpSpec {
  DgpModel model = DgpModel::M1;
  double rho = 0.1;
  double beta2 = 0.0;
  Index G0 = 200;
  Index n = 500;
  Index p = 300;
  std::uint64_t seed = 0;

  /// Model's own rho, explicit sizes.
  static DgpSpec make(DgpModel model, double beta2, Index G0, Index n, Index p, std::uint64_t seed = 0);
  /// p = 1.5 G0 and n = 2.5 G0.
  static DgpSpec scaled(DgpModel model, double beta2, Index G0, std::uint64_t seed = 0);
  /// n = 200, p = 10, rho = 0.5, one observation per cluster.
  static DgpSpec low_dim(std::uint64_t seed = 0);

  bool mixture() const;
  bool iid() const { return model == DgpModel::LD; }
  VectorXd beta0() const;
  /// Throws ConfigError on invalid sizes; returns non-fatal warnings.
  std::vector<std::string> check() const;
};

/// Draw `rep` of the design: a pure function of (spec, rep).
ClusteredDataset simulate_dgp(const DgpSpec& spec, std::uint64_t rep = 0);

struct OracleApe {
  Index k = 0;
  double ape = 0.0;
  double mc_se = 0.0;
};

/// E[beta0_k Lambda'(x'beta0)] over the marginal law of one observation,
/// by Monte Carlo with `oracle_n` draws. Results are cached per process.
std::vector<OracleApe> oracle_true_apes(const DgpSpec& spec, const std::vector<Index>& targets,
                                        Index oracle_n = 3'000'000, std::uint64_t oracle_seed = 0x0AC1E,
                                        int threads = 0);
OracleApe oracle_true_ape(const DgpSpec& spec, Index k, Index oracle_n = 3'000'000,
                          std::uint64_t oracle_seed = 0x0AC1E);

struct CoverageConfig {
  PipelineConfig pipeline;
  int reps = 300;
  int B = 300;
  double level = 0.05;
  bool studentize = false;
  Index oracle_n = 3'000'000;
  int threads = 0;
  /// Replaces the bootstrap critical value (testing hook).
  std::optional<double> critical_value_override;
};

struct CoverageReport {
  DgpSpec spec;
  std::vector<Index> targets;
  int reps = 0;
  int B = 0;
  double level = 0.05;
  bool studentize = false;
  int completed = 0;
  int failures = 0;
  double coverage = 0.0;
  double mc_se = 0.0;
  std::vector<OracleApe> truth;
  /// Mean of (APE estimate - truth) per target over completed replications.
  std::vector<double> mean_bias;
  double mean_G = 0.0;
  /// First few failure messages, by replication index.
  std::vector<std::string> failure_messages;
};

/// Simulate, estimate, bootstrap and check whether every truth lies in its
/// simultaneous interval; replications run in parallel, keyed by index.
CoverageReport run_coverage(const DgpSpec& spec, const std::vector<Index>& targets, const CoverageConfig& config);

struct DebiasStudy {
  DgpSpec spec;
  Index k = 0;
  int reps = 0;
  int completed = 0;
  int failures = 0;
  OracleApe truth;
  std::vector<double> ds;
  std::vector<double> naive;
  double mean_ds = 0.0;
  double mean_naive = 0.0;
};

/// Post-double-selection APE against the plug-in APE at the lasso fit.
DebiasStudy run_debias_study(const DgpSpec& spec, Index k, int reps, const PipelineConfig& pipeline,
                             Index oracle_n = 3'000'000, int threads = 0);

}  // namespace pdsape
