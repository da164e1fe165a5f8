#pragma once

#include "pdsape/data.hpp"
#include "pdsape/lasso.hpp"
#include "pdsape/logistic.hpp"
#include "pdsape/nodewise.hpp"
#include "pdsape/penalty.hpp"

#include <span>
#include <vector>

namespace pdsape {

struct PipelineConfig {
  PenaltyConfig penalty;
  LassoConfig lasso;
  NewtonConfig newton;
  /// Use beta_tilde^k_k in the variance score as well (the bootstrap score
  /// always uses it). Off by default.
  bool use_beta_tilde_k = false;
  /// 0 = OpenMP default, 1 = plain serial loop.
  int threads = 0;
};

/// Everything estimated for one target column k.
struct TargetNuisance {
  Index k = 0;
  RestrictedFit beta_tilde_k;
  VectorXd S_hat;
  WeightedSelection zeta;
  NodewiseRow nodewise;
  ThetaRow theta;
  VectorXd mu_tilde;
};

struct NuisanceBundle {
  SelectionFit beta_hat;
  PenaltyLoadings beta_penalty;
  RestrictedFit beta_tilde;
  /// Lambda'(x'beta_tilde) and Lambda(x'beta_tilde) per observation.
  VectorXd f_hat_sq;
  VectorXd fitted_prob;
  std::vector<Index> targets;
  std::vector<TargetNuisance> per_target;

  const TargetNuisance& at(Index k) const;
};

/// Lasso Logit with m_bar loading refinements and its post-lasso refit.
void estimate_outcome(const ClusteredDataset& ds, const PipelineConfig& cfg, NuisanceBundle& bundle);

/// Per-target nuisance for k: restricted Logit on support(beta_hat) + {k},
/// S_hat, zeta (weighted lasso + refit), nodewise row, theta and mu.
TargetNuisance estimate_target_nuisance(const ClusteredDataset& ds, const NuisanceBundle& shared, Index k,
                                        const PipelineConfig& cfg);

/// Outcome step once, then every target (OpenMP over targets unless threads == 1).
NuisanceBundle estimate_nuisance(const ClusteredDataset& ds, std::span<const Index> targets,
                                 const PipelineConfig& cfg = {});

/// {k} + support(beta_hat) + support(zeta_hat^k) + support(gamma_hat^k), sorted.
std::vector<Index> support_union(const NuisanceBundle& bundle, Index k);

struct ApeResult {
  Index k = 0;
  double alpha_tilde = 0.0;
  double ape = 0.0;
  double sigma_tilde = 0.0;
  std::vector<Index> support_union;
  VectorXd beta_check;
  /// Per-cluster score sums; variance uses beta_tilde_k (or beta_tilde^k_k
  /// when harmonized), the bootstrap always beta_tilde^k_k.
  VectorXd variance_scores;
  VectorXd bootstrap_scores;
  bool converged = false;
};

ApeResult estimate_ape(const ClusteredDataset& ds, const NuisanceBundle& bundle, Index k,
                       const PipelineConfig& cfg = {});

/// alpha G/n - beta_k Lambda'(x'beta) - mu'x (y - Lambda(x'beta)) for one observation.
double orthogonal_score(std::span<const double> x, double y, double alpha, const VectorXd& beta, const VectorXd& mu,
                        Index k, double G, double n);

/// Same score from precomputed pieces: index eta = x'beta and mu'x.
inline double score_value(double y, double eta, double mu_x, double alpha, double beta_k, double G, double n) {
  return alpha * G / n - beta_k * logistic::density(eta) - mu_x * (y - logistic::cdf(eta));
}

/// Per-cluster sums of the score at (alpha, beta, mu).
VectorXd cluster_scores(const ClusteredDataset& ds, double alpha, const VectorXd& beta, double beta_k,
                        const VectorXd& mu);

/// (1/n) sum beta_k Lambda'(x'beta): the plug-in APE at a given coefficient vector.
double plugin_ape(const ClusteredDataset& ds, const VectorXd& beta, Index k);

struct PipelineResult {
  NuisanceBundle bundle;
  std::vector<ApeResult> results;
};

/// Nuisance estimation plus estimate_ape for every target, ordered as `targets`.
PipelineResult run_pipeline(const ClusteredDataset& ds, std::span<const Index> targets,
                            const PipelineConfig& cfg = {});

}  // namespace pdsape
