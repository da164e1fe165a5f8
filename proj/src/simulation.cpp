#include "pdsape/simulation.hpp"

#include "pdsape/bootstrap.hpp"
#include "pdsape/errors.hpp"
#include "pdsape/logistic.hpp"
#include "pdsape/parallel.hpp"
#include "pdsape/penalty.hpp"
#include "pdsape/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <tuple>

namespace pdsape {

namespace {

constexpr std::array<const char*, 11> kNames{"M1", "M2", "M3", "M4", "M5", "M6", "M7", "M8", "M9", "M10", "LD"};

double model_rho(DgpModel m) {
  static constexpr double rhos[] = {0.1, 0.3, 0.5, 0.7, 0.9};
  if (m == DgpModel::LD) return 0.5;
  return rhos[static_cast<int>(m) % 5];
}

// One draw of N(0, Toeplitz(rho)) of length len via the AR(1) recursion.
void toeplitz_normal(PhiloxStream& rng, double rho, Index len, double* out) {
  const double innov = std::sqrt(1.0 - rho * rho);
  double prev = 0.0;
  for (Index j = 0; j < len; ++j) {
    const double e = rng.normal();
    prev = j == 0 ? e : rho * prev + innov * e;
    out[j] = prev;
  }
}

// One covariate component: Gaussian, or Z0 - 1.5 B Z1 with Z1 ~ N(1, Sigma).
void covariate_component(PhiloxStream& rng, double rho, Index len, bool mixture, double* out, double* scratch) {
  toeplitz_normal(rng, rho, len, out);
  if (mixture && rng.bernoulli(0.1)) {
    toeplitz_normal(rng, rho, len, scratch);
    for (Index j = 0; j < len; ++j) out[j] -= 1.5 * (1.0 + scratch[j]);
  }
}

// Index of the last nonzero coefficient plus one.
Index active_length(const VectorXd& beta) {
  for (Index j = beta.size(); j-- > 0;)
    if (beta[j] != 0.0) return j + 1;
  return 0;
}

}  // namespace

std::string to_string(DgpModel m) { return kNames[static_cast<std::size_t>(m)]; }

std::optional<DgpModel> parse_dgp(const std::string& name) {
  for (std::size_t i = 0; i < kNames.size(); ++i)
    if (name == kNames[i]) return static_cast<DgpModel>(i);
  return std::nullopt;
}

std::string dgp_names() {
  std::string s;
  for (std::size_t i = 0; i < kNames.size(); ++i) s += (i ? ", " : "") + std::string(kNames[i]);
  return s;
}

DgpSpec DgpSpec::make(DgpModel model, double beta2, Index G0, Index n, Index p, std::uint64_t seed) {
  DgpSpec s;
  s.model = model;
  s.rho = model_rho(model);
  s.beta2 = beta2;
  s.G0 = G0;
  s.n = n;
  s.p = p;
  s.seed = seed;
  return s;
}

DgpSpec DgpSpec::scaled(DgpModel model, double beta2, Index G0, std::uint64_t seed) {
  return make(model, beta2, G0, G0 * 5 / 2, G0 * 3 / 2, seed);
}

DgpSpec DgpSpec::low_dim(std::uint64_t seed) {
  DgpSpec s = make(DgpModel::LD, -1.0, 200, 200, 10, seed);
  return s;
}

bool DgpSpec::mixture() const {
  return model != DgpModel::LD && static_cast<int>(model) >= static_cast<int>(DgpModel::M6);
}

VectorXd DgpSpec::beta0() const {
  VectorXd b = VectorXd::Zero(p);
  if (model == DgpModel::LD) {
    const double v[] = {0.1, beta2, 1.0};
    for (Index j = 0; j < std::min<Index>(p, 3); ++j) b[j] = v[j];
    return b;
  }
  if (p > 0) b[0] = 1.0;
  if (p > 1) b[1] = beta2;
  for (Index j = 2; j < std::min<Index>(p, 20); ++j) b[j] = 1.0 / static_cast<double>(j + 1);
  return b;
}

std::vector<std::string> DgpSpec::check() const {
  if (n < 1 || p < 1 || G0 < 1) throw ConfigError("simulation sizes n, p, G0 must be positive");
  if (!(rho > -1.0 && rho < 1.0)) throw ConfigError("rho must lie in (-1, 1)");
  if (!std::isfinite(beta2)) throw ConfigError("beta2 must be finite");
  std::vector<std::string> warnings;
  if (model != DgpModel::LD) {
    static constexpr double grid[] = {0.1, 0.3, 0.5, 0.7, 0.9};
    if (std::none_of(std::begin(grid), std::end(grid), [&](double r) { return std::abs(r - rho) < 1e-12; })) {
      std::ostringstream os;
      os << "rho = " << rho << " is outside the published grid {0.1, 0.3, 0.5, 0.7, 0.9}";
      warnings.push_back(os.str());
    }
  }
  return warnings;
}

ClusteredDataset simulate_dgp(const DgpSpec& spec, std::uint64_t rep) {
  spec.check();
  PhiloxStream rng(spec.seed, rep);
  const VectorXd beta = spec.beta0();
  const Index n = spec.n;
  const Index p = spec.p;
  MatrixXd X(n, p);
  VectorXd y(n);
  std::vector<Index> cluster_of(static_cast<std::size_t>(n));

  if (spec.iid()) {
    std::vector<double> row(static_cast<std::size_t>(p));
    for (Index i = 0; i < n; ++i) {
      toeplitz_normal(rng, spec.rho, p, row.data());
      for (Index j = 0; j < p; ++j) X(i, j) = row[static_cast<std::size_t>(j)];
      const double u = logistic::quantile(rng.uniform());
      y[i] = X.row(i).dot(beta) + u > 0.0 ? 1.0 : 0.0;
      cluster_of[static_cast<std::size_t>(i)] = i;
    }
  } else {
    const Index G0 = spec.G0;
    const Index q = p - 1;
    for (Index i = 0; i < n; ++i) cluster_of[static_cast<std::size_t>(i)] = static_cast<Index>(rng.below(static_cast<std::uint64_t>(G0)));
    MatrixXd X2(G0, q);
    VectorXd U2(G0);
    std::vector<double> comp(static_cast<std::size_t>(q));
    std::vector<double> scratch(static_cast<std::size_t>(q));
    for (Index g = 0; g < G0; ++g) {
      covariate_component(rng, spec.rho, q, spec.mixture(), comp.data(), scratch.data());
      for (Index j = 0; j < q; ++j) X2(g, j) = comp[static_cast<std::size_t>(j)];
      U2[g] = rng.normal(0.0, std::sqrt(0.5));
    }
    for (Index i = 0; i < n; ++i) {
      const Index g = cluster_of[static_cast<std::size_t>(i)];
      covariate_component(rng, spec.rho, q, spec.mixture(), comp.data(), scratch.data());
      X(i, 0) = 1.0;
      for (Index j = 0; j < q; ++j) X(i, j + 1) = comp[static_cast<std::size_t>(j)] + X2(g, j);
      const double e = rng.normal(0.0, std::sqrt(0.5)) + U2[g];
      const double u = logistic::quantile(norm_cdf(e));
      y[i] = X.row(i).dot(beta) + u > 0.0 ? 1.0 : 0.0;
    }
  }

  // Group rows by cluster (nominal order, rows in draw order); empty clusters vanish.
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return cluster_of[static_cast<std::size_t>(a)] < cluster_of[static_cast<std::size_t>(b)];
  });
  MatrixXd Xs(n, p);
  VectorXd ys(n);
  std::vector<Index> starts;
  std::vector<std::string> ids;
  for (Index r = 0; r < n; ++r) {
    const Index i = order[static_cast<std::size_t>(r)];
    Xs.row(r) = X.row(i);
    ys[r] = y[i];
    const Index g = cluster_of[static_cast<std::size_t>(i)];
    if (r == 0 || g != cluster_of[static_cast<std::size_t>(order[static_cast<std::size_t>(r - 1)])]) {
      starts.push_back(r);
      ids.push_back("c" + std::to_string(g));
    }
  }
  starts.push_back(n);
  std::vector<std::string> names;
  for (Index j = 0; j < p; ++j)
    names.push_back(!spec.iid() && j == 0 ? "intercept" : "x" + std::to_string(j + 1));
  return ClusteredDataset(std::move(ys), Design(std::move(Xs)), std::move(starts), std::move(ids), std::move(names));
}

namespace {

struct DensityMoments {
  double mean = 0.0;
  double sd = 0.0;
};

// Mean and sd of Lambda'(x'beta0) over the marginal law of one observation.
DensityMoments density_moments(const DgpSpec& spec, Index oracle_n, std::uint64_t oracle_seed, int threads) {
  using Key = std::tuple<int, double, double, Index, Index, std::uint64_t>;
  static std::mutex mu;
  static std::map<Key, DensityMoments> cache;
  const VectorXd beta = spec.beta0();
  const Index L = active_length(beta);
  const Key key{static_cast<int>(spec.model), spec.rho, spec.beta2, L, oracle_n, oracle_seed};
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }

  constexpr Index chunk = 10'000;
  const Index chunks = (oracle_n + chunk - 1) / chunk;
  std::vector<double> sum(static_cast<std::size_t>(chunks)), sumsq(static_cast<std::size_t>(chunks));
  parallel_for(chunks, threads, [&](std::int64_t c) {
    PhiloxStream rng(oracle_seed, static_cast<std::uint64_t>(c));
    const Index begin = c * chunk;
    const Index end = std::min(oracle_n, begin + chunk);
    // Only the leading coordinates with nonzero coefficients matter; the
    // AR(1) construction gives them the same law as in the full design.
    const Index len = spec.iid() ? L : std::max<Index>(L - 1, 0);
    std::vector<double> a(static_cast<std::size_t>(len)), b(static_cast<std::size_t>(len)),
        scratch(static_cast<std::size_t>(len));
    double s = 0.0, ss = 0.0;
    for (Index i = begin; i < end; ++i) {
      double eta;
      if (spec.iid()) {
        toeplitz_normal(rng, spec.rho, len, a.data());
        eta = 0.0;
        for (Index j = 0; j < len; ++j) eta += beta[j] * a[static_cast<std::size_t>(j)];
      } else {
        covariate_component(rng, spec.rho, len, spec.mixture(), a.data(), scratch.data());
        covariate_component(rng, spec.rho, len, spec.mixture(), b.data(), scratch.data());
        eta = L > 0 ? beta[0] : 0.0;
        for (Index j = 0; j < len; ++j) eta += beta[j + 1] * (a[static_cast<std::size_t>(j)] + b[static_cast<std::size_t>(j)]);
      }
      const double d = logistic::density(eta);
      s += d;
      ss += d * d;
    }
    sum[static_cast<std::size_t>(c)] = s;
    sumsq[static_cast<std::size_t>(c)] = ss;
  });
  double s = 0.0, ss = 0.0;
  for (Index c = 0; c < chunks; ++c) {
    s += sum[static_cast<std::size_t>(c)];
    ss += sumsq[static_cast<std::size_t>(c)];
  }
  const double N = static_cast<double>(oracle_n);
  DensityMoments m;
  m.mean = s / N;
  m.sd = std::sqrt(std::max(0.0, ss / N - m.mean * m.mean) * N / std::max(N - 1.0, 1.0));
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(key, m);
  return m;
}

}  // namespace

std::vector<OracleApe> oracle_true_apes(const DgpSpec& spec, const std::vector<Index>& targets, Index oracle_n,
                                        std::uint64_t oracle_seed, int threads) {
  spec.check();
  if (oracle_n < 1) throw ConfigError("oracle sample size must be positive");
  const VectorXd beta = spec.beta0();
  const DensityMoments m = density_moments(spec, oracle_n, oracle_seed, threads);
  std::vector<OracleApe> out;
  for (Index k : targets) {
    if (k < 0 || k >= spec.p) throw ShapeError("target column " + std::to_string(k) + " out of range");
    OracleApe o;
    o.k = k;
    o.ape = beta[k] * m.mean;
    o.mc_se = std::abs(beta[k]) * m.sd / std::sqrt(static_cast<double>(oracle_n));
    out.push_back(o);
  }
  return out;
}

OracleApe oracle_true_ape(const DgpSpec& spec, Index k, Index oracle_n, std::uint64_t oracle_seed) {
  return oracle_true_apes(spec, {k}, oracle_n, oracle_seed).front();
}

CoverageReport run_coverage(const DgpSpec& spec, const std::vector<Index>& targets, const CoverageConfig& config) {
  if (config.reps < 1) throw ConfigError("reps must be at least 1");
  if (targets.empty()) throw ShapeError("target set is empty");
  CoverageReport report;
  report.spec = spec;
  report.targets = targets;
  report.reps = config.reps;
  report.B = config.B;
  report.level = config.level;
  report.studentize = config.studentize;
  report.truth = oracle_true_apes(spec, targets, config.oracle_n, 0x0AC1E, config.threads);

  struct Rep {
    bool ok = false;
    bool covered = false;
    double G = 0.0;
    std::vector<double> err;
    std::string message;
  };
  std::vector<Rep> reps(static_cast<std::size_t>(config.reps));
  PipelineConfig inner = config.pipeline;
  inner.threads = 1;
  parallel_for(config.reps, config.threads, [&](std::int64_t r) {
    Rep& out = reps[static_cast<std::size_t>(r)];
    try {
      const ClusteredDataset ds = simulate_dgp(spec, static_cast<std::uint64_t>(r));
      const PipelineResult fit = run_pipeline(ds, targets, inner);
      BootstrapConfig bc;
      bc.B = config.B;
      bc.level = config.level;
      bc.studentize = config.studentize;
      bc.seed = mix_seed(spec.seed ^ mix_seed(static_cast<std::uint64_t>(r) + 1));
      bc.threads = 1;
      const std::vector<double> nulls(targets.size(), 0.0);
      BootstrapOutcome bo = bootstrap_maxima(fit.results, ds, nulls, bc);
      if (config.critical_value_override) {
        bo.c_a = *config.critical_value_override;
        bo.intervals = simultaneous_intervals(bo.c_a, fit.results, static_cast<double>(ds.G()),
                                              static_cast<double>(ds.n()), bc.studentize);
      }
      out.covered = true;
      for (std::size_t j = 0; j < targets.size(); ++j) {
        const double truth = report.truth[j].ape;
        const Interval& I = bo.intervals[j];
        if (!(I.ape_lower <= truth && truth <= I.ape_upper)) out.covered = false;
        out.err.push_back(fit.results[j].ape - truth);
      }
      out.G = static_cast<double>(ds.G());
      out.ok = true;
    } catch (const Error& e) {
      out.message = "rep " + std::to_string(r) + ": " + e.what();
    }
  });

  report.mean_bias.assign(targets.size(), 0.0);
  int covered = 0;
  for (const Rep& r : reps) {
    if (!r.ok) {
      ++report.failures;
      if (report.failure_messages.size() < 10) report.failure_messages.push_back(r.message);
      continue;
    }
    ++report.completed;
    covered += r.covered ? 1 : 0;
    report.mean_G += r.G;
    for (std::size_t j = 0; j < targets.size(); ++j) report.mean_bias[j] += r.err[j];
  }
  if (report.completed > 0) {
    const double c = static_cast<double>(report.completed);
    report.coverage = covered / c;
    report.mc_se = std::sqrt(report.coverage * (1.0 - report.coverage) / c);
    report.mean_G /= c;
    for (double& b : report.mean_bias) b /= c;
  }
  return report;
}

DebiasStudy run_debias_study(const DgpSpec& spec, Index k, int reps, const PipelineConfig& pipeline, Index oracle_n,
                             int threads) {
  if (reps < 1) throw ConfigError("reps must be at least 1");
  DebiasStudy study;
  study.spec = spec;
  study.k = k;
  study.reps = reps;
  study.truth = oracle_true_ape(spec, k, oracle_n);
  std::vector<double> ds_val(static_cast<std::size_t>(reps)), naive_val(static_cast<std::size_t>(reps));
  std::vector<char> ok(static_cast<std::size_t>(reps), 0);
  PipelineConfig inner = pipeline;
  inner.threads = 1;
  const std::vector<Index> targets{k};
  parallel_for(reps, threads, [&](std::int64_t r) {
    try {
      const ClusteredDataset data = simulate_dgp(spec, static_cast<std::uint64_t>(r));
      const PipelineResult fit = run_pipeline(data, targets, inner);
      ds_val[static_cast<std::size_t>(r)] = fit.results.front().ape;
      naive_val[static_cast<std::size_t>(r)] = plugin_ape(data, fit.bundle.beta_hat.coef, k);
      ok[static_cast<std::size_t>(r)] = 1;
    } catch (const Error&) {
    }
  });
  for (int r = 0; r < reps; ++r) {
    if (!ok[static_cast<std::size_t>(r)]) {
      ++study.failures;
      continue;
    }
    study.ds.push_back(ds_val[static_cast<std::size_t>(r)]);
    study.naive.push_back(naive_val[static_cast<std::size_t>(r)]);
  }
  study.completed = static_cast<int>(study.ds.size());
  if (study.completed > 0) {
    for (std::size_t i = 0; i < study.ds.size(); ++i) {
      study.mean_ds += study.ds[i];
      study.mean_naive += study.naive[i];
    }
    study.mean_ds /= study.completed;
    study.mean_naive /= study.completed;
  }
  return study;
}

}  // namespace pdsape
