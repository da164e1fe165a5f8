// pdsape: post-double-selection APE estimation and simultaneous inference.
//
// Exit codes: 0 success, 1 numerical failure, 2 usage or input error.

#include "pdsape/ape.hpp"
#include "pdsape/bootstrap.hpp"
#include "pdsape/config.hpp"
#include "pdsape/data.hpp"
#include "pdsape/errors.hpp"
#include "pdsape/simulation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using json = nlohmann::ordered_json;
using namespace pdsape;

namespace {

constexpr const char* kSchemaVersion = "1.0";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string input;
  std::string sparse;
  std::string labels;
  std::string cluster_col = "cluster";
  std::string outcome_col = "y";
  Index sparse_p = 0;
  bool intercept = false;
  std::string config;
  std::vector<std::string> sets;
  std::string targets;
  std::string nulls;
  std::string levels;
  std::optional<int> B;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string out;
  std::string format = "json";
  bool dry_run = false;
  bool timing = false;
  std::string emit_data;
  // simulate
  std::string dgp;
  std::string study = "coverage";
  std::string beta2 = "0";
  Index G0 = 200;
  Index n = 500;
  Index p = 300;
  bool scaled = false;
  int reps = 300;
  bool studentize = false;
  Index oracle_n = 3'000'000;
};

std::string num(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

double parse_number(const std::string& what, const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw UsageError(what + ": '" + s + "' is not a number");
  return v;
}

std::vector<double> parse_levels(const std::string& s, double fallback) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(parse_number("--levels", item));
  if (out.empty()) out.push_back(fallback);
  for (double a : out)
    if (!(a > 0.0 && a < 1.0)) throw UsageError("significance level " + num(a) + " is outside (0, 1)");
  return out;
}

Settings resolve_settings(const Options& o) {
  Settings s;
  if (!o.config.empty()) apply_file(s, o.config);
  apply_env(s);
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    set_key(s, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.B) s.bootstrap.B = *o.B;
  if (o.seed) s.bootstrap.seed = *o.seed;
  if (o.threads < 0) throw UsageError("--threads must be nonnegative");
  if (o.threads > 0) s.pipeline.threads = s.bootstrap.threads = o.threads;
  return s;
}

ClusteredDataset load_dataset(const Options& o) {
  if (!o.input.empty() && !o.sparse.empty()) throw UsageError("use either --input or --sparse, not both");
  if (!o.input.empty()) {
    LongCsvSchema schema;
    schema.cluster_column = o.cluster_col;
    schema.outcome_column = o.outcome_col;
    return load_long_csv(o.input, schema);
  }
  if (!o.sparse.empty()) {
    if (o.labels.empty()) throw UsageError("--sparse needs --labels");
    SparseTripletOptions so;
    so.p = o.sparse_p;
    so.intercept = o.intercept;
    return load_sparse_triplets(o.sparse, o.labels, so);
  }
  throw UsageError("an input dataset is required (--input FILE or --sparse FILE --labels FILE)");
}

std::vector<Index> resolve_targets(const ClusteredDataset& ds, const std::string& spec) {
  const auto items = split_list(spec);
  if (items.empty()) throw UsageError("--targets is required");
  std::vector<Index> out;
  // A column named twice (by name and by index) is kept once, at its first mention.
  auto add = [&out](Index c) {
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  };
  for (const auto& item : items) {
    if (auto c = ds.find_column(item)) {
      add(*c);
      continue;
    }
    long long idx = -1;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), idx);
    if (ec == std::errc() && ptr == item.data() + item.size() && idx >= 0 && idx < ds.p()) {
      add(static_cast<Index>(idx));
      continue;
    }
    std::string avail;
    const auto& names = ds.column_names();
    for (std::size_t j = 0; j < names.size() && j < 50; ++j) avail += (j ? ", " : "") + names[j];
    if (names.size() > 50) avail += ", ... (" + std::to_string(names.size()) + " columns)";
    throw UsageError("unknown target column '" + item + "'; available columns: " + avail);
  }
  return out;
}

std::vector<double> resolve_nulls(const std::string& s, std::size_t count) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(parse_number("--nulls", item));
  if (out.empty()) out.assign(count, 0.0);
  if (out.size() != count)
    throw UsageError("--nulls has " + std::to_string(out.size()) + " values for " + std::to_string(count) + " targets");
  return out;
}

json metadata(const std::string& command, std::uint64_t seed) {
  json m;
  m["schema_version"] = kSchemaVersion;
  m["command"] = command;
  m["seed"] = seed;
  return m;
}

json dataset_json(const ClusteredDataset& ds) { return {{"n", ds.n()}, {"p", ds.p()}, {"G", ds.G()}}; }

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw UsageError("cannot write " + o.out);
  f << text;
}

void check_format(const Options& o) {
  if (o.format != "json" && o.format != "csv" && o.format != "table")
    throw UsageError("--format must be json, csv or table");
}

// ---------------------------------------------------------------------------

int cmd_fit(const Options& o) {
  check_format(o);
  const Settings s = resolve_settings(o);
  const ClusteredDataset ds = load_dataset(o);
  NuisanceBundle b;
  estimate_outcome(ds, s.pipeline, b);
  const auto& names = ds.column_names();
  if (o.format == "json") {
    json j = metadata("fit", s.bootstrap.seed);
    j["dataset"] = dataset_json(ds);
    j["lambda"] = b.beta_penalty.lambda;
    j["kkt_violation"] = b.beta_hat.kkt_violation;
    json coef = json::array();
    for (Index c : b.beta_hat.support)
      coef.push_back({{"k", c}, {"name", names[c]}, {"beta_hat", b.beta_hat.coef[c]}, {"beta_tilde", b.beta_tilde.beta[c]}});
    j["support"] = coef;
    j["config"] = to_json(s);
    emit(o, j.dump(2) + "\n");
  } else {
    std::ostringstream os;
    if (o.format == "csv") {
      os << "k,name,beta_hat,beta_tilde\n";
      for (Index c : b.beta_hat.support)
        os << c << ',' << names[c] << ',' << num(b.beta_hat.coef[c]) << ',' << num(b.beta_tilde.beta[c]) << '\n';
    } else {
      char line[256];
      std::snprintf(line, sizeof line, "%6s  %-20s %12s %12s\n", "k", "name", "beta_hat", "beta_tilde");
      os << line;
      for (Index c : b.beta_hat.support) {
        std::snprintf(line, sizeof line, "%6ld  %-20s %12.6f %12.6f\n", static_cast<long>(c), names[c].c_str(),
                      b.beta_hat.coef[c], b.beta_tilde.beta[c]);
        os << line;
      }
      os << "lambda = " << fixed(b.beta_penalty.lambda, 6) << ", support size = " << b.beta_hat.support.size() << '\n';
    }
    emit(o, os.str());
  }
  return 0;
}

json ape_rows(const std::vector<ApeResult>& results, const ClusteredDataset& ds) {
  json rows = json::array();
  for (const auto& r : results)
    rows.push_back({{"k", r.k},
                    {"name", ds.column_names()[r.k]},
                    {"alpha_tilde", r.alpha_tilde},
                    {"ape", r.ape},
                    {"sigma_tilde", r.sigma_tilde},
                    {"support_size", r.support_union.size()},
                    {"converged", r.converged}});
  return rows;
}

std::string ape_text(const std::vector<ApeResult>& results, const ClusteredDataset& ds, bool csv) {
  std::ostringstream os;
  if (csv) {
    os << "k,name,alpha_tilde,ape,sigma_tilde,support_size,converged\n";
    for (const auto& r : results)
      os << r.k << ',' << ds.column_names()[r.k] << ',' << num(r.alpha_tilde) << ',' << num(r.ape) << ','
         << num(r.sigma_tilde) << ',' << r.support_union.size() << ',' << (r.converged ? "true" : "false") << '\n';
    return os.str();
  }
  char line[256];
  std::snprintf(line, sizeof line, "%6s  %-20s %12s %12s %12s %8s\n", "k", "name", "alpha_tilde", "APE", "sigma_tilde",
                "|T_k|");
  os << line;
  for (const auto& r : results) {
    std::snprintf(line, sizeof line, "%6ld  %-20s %12.6f %12.6f %12.6f %8zu\n", static_cast<long>(r.k),
                  ds.column_names()[r.k].c_str(), r.alpha_tilde, r.ape, r.sigma_tilde, r.support_union.size());
    os << line;
  }
  return os.str();
}

int cmd_ape(const Options& o) {
  check_format(o);
  const Settings s = resolve_settings(o);
  const ClusteredDataset ds = load_dataset(o);
  const std::vector<Index> targets = resolve_targets(ds, o.targets);
  const PipelineResult fit = run_pipeline(ds, targets, s.pipeline);
  if (o.format == "json") {
    json j = metadata("ape", s.bootstrap.seed);
    j["dataset"] = dataset_json(ds);
    j["results"] = ape_rows(fit.results, ds);
    j["config"] = to_json(s);
    emit(o, j.dump(2) + "\n");
  } else {
    emit(o, ape_text(fit.results, ds, o.format == "csv"));
  }
  return 0;
}

int cmd_inference(const Options& o, const std::string& command) {
  check_format(o);
  Settings s = resolve_settings(o);
  const std::vector<double> levels = parse_levels(o.levels, s.bootstrap.level);
  s.bootstrap.level = levels.front();
  s.bootstrap.check();
  const ClusteredDataset ds = load_dataset(o);
  const std::vector<Index> targets = resolve_targets(ds, o.targets);
  const std::vector<double> nulls = resolve_nulls(o.nulls, targets.size());
  const PipelineResult fit = run_pipeline(ds, targets, s.pipeline);
  const BootstrapOutcome base = bootstrap_maxima(fit.results, ds, nulls, s.bootstrap);
  const double G = static_cast<double>(ds.G());
  const double n = static_cast<double>(ds.n());

  struct LevelRow {
    double level;
    double c_a;
    bool reject;
    std::vector<Interval> intervals;
  };
  std::vector<LevelRow> rows;
  for (double a : levels) {
    const double c = critical_value(base.W, a);
    rows.push_back({a, c, base.T > c, simultaneous_intervals(c, fit.results, G, n, s.bootstrap.studentize)});
  }
  const auto& names = ds.column_names();

  if (o.format == "json") {
    auto interval_json = [&](const std::vector<Interval>& iv) {
      json arr = json::array();
      for (const auto& I : iv)
        arr.push_back({{"k", I.k},
                       {"name", names[I.k]},
                       {"lower", I.lower},
                       {"upper", I.upper},
                       {"ape_lower", I.ape_lower},
                       {"ape_upper", I.ape_upper}});
      return arr;
    };
    json j = metadata(command, s.bootstrap.seed);
    j["dataset"] = dataset_json(ds);
    j["results"] = ape_rows(fit.results, ds);
    j["nulls"] = nulls;
    j["T"] = base.T;
    j["c_a"] = rows.front().c_a;
    j["level"] = rows.front().level;
    j["B"] = s.bootstrap.B;
    j["studentize"] = s.bootstrap.studentize;
    j["reject"] = rows.front().reject;
    j["intervals"] = interval_json(rows.front().intervals);
    json lv = json::array();
    for (const auto& r : rows)
      lv.push_back({{"level", r.level}, {"c_a", r.c_a}, {"reject", r.reject}, {"intervals", interval_json(r.intervals)}});
    j["levels"] = lv;
    j["config"] = to_json(s);
    emit(o, j.dump(2) + "\n");
    return 0;
  }

  std::ostringstream os;
  if (o.format == "csv") {
    if (command == "test") {
      os << "level,c_a,T,reject\n";
      for (const auto& r : rows)
        os << num(r.level) << ',' << num(r.c_a) << ',' << num(base.T) << ',' << (r.reject ? "true" : "false") << '\n';
    } else {
      os << "level,c_a,k,name,alpha_tilde,lower,upper,ape,ape_lower,ape_upper\n";
      for (const auto& r : rows)
        for (std::size_t j = 0; j < r.intervals.size(); ++j) {
          const auto& I = r.intervals[j];
          os << num(r.level) << ',' << num(r.c_a) << ',' << I.k << ',' << names[I.k] << ','
             << num(fit.results[j].alpha_tilde) << ',' << num(I.lower) << ',' << num(I.upper) << ','
             << num(fit.results[j].ape) << ',' << num(I.ape_lower) << ',' << num(I.ape_upper) << '\n';
        }
    }
    emit(o, os.str());
    return 0;
  }

  char line[256];
  os << ape_text(fit.results, ds, false) << '\n';
  std::snprintf(line, sizeof line, "%8s  %20s  %16s  %8s\n", "alpha", "MCB critical value", "test statistic", "reject");
  os << line;
  for (const auto& r : rows) {
    char pct[32];
    std::snprintf(pct, sizeof pct, "%g%%", 100.0 * r.level);
    std::snprintf(line, sizeof line, "%8s  %20.4f  %16.4f  %8s\n", pct, r.c_a, base.T, r.reject ? "yes" : "no");
    os << line;
  }
  if (command == "ci") {
    for (const auto& r : rows) {
      os << "\nsimultaneous " << fixed(100.0 * (1.0 - r.level), 1) << "% intervals (APE scale)\n";
      for (const auto& I : r.intervals) {
        std::snprintf(line, sizeof line, "%6ld  %-20s [%12.6f, %12.6f]\n", static_cast<long>(I.k), names[I.k].c_str(),
                      I.ape_lower, I.ape_upper);
        os << line;
      }
    }
  }
  os << "B = " << s.bootstrap.B << ", seed = " << s.bootstrap.seed << ", G = " << ds.G() << '\n';
  emit(o, os.str());
  return 0;
}

// ---------------------------------------------------------------------------

json spec_json(const DgpSpec& s) {
  return {{"model", to_string(s.model)}, {"rho", s.rho}, {"beta2", s.beta2}, {"G0", s.G0},
          {"n", s.n},                    {"p", s.p},     {"seed", s.seed}};
}

int cmd_simulate(const Options& o) {
  check_format(o);
  const Settings s = resolve_settings(o);
  const auto dgp_items = split_list(o.dgp);
  if (dgp_items.empty()) throw UsageError("--dgp is required; choose from " + dgp_names());
  std::vector<DgpModel> models;
  for (const auto& d : dgp_items) {
    auto m = parse_dgp(d);
    if (!m) throw UsageError("unknown DGP '" + d + "'; choose from " + dgp_names());
    models.push_back(*m);
  }
  if (o.study != "coverage" && o.study != "debias") throw UsageError("--study must be coverage or debias");
  if (o.reps < 1) throw UsageError("--reps must be at least 1");
  std::vector<double> beta2s;
  for (const auto& b : split_list(o.beta2)) beta2s.push_back(parse_number("--beta2", b));
  if (beta2s.empty()) beta2s.push_back(0.0);
  std::vector<Index> targets;
  for (const auto& t : split_list(o.targets.empty() ? "1" : o.targets)) {
    const double v = parse_number("--targets", t);
    if (v < 0 || v != static_cast<double>(static_cast<Index>(v)))
      throw UsageError("simulation targets are 0-based column indices");
    targets.push_back(static_cast<Index>(v));
  }
  const std::uint64_t seed = s.bootstrap.seed;

  std::vector<DgpSpec> specs;
  for (DgpModel m : models)
    for (double b2 : beta2s) {
      DgpSpec spec = m == DgpModel::LD ? DgpSpec::low_dim(seed)
                     : o.scaled          ? DgpSpec::scaled(m, b2, o.G0, seed)
                                         : DgpSpec::make(m, b2, o.G0, o.n, o.p, seed);
      if (m != DgpModel::LD) spec.beta2 = b2;
      for (const auto& w : spec.check()) std::cerr << "warning: " << w << '\n';
      for (Index k : targets)
        if (k >= spec.p) throw UsageError("target " + std::to_string(k) + " exceeds p = " + std::to_string(spec.p));
      specs.push_back(spec);
    }

  json side = metadata("simulate", seed);
  side["study"] = o.study;
  side["targets"] = targets;
  side["reps"] = o.reps;
  side["B"] = s.bootstrap.B;
  side["level"] = s.bootstrap.level;
  side["studentize"] = o.studentize;
  side["oracle_n"] = o.oracle_n;
  side["config"] = to_json(s);
  if (!o.emit_data.empty()) {
    if (specs.size() != 1) throw UsageError("--emit-data needs exactly one DGP and one beta2");
    write_long_csv(simulate_dgp(specs.front(), 0), o.emit_data);
    return 0;
  }
  if (o.dry_run) {
    json arr = json::array();
    for (const auto& sp : specs) arr.push_back(spec_json(sp));
    side["specs"] = arr;
    side["dry_run"] = true;
    emit(o, side.dump(2) + "\n");
    return 0;
  }

  const auto t0 = std::chrono::steady_clock::now();
  json runs = json::array();
  std::vector<double> cells;
  for (const auto& spec : specs) {
    json r;
    r["spec"] = spec_json(spec);
    if (o.study == "coverage") {
      CoverageConfig cc;
      cc.pipeline = s.pipeline;
      cc.reps = o.reps;
      cc.B = s.bootstrap.B;
      cc.level = s.bootstrap.level;
      cc.studentize = o.studentize;
      cc.oracle_n = o.oracle_n;
      cc.threads = s.pipeline.threads;
      const CoverageReport rep = run_coverage(spec, targets, cc);
      r["coverage"] = rep.coverage;
      r["mc_se"] = rep.mc_se;
      r["completed"] = rep.completed;
      r["failures"] = rep.failures;
      r["failure_rate"] = static_cast<double>(rep.failures) / rep.reps;
      r["mean_G"] = rep.mean_G;
      json truth = json::array();
      for (std::size_t j = 0; j < rep.truth.size(); ++j)
        truth.push_back({{"k", rep.truth[j].k},
                         {"ape", rep.truth[j].ape},
                         {"oracle_se", rep.truth[j].mc_se},
                         {"mean_bias", rep.mean_bias[j]}});
      r["truth"] = truth;
      r["failure_messages"] = rep.failure_messages;
      cells.push_back(rep.coverage);
    } else {
      const DebiasStudy st = run_debias_study(spec, targets.front(), o.reps, s.pipeline, o.oracle_n, s.pipeline.threads);
      r["k"] = st.k;
      r["truth"] = st.truth.ape;
      r["oracle_se"] = st.truth.mc_se;
      r["completed"] = st.completed;
      r["failures"] = st.failures;
      r["mean_ds"] = st.mean_ds;
      r["mean_naive"] = st.mean_naive;
      r["ds_bias"] = st.mean_ds - st.truth.ape;
      r["naive_bias"] = st.mean_naive - st.truth.ape;
      cells.push_back(st.mean_ds - st.truth.ape);
    }
    runs.push_back(r);
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cerr << "simulate: " << specs.size() << " design(s), " << fixed(elapsed, 1) << " s\n";
  side["runs"] = runs;
  if (o.timing) side["elapsed_seconds"] = elapsed;

  // Table: rows = DGP, columns = beta2 values.
  std::ostringstream csv;
  csv << "dgp";
  for (double b2 : beta2s) csv << ",beta2=" << num(b2);
  csv << '\n';
  std::size_t cell = 0;
  for (DgpModel m : models) {
    csv << to_string(m);
    for (std::size_t b = 0; b < beta2s.size(); ++b) csv << ',' << fixed(cells[cell++], 3);
    csv << '\n';
  }

  if (!o.out.empty()) {
    Options csv_out = o;
    csv_out.out = o.out + ".csv";
    emit(csv_out, csv.str());
    Options json_out = o;
    json_out.out = o.out + ".json";
    emit(json_out, side.dump(2) + "\n");
    return 0;
  }
  emit(o, o.format == "json" ? side.dump(2) + "\n" : csv.str());
  return 0;
}

void add_common(CLI::App* app, Options& o) {
  app->add_option("--config", o.config, "JSON configuration file");
  app->add_option("--set", o.sets, "Override a configuration key (key=value), repeatable");
  app->add_option("--B", o.B, "Bootstrap replicates");
  app->add_option("--seed", o.seed, "RNG seed");
  app->add_option("--threads", o.threads, "Thread cap (0 = OpenMP default)");
  app->add_option("--out", o.out, "Output file (simulate: path prefix for .csv and .json)");
  app->add_option("--format", o.format, "json, csv or table");
}

void add_data(CLI::App* app, Options& o) {
  app->add_option("--input", o.input, "Long-format CSV");
  app->add_option("--sparse", o.sparse, "Sparse triplets doc,col,value");
  app->add_option("--labels", o.labels, "Labels doc,cluster,y for --sparse");
  app->add_option("--sparse-p", o.sparse_p, "Declared covariate count for --sparse (0 = infer)");
  app->add_flag("--intercept", o.intercept, "Prepend an intercept column to a sparse design");
  app->add_option("--cluster-col", o.cluster_col, "Cluster column name");
  app->add_option("--outcome-col", o.outcome_col, "Outcome column name");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Post-double-selection average partial effects for high-dimensional clustered Logit"};
  app.require_subcommand(1);
  Options o;

  auto* fit = app.add_subcommand("fit", "Lasso Logit with data-driven loadings and post-lasso refit");
  add_common(fit, o);
  add_data(fit, o);

  auto* ape = app.add_subcommand("ape", "Post-double-selection APE estimates");
  add_common(ape, o);
  add_data(ape, o);
  ape->add_option("--targets", o.targets, "Comma-separated column names or 0-based indices");

  for (const char* name : {"test", "ci"}) {
    auto* sub = app.add_subcommand(name, std::string(name) == "test" ? "Max-statistic test via multiplier cluster bootstrap"
                                                                  : "Simultaneous confidence intervals");
    add_common(sub, o);
    add_data(sub, o);
    sub->add_option("--targets", o.targets, "Comma-separated column names or 0-based indices");
    sub->add_option("--nulls", o.nulls, "Null values on the alpha scale (default zeros)");
    sub->add_option("--level,--levels", o.levels, "Significance level(s), comma-separated");
  }

  auto* sim = app.add_subcommand("simulate", "Monte Carlo coverage and debiasing studies");
  add_common(sim, o);
  sim->add_option("--dgp", o.dgp, "M1..M10 or LD, comma-separated");
  sim->add_option("--study", o.study, "coverage or debias");
  sim->add_option("--beta2", o.beta2, "Second coefficient(s), comma-separated");
  sim->add_option("--G0", o.G0, "Nominal clusters");
  sim->add_option("--n", o.n, "Observations");
  sim->add_option("--p", o.p, "Covariates including the intercept");
  sim->add_flag("--scaled", o.scaled, "p = 1.5 G0 and n = 2.5 G0");
  sim->add_option("--targets", o.targets, "0-based target columns (default 1)");
  sim->add_option("--reps", o.reps, "Replications");
  sim->add_option("--level,--levels", o.levels, "Significance level");
  sim->add_flag("--studentize", o.studentize, "Studentized instead of unnormalized intervals");
  sim->add_option("--oracle-n", o.oracle_n, "Draws for the true APE");
  sim->add_flag("--dry-run", o.dry_run, "Print the resolved specification and exit");
  sim->add_flag("--timing", o.timing, "Record wall-clock time in the JSON sidecar");
  sim->add_option("--emit-data", o.emit_data, "Write replication 0 as a long-format CSV and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return 2;
  }

  try {
    if (fit->parsed()) return cmd_fit(o);
    if (ape->parsed()) return cmd_ape(o);
    if (app.got_subcommand("test")) return cmd_inference(o, "test");
    if (app.got_subcommand("ci")) return cmd_inference(o, "ci");
    if (sim->parsed()) {
      if (!o.levels.empty()) {
        const auto lv = parse_levels(o.levels, 0.05);
        o.sets.push_back("bootstrap.level=" + num(lv.front()));
      }
      return cmd_simulate(o);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
