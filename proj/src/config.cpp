#include "pdsape/config.hpp"

#include "pdsape/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>

namespace pdsape {

namespace {

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, std::string v) {
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

std::string scalar_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v.get<double>());
    return std::string(buf, ptr);
  }
  if (v.is_null()) return "";
  throw ConfigError("configuration values must be scalars");
}

void flatten(const nlohmann::json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object())
      flatten(*it, key, out);
    else
      out.emplace_back(key, scalar_text(*it));
  }
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "penalty.c",         "penalty.gamma",        "penalty.m_bar",  "penalty.penalize_intercept",
      "penalty.lambda_scale", "solver.tol",        "solver.max_outer", "solver.max_sweeps",
      "newton.max_iter",   "newton.separation_cap", "variance.use_beta_tilde_k", "bootstrap.B",
      "bootstrap.level",   "bootstrap.studentize", "bootstrap.seed", "threads"};
  return keys;
}

void set_key(Settings& s, const std::string& key, const std::string& value) {
  auto& pen = s.pipeline.penalty;
  if (key == "penalty.c")
    pen.c = parse_double(key, value);
  else if (key == "penalty.gamma")
    pen.gamma = value.empty() ? std::nullopt : std::optional<double>(parse_double(key, value));
  else if (key == "penalty.m_bar")
    pen.m_bar = static_cast<int>(parse_int(key, value));
  else if (key == "penalty.penalize_intercept")
    pen.penalize_intercept = parse_bool(key, value);
  else if (key == "penalty.lambda_scale")
    pen.lambda_scale = parse_double(key, value);
  else if (key == "solver.tol")
    s.pipeline.lasso.tol = parse_double(key, value);
  else if (key == "solver.max_outer")
    s.pipeline.lasso.max_outer = static_cast<int>(parse_int(key, value));
  else if (key == "solver.max_sweeps")
    s.pipeline.lasso.max_sweeps = static_cast<int>(parse_int(key, value));
  else if (key == "newton.max_iter")
    s.pipeline.newton.max_iter = static_cast<int>(parse_int(key, value));
  else if (key == "newton.separation_cap")
    s.pipeline.newton.separation_cap = parse_double(key, value);
  else if (key == "variance.use_beta_tilde_k")
    s.pipeline.use_beta_tilde_k = parse_bool(key, value);
  else if (key == "bootstrap.B")
    s.bootstrap.B = static_cast<int>(parse_int(key, value));
  else if (key == "bootstrap.level")
    s.bootstrap.level = parse_double(key, value);
  else if (key == "bootstrap.studentize")
    s.bootstrap.studentize = parse_bool(key, value);
  else if (key == "bootstrap.seed")
    s.bootstrap.seed = static_cast<std::uint64_t>(parse_int(key, value));
  else if (key == "threads")
    s.pipeline.threads = s.bootstrap.threads = static_cast<int>(parse_int(key, value));
  else
    throw ConfigError("unknown configuration key '" + key + "'");
  if (s.pipeline.lasso.tol <= 0.0 || s.pipeline.lasso.max_outer < 1 || s.pipeline.lasso.max_sweeps < 1)
    throw ConfigError(key + ": solver settings must be positive");
  if (s.pipeline.threads < 0) throw ConfigError("threads must be nonnegative");
}

void apply_json(Settings& s, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  std::vector<std::pair<std::string, std::string>> entries;
  flatten(j, "", entries);
  for (const auto& [k, v] : entries) set_key(s, k, v);
}

void apply_file(Settings& s, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed configuration file " + path.string() + ": " + e.what());
  }
  apply_json(s, j);
}

std::string env_name(const std::string& key) {
  std::string out = "PDSAPE_";
  for (char c : key) out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

void apply_env(Settings& s, const EnvLookup& lookup) {
  for (const auto& key : config_keys()) {
    const std::string name = env_name(key);
    std::optional<std::string> v;
    if (lookup) {
      v = lookup(name);
    } else if (const char* raw = std::getenv(name.c_str())) {
      v = raw;
    }
    if (v) set_key(s, key, *v);
  }
}

nlohmann::json to_json(const Settings& s) {
  const auto& pen = s.pipeline.penalty;
  nlohmann::json j;
  j["penalty"] = {{"c", pen.c},
                  {"gamma", pen.gamma ? nlohmann::json(*pen.gamma) : nlohmann::json(nullptr)},
                  {"m_bar", pen.m_bar},
                  {"penalize_intercept", pen.penalize_intercept},
                  {"lambda_scale", pen.lambda_scale}};
  j["solver"] = {{"tol", s.pipeline.lasso.tol},
                 {"max_outer", s.pipeline.lasso.max_outer},
                 {"max_sweeps", s.pipeline.lasso.max_sweeps}};
  j["newton"] = {{"max_iter", s.pipeline.newton.max_iter}, {"separation_cap", s.pipeline.newton.separation_cap}};
  j["variance"] = {{"use_beta_tilde_k", s.pipeline.use_beta_tilde_k}};
  j["bootstrap"] = {{"B", s.bootstrap.B},
                    {"level", s.bootstrap.level},
                    {"studentize", s.bootstrap.studentize},
                    {"seed", s.bootstrap.seed}};
  return j;
}

}  // namespace pdsape
