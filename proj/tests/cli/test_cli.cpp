#include "pdsape/ape.hpp"
#include "pdsape/data.hpp"

#include "tempdir.hpp"

#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <sstream>
#include <string>

#ifndef PDSAPE_CLI
#error "PDSAPE_CLI must name the CLI binary"
#endif

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + std::string(PDSAPE_CLI) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

Run run_stderr(const std::string& args) {
  const std::string cmd = std::string(PDSAPE_CLI) + " " + args + " 2>&1 >/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

// LD-scale data written by the CLI itself.
struct Fixture {
  testutil::TempDir dir;
  std::string csv;
  Fixture() : csv((dir / "ld.csv").string()) {
    REQUIRE(run("simulate --dgp LD --seed 7 --emit-data " + csv).code == 0);
  }
};

}  // namespace

TEST_CASE("ape output is byte-identical across runs and thread counts") {
  Fixture fx;
  const std::string args = "ape --input " + fx.csv + " --targets x2 --seed 7";
  auto a = run(args);
  auto b = run(args);
  auto c = run(args + " --threads 1");
  auto d = run(args + " --threads 3");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out == c.out);
  CHECK(a.out == d.out);
}

TEST_CASE("ape values equal the library call bit for bit") {
  Fixture fx;
  auto r = run("ape --input " + fx.csv + " --targets x2,x3,1 --seed 7");
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  auto ds = pdsape::load_long_csv(fx.csv);
  std::vector<pdsape::Index> targets{1, 2};
  auto lib = pdsape::run_pipeline(ds, targets);
  REQUIRE(j["results"].size() == 2);  // "x2" and "1" name the same column
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(j["results"][i]["alpha_tilde"].get<double>() == lib.results[i].alpha_tilde);
    CHECK(j["results"][i]["sigma_tilde"].get<double>() == lib.results[i].sigma_tilde);
  }
}

TEST_CASE("unknown target column exits 2 and names it") {
  Fixture fx;
  auto r = run_stderr("ape --input " + fx.csv + " --targets nope");
  CHECK(r.code == 2);
  CHECK(r.out.find("nope") != std::string::npos);
  CHECK(r.out.find("x10") != std::string::npos);
}

TEST_CASE("test: three levels, zero nulls, reject equals T > c_a") {
  Fixture fx;
  auto r = run("test --input " + fx.csv + " --targets x2,x3 --levels 0.10,0.05,0.01 --B 200 --seed 3");
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["nulls"] == nlohmann::json::array({0.0, 0.0}));
  REQUIRE(j["levels"].size() == 3);
  const double T = j["T"].get<double>();
  double prev = -1.0;
  for (const auto& lv : j["levels"]) {
    CHECK(lv["reject"].get<bool>() == (T > lv["c_a"].get<double>()));
    CHECK(lv["c_a"].get<double>() >= prev);
    prev = lv["c_a"].get<double>();
  }
  auto t = run("test --input " + fx.csv + " --targets x2 --levels 0.10,0.05,0.01 --B 200 --seed 3 --format table");
  REQUIRE(t.code == 0);
  int rows = 0;
  std::istringstream lines(t.out);
  for (std::string line; std::getline(lines, line);)
    if (line.find("%  ") != std::string::npos) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("ci intervals contain the estimate") {
  Fixture fx;
  auto r = run("ci --input " + fx.csv + " --targets x2 --B 100 --seed 1");
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  const double a = j["results"][0]["alpha_tilde"].get<double>();
  CHECK(j["intervals"][0]["lower"].get<double>() <= a);
  CHECK(j["intervals"][0]["upper"].get<double>() >= a);
}

TEST_CASE("configuration precedence through the CLI") {
  Fixture fx;
  auto cfg = fx.dir.file("c.json", R"({"bootstrap": {"B": 40}})");
  auto base = "ape --input " + fx.csv + " --targets x2 --config " + cfg.string();
  auto file_only = nlohmann::json::parse(run(base).out);
  CHECK(file_only["config"]["bootstrap"]["B"] == 40);
  auto env = nlohmann::json::parse(run(base, "PDSAPE_BOOTSTRAP_B=50").out);
  CHECK(env["config"]["bootstrap"]["B"] == 50);
  auto flag = nlohmann::json::parse(run(base + " --B 60 --set penalty.c=1.2", "PDSAPE_BOOTSTRAP_B=50").out);
  CHECK(flag["config"]["bootstrap"]["B"] == 60);
  CHECK(flag["config"]["penalty"]["c"] == 1.2);
}

TEST_CASE("usage and input errors exit 2") {
  CHECK(run("simulate --dgp M11 --reps 1").code == 2);
  CHECK(run("ape --input /nonexistent.csv --targets 1").code == 2);
  CHECK(run("ape").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("ape --set penalty.bogus=1 --input x.csv").code == 2);
  CHECK(run("--help").code == 0);
}

TEST_CASE("numerical failure exits 1") {
  testutil::TempDir dir;
  // x separates y perfectly
  auto f = dir.file("sep.csv", "cluster,y,x\na,0,-3\nb,0,-2\nc,0,-1\nd,1,1\ne,1,2\nf,1,3\n");
  auto r = run("ape --input " + f.string() + " --targets x --set penalty.lambda_scale=0");
  CHECK(r.code == 1);
}

TEST_CASE("simulate smoke run and determinism of its report") {
  testutil::TempDir dir;
  const std::string args = "simulate --dgp M1 --reps 1 --B 1 --G0 20 --n 50 --p 10 --oracle-n 20000 --seed 5";
  auto a = run(args + " --out " + (dir / "a").string());
  auto b = run(args + " --threads 2 --out " + (dir / "b").string());
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(testutil::slurp(dir / "a.csv") == testutil::slurp(dir / "b.csv"));
  CHECK(testutil::slurp(dir / "a.json") == testutil::slurp(dir / "b.json"));
  auto j = nlohmann::json::parse(testutil::slurp(dir / "a.json"));
  CHECK(j["command"] == "simulate");
}
