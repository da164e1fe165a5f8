#include "pdsape/data.hpp"
#include "pdsape/errors.hpp"
#include "pdsape/simulation.hpp"

#include "oracles.hpp"
#include "tempdir.hpp"

#include <doctest.h>

#include <random>

using namespace pdsape;

TEST_CASE("long csv: counts clusters and rows") {
  testutil::TempDir dir;
  auto f = dir.file("a.csv", "cluster,y,x1\nA,1,0.5\nB,0,1.5\nA,0,-2\n");
  auto ds = load_long_csv(f);
  CHECK(ds.G() == 2);
  CHECK(ds.n() == 3);
  CHECK(ds.p() == 1);
  CHECK(ds.cluster_ids() == std::vector<std::string>{"A", "B"});
  // rows of a cluster stay together, in file order
  CHECK(ds.X().at(0, 0) == 0.5);
  CHECK(ds.X().at(1, 0) == -2.0);
  CHECK(ds.cluster_size(0) == 2);
}

TEST_CASE("long csv: outcome outside [0,1] names the line") {
  testutil::TempDir dir;
  auto f = dir.file("a.csv", "cluster,y,x1\nA,1,0.5\nB,1.5,1\n");
  try {
    load_long_csv(f);
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("long csv: ragged row is a shape error") {
  testutil::TempDir dir;
  auto f = dir.file("a.csv", "cluster,y,x1,x2\nA,1,0.5\n");
  CHECK_THROWS_AS(load_long_csv(f), ShapeError);
}

TEST_CASE("long csv: round trip keeps numbers to 1e-12") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> z;
  std::string text = "cluster,y,a,b,c\n";
  std::vector<std::array<double, 4>> rows;
  for (int i = 0; i < 40; ++i) {
    std::array<double, 4> r{static_cast<double>(i % 2), z(rng) * 1e3, z(rng) * 1e-7, z(rng)};
    rows.push_back(r);
    char buf[256];
    std::snprintf(buf, sizeof buf, "k%d,%.17g,%.17g,%.17g,%.17g\n", i / 4, r[0], r[1], r[2], r[3]);
    text += buf;
  }
  testutil::TempDir dir;
  auto ds = load_long_csv(dir.file("in.csv", text));
  write_long_csv(ds, dir / "out.csv");
  auto back = load_long_csv(dir / "out.csv");
  REQUIRE(back.n() == 40);
  REQUIRE(back.p() == 3);
  CHECK(back.cluster_ids() == ds.cluster_ids());
  for (Index i = 0; i < 40; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    CHECK(back.y()[i] == doctest::Approx(r[0]).epsilon(1e-12));
    for (Index j = 0; j < 3; ++j)
      CHECK(std::abs(back.X().at(i, j) - r[static_cast<std::size_t>(j) + 1]) <=
            1e-12 * std::max(1.0, std::abs(r[static_cast<std::size_t>(j) + 1])));
  }
}

TEST_CASE("sparse triplets: empty triplet file gives zero rows") {
  testutil::TempDir dir;
  auto rows = dir.file("r.csv", "");
  auto labels = dir.file("l.csv", "doc,cluster,y\n0,a,1\n1,b,0\n");
  auto ds = load_sparse_triplets(rows, labels, {3, false});
  CHECK(ds.n() == 2);
  CHECK(ds.p() == 3);
  CHECK(ds.X().to_dense().isZero());

  auto with_icpt = load_sparse_triplets(rows, labels, {3, true});
  CHECK(with_icpt.p() == 4);
  CHECK(with_icpt.intercept_column() == Index{0});
}

TEST_CASE("sparse triplets: unlabeled document is a consistency error") {
  testutil::TempDir dir;
  auto rows = dir.file("r.csv", "0,0,1\n7,1,2\n");
  auto labels = dir.file("l.csv", "0,a,1\n1,b,0\n");
  CHECK_THROWS_AS(load_sparse_triplets(rows, labels), ConsistencyError);
}

TEST_CASE("sparse triplets: duplicate cell is a conflict") {
  testutil::TempDir dir;
  auto rows = dir.file("r.csv", "0,0,1\n0,0,2\n");
  auto labels = dir.file("l.csv", "0,a,1\n");
  CHECK_THROWS_AS(load_sparse_triplets(rows, labels), ConflictError);
}

TEST_CASE("sparse triplets: random 5x4 design matches a dense builder") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3, 3);
  std::bernoulli_distribution keep(0.4);
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(5, 4);
  std::string trip;
  for (int d = 0; d < 5; ++d)
    for (int c = 0; c < 4; ++c)
      if (keep(rng)) {
        dense(d, c) = u(rng);
        char buf[96];
        std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", d, c, dense(d, c));
        trip += buf;
      }
  testutil::TempDir dir;
  // labels listed in document order with one cluster per document
  auto ds = load_sparse_triplets(dir.file("r.csv", trip),
                                 dir.file("l.csv", "0,a,1\n1,b,0\n2,c,1\n3,d,0\n4,e,1\n"), {4, false});
  CHECK(ds.X().is_sparse());
  CHECK((ds.X().to_dense() - dense).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sparse and dense designs give identical column kernels") {
  std::mt19937_64 rng(3);
  auto ds = oracle::random_logit(rng, 10, 3, 4, Eigen::VectorXd::Zero(4));
  auto sp = ds.with_sparse_design();
  Eigen::VectorXd w = Eigen::VectorXd::LinSpaced(ds.n(), 0.1, 0.9);
  for (Index j = 0; j < 4; ++j) {
    CHECK(ds.X().col_wdot(j, w, ds.y()) == sp.X().col_wdot(j, w, sp.y()));
    CHECK(ds.mean_squared_cluster_score(j, w) == sp.mean_squared_cluster_score(j, w));
  }
}

TEST_CASE("validate: constant column and degenerate outcome") {
  Eigen::MatrixXd X(4, 3);
  X << 1, 2, 0.1, 1, 2, 0.5, 1, 2, -1, 1, 2, 3;
  auto ds = oracle::make_dataset(X, Eigen::VectorXd::Ones(4), {0, 0, 1, 1});
  auto f = validate(ds);
  bool constant = false, degenerate = false;
  for (const auto& x : f) {
    constant |= x.kind == FindingKind::ConstantColumn && x.index == 1;
    degenerate |= x.kind == FindingKind::DegenerateOutcome;
    CHECK_FALSE((x.kind == FindingKind::ConstantColumn && x.index == 0));  // intercept is exempt
  }
  CHECK(constant);
  CHECK(degenerate);
}

TEST_CASE("validate: clean simulated M1 draw has no findings") {
  auto ds = simulate_dgp(DgpSpec::make(DgpModel::M1, 0.0, 50, 120, 20, 9));
  CHECK(validate(ds).empty());
}

TEST_CASE("reordering clusters permutes rows consistently") {
  std::mt19937_64 rng(1);
  auto ds = oracle::random_logit(rng, 3, 2, 2, Eigen::VectorXd::Zero(2));
  std::vector<Index> order{2, 0, 1};
  auto r = ds.reorder_clusters(order);
  CHECK(r.cluster_ids()[0] == ds.cluster_ids()[2]);
  CHECK(r.X().at(0, 1) == ds.X().at(4, 1));
  CHECK(r.mean_squared_cluster_sum(r.y()) == doctest::Approx(ds.mean_squared_cluster_sum(ds.y())));
}
