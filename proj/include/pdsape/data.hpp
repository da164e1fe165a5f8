#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace pdsape {

using Index = Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using SparseColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

/// n x p design stored either dense (column-major) or column-compressed.
///
/// All column kernels walk rows in increasing order and skip nothing in the
/// dense case, so a sparse and a dense copy of the same matrix produce the
/// same floating point sums (zero terms do not perturb a running sum).
class Design {
 public:
  Design() = default;
  explicit Design(MatrixXd dense);
  explicit Design(SparseColMatrix sparse);

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  bool is_sparse() const noexcept { return std::holds_alternative<SparseColMatrix>(storage_); }

  double at(Index i, Index j) const;

  /// sum_i x_ij v_i
  double col_dot(Index j, const VectorXd& v) const;
  /// sum_i w_i x_ij v_i
  double col_wdot(Index j, const VectorXd& w, const VectorXd& v) const;
  /// sum_i w_i x_ij^2
  double col_wsq(Index j, const VectorXd& w) const;
  /// out += a * x_j
  void col_axpy(Index j, double a, VectorXd& out) const;
  /// max_i |s_i x_ij|
  double col_scaled_absmax(Index j, const VectorXd& s) const;

  /// Calls f(row, value) for every stored entry of column j in row order.
  template <class F>
  void visit_col(Index j, F&& f) const {
    if (const auto* d = std::get_if<MatrixXd>(&storage_)) {
      const double* c = d->col(j).data();
      for (Index i = 0; i < rows_; ++i) f(i, c[i]);
    } else {
      for (SparseColMatrix::InnerIterator it(std::get<SparseColMatrix>(storage_), j); it; ++it)
        f(it.index(), it.value());
    }
  }

  VectorXd col(Index j) const;
  /// X * beta, visiting only the nonzero entries of beta.
  VectorXd multiply(const VectorXd& beta) const;
  /// Dense n x |cols| copy of the selected columns.
  MatrixXd gather(std::span<const Index> cols) const;
  MatrixXd to_dense() const;
  /// Rows reordered by `order` (new row r is old row order[r]).
  Design permute_rows(std::span<const Index> order) const;
  /// Column j removed.
  Design drop_col(Index j) const;

 private:
  std::variant<MatrixXd, SparseColMatrix> storage_;
  Index rows_ = 0;
  Index cols_ = 0;
};

/// One independent sampling unit: an opaque id and its rows.
struct Cluster {
  std::string id;
  std::vector<double> y;
  std::vector<std::vector<double>> x;
};

/// Outcomes and covariates grouped into G clusters; rows of a cluster are
/// contiguous, clusters are stored in first-appearance order.
///
/// Immutable after construction.
class ClusteredDataset {
 public:
  ClusteredDataset() = default;
  /// `cluster_start` has G+1 entries with cluster_start[0] = 0 and
  /// cluster_start[G] = n. Throws on any invariant violation.
  ClusteredDataset(VectorXd y, Design x, std::vector<Index> cluster_start,
                   std::vector<std::string> cluster_ids,
                   std::vector<std::string> column_names = {});

  static ClusteredDataset from_clusters(const std::vector<Cluster>& clusters,
                                        std::vector<std::string> column_names = {});

  Index n() const noexcept { return y_.size(); }
  Index p() const noexcept { return x_.cols(); }
  Index G() const noexcept { return static_cast<Index>(cluster_ids_.size()); }

  const VectorXd& y() const noexcept { return y_; }
  const Design& X() const noexcept { return x_; }
  Index cluster_begin(Index g) const { return cluster_start_[static_cast<std::size_t>(g)]; }
  Index cluster_end(Index g) const { return cluster_start_[static_cast<std::size_t>(g) + 1]; }
  Index cluster_size(Index g) const { return cluster_end(g) - cluster_begin(g); }
  const std::vector<Index>& cluster_starts() const noexcept { return cluster_start_; }
  /// Cluster index of every row.
  const std::vector<Index>& row_cluster() const noexcept { return row_cluster_; }
  const std::vector<std::string>& cluster_ids() const noexcept { return cluster_ids_; }
  const std::vector<std::string>& column_names() const noexcept { return column_names_; }

  /// First column whose entries are all exactly 1, if any.
  std::optional<Index> intercept_column() const noexcept { return intercept_; }
  /// Column index for a header name.
  std::optional<Index> find_column(const std::string& name) const;

  Cluster cluster(Index g) const;
  /// Same data with clusters listed in `order` (a permutation of 0..G-1).
  ClusteredDataset reorder_clusters(std::span<const Index> order) const;
  /// Same data with the design converted to dense / sparse storage.
  ClusteredDataset with_dense_design() const;
  ClusteredDataset with_sparse_design() const;

  /// sum over clusters of (sum over rows in cluster of v_i)^2, divided by G.
  double mean_squared_cluster_sum(const VectorXd& v) const;
  /// (1/G) sum_g (sum_{i in g} v_i x_ij)^2 for column j of the design.
  double mean_squared_cluster_score(Index j, const VectorXd& v) const;

 private:
  void check() const;

  VectorXd y_;
  Design x_;
  std::vector<Index> cluster_start_{0};
  std::vector<Index> row_cluster_;
  std::vector<std::string> cluster_ids_;
  std::vector<std::string> column_names_;
  std::optional<Index> intercept_;
};

// ---------------------------------------------------------------------------
// File ingestion

/// Column roles in a long-format CSV. Empty `covariates` means every column
/// that is neither the cluster nor the outcome column, in header order.
struct LongCsvSchema {
  std::string cluster_column = "cluster";
  std::string outcome_column = "y";
  std::vector<std::string> covariates;
};

ClusteredDataset load_long_csv(const std::filesystem::path& path, const LongCsvSchema& schema = {});
/// Writes cluster, outcome, then covariates with round-trip precision.
void write_long_csv(const ClusteredDataset& ds, const std::filesystem::path& path,
                    const LongCsvSchema& schema = {});

struct SparseTripletOptions {
  /// Declared covariate count (excluding the intercept). 0 infers max col + 1.
  Index p = 0;
  bool intercept = false;
};

/// Triplets `doc,col,value` and labels `doc,cluster,y`. Documents are ordered
/// as in the labels file; cells absent from the triplets are 0.
ClusteredDataset load_sparse_triplets(const std::filesystem::path& rows_path,
                                      const std::filesystem::path& labels_path,
                                      const SparseTripletOptions& options = {});

// ---------------------------------------------------------------------------
// Diagnostics

enum class FindingKind { ConstantColumn, OversizedCluster, DegenerateOutcome };

struct Finding {
  FindingKind kind;
  Index index;  // column, cluster, or -1
  std::string message;
};

struct ValidateOptions {
  Index max_cluster_size = 1000;
};

std::vector<Finding> validate(const ClusteredDataset& ds, const ValidateOptions& options = {});

}  // namespace pdsape
