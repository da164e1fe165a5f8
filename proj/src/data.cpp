#include "pdsape/data.hpp"

#include "pdsape/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <utility>

namespace pdsape {

// ---------------------------------------------------------------------------
// Design

Design::Design(MatrixXd dense)
    : storage_(std::move(dense)) {
  const auto& m = std::get<MatrixXd>(storage_);
  rows_ = m.rows();
  cols_ = m.cols();
}

Design::Design(SparseColMatrix sparse)
    : storage_(std::move(sparse)) {
  auto& m = std::get<SparseColMatrix>(storage_);
  m.makeCompressed();
  rows_ = m.rows();
  cols_ = m.cols();
}

double Design::at(Index i, Index j) const {
  if (const auto* d = std::get_if<MatrixXd>(&storage_)) return (*d)(i, j);
  return std::get<SparseColMatrix>(storage_).coeff(i, j);
}

double Design::col_dot(Index j, const VectorXd& v) const {
  double s = 0.0;
  if (const auto* d = std::get_if<MatrixXd>(&storage_)) {
    const double* c = d->col(j).data();
    for (Index i = 0; i < rows_; ++i) s += c[i] * v[i];
  } else {
    for (SparseColMatrix::InnerIterator it(std::get<SparseColMatrix>(storage_), j); it; ++it)
      s += it.value() * v[it.index()];
  }
  return s;
}

double Design::col_wdot(Index j, const VectorXd& w, const VectorXd& v) const {
  double s = 0.0;
  if (const auto* d = std::get_if<MatrixXd>(&storage_)) {
    const double* c = d->col(j).data();
    for (Index i = 0; i < rows_; ++i) s += w[i] * c[i] * v[i];
  } else {
    for (SparseColMatrix::InnerIterator it(std::get<SparseColMatrix>(storage_), j); it; ++it)
      s += w[it.index()] * it.value() * v[it.index()];
  }
  return s;
}

double Design::col_wsq(Index j, const VectorXd& w) const {
  double s = 0.0;
  if (const auto* d = std::get_if<MatrixXd>(&storage_)) {
    const double* c = d->col(j).data();
    for (Index i = 0; i < rows_; ++i) s += w[i] * c[i] * c[i];
  } else {
    for (SparseColMatrix::InnerIterator it(std::get<SparseColMatrix>(storage_), j); it; ++it)
      s += w[it.index()] * it.value() * it.value();
  }
  return s;
}

void Design::col_axpy(Index j, double a, VectorXd& out) const {
  if (a == 0.0) return;
  if (const auto* d = std::get_if<MatrixXd>(&storage_)) {
    const double* c = d->col(j).data();
    for (Index i = 0; i < rows_; ++i) out[i] += a * c[i];
  } else {
    for (SparseColMatrix::InnerIterator it(std::get<SparseColMatrix>(storage_), j); it; ++it)
      out[it.index()] += a * it.value();
  }
}

double Design::col_scaled_absmax(Index j, const VectorXd& s) const {
  double m = 0.0;
  if (const auto* d = std::get_if<MatrixXd>(&storage_)) {
    const double* c = d->col(j).data();
    for (Index i = 0; i < rows_; ++i) m = std::max(m, std::abs(s[i] * c[i]));
  } else {
    for (SparseColMatrix::InnerIterator it(std::get<SparseColMatrix>(storage_), j); it; ++it)
      m = std::max(m, std::abs(s[it.index()] * it.value()));
  }
  return m;
}

VectorXd Design::col(Index j) const {
  VectorXd out = VectorXd::Zero(rows_);
  col_axpy(j, 1.0, out);
  return out;
}

VectorXd Design::multiply(const VectorXd& beta) const {
  VectorXd out = VectorXd::Zero(rows_);
  for (Index j = 0; j < cols_; ++j) col_axpy(j, beta[j], out);
  return out;
}

MatrixXd Design::gather(std::span<const Index> cols) const {
  MatrixXd out = MatrixXd::Zero(rows_, static_cast<Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    VectorXd column = VectorXd::Zero(rows_);
    col_axpy(cols[c], 1.0, column);
    out.col(static_cast<Index>(c)) = column;
  }
  return out;
}

MatrixXd Design::to_dense() const {
  if (const auto* d = std::get_if<MatrixXd>(&storage_)) return *d;
  return MatrixXd(std::get<SparseColMatrix>(storage_));
}

Design Design::permute_rows(std::span<const Index> order) const {
  if (const auto* d = std::get_if<MatrixXd>(&storage_)) {
    MatrixXd out(static_cast<Index>(order.size()), cols_);
    for (std::size_t r = 0; r < order.size(); ++r) out.row(static_cast<Index>(r)) = d->row(order[r]);
    return Design(std::move(out));
  }
  const auto& s = std::get<SparseColMatrix>(storage_);
  std::vector<Index> inverse(static_cast<std::size_t>(rows_));
  for (std::size_t r = 0; r < order.size(); ++r) inverse[static_cast<std::size_t>(order[r])] = static_cast<Index>(r);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(s.nonZeros()));
  for (Index j = 0; j < cols_; ++j)
    for (SparseColMatrix::InnerIterator it(s, j); it; ++it)
      trip.emplace_back(inverse[static_cast<std::size_t>(it.index())], j, it.value());
  SparseColMatrix out(static_cast<Index>(order.size()), cols_);
  out.setFromTriplets(trip.begin(), trip.end());
  return Design(std::move(out));
}

Design Design::drop_col(Index j) const {
  if (const auto* d = std::get_if<MatrixXd>(&storage_)) {
    MatrixXd out(rows_, cols_ - 1);
    out.leftCols(j) = d->leftCols(j);
    out.rightCols(cols_ - 1 - j) = d->rightCols(cols_ - 1 - j);
    return Design(std::move(out));
  }
  const auto& s = std::get<SparseColMatrix>(storage_);
  std::vector<Eigen::Triplet<double>> trip;
  for (Index c = 0; c < cols_; ++c) {
    if (c == j) continue;
    const Index target = c < j ? c : c - 1;
    for (SparseColMatrix::InnerIterator it(s, c); it; ++it) trip.emplace_back(it.index(), target, it.value());
  }
  SparseColMatrix out(rows_, cols_ - 1);
  out.setFromTriplets(trip.begin(), trip.end());
  return Design(std::move(out));
}

// ---------------------------------------------------------------------------
// ClusteredDataset

ClusteredDataset::ClusteredDataset(VectorXd y, Design x, std::vector<Index> cluster_start,
                                   std::vector<std::string> cluster_ids,
                                   std::vector<std::string> column_names)
    : y_(std::move(y)),
      x_(std::move(x)),
      cluster_start_(std::move(cluster_start)),
      cluster_ids_(std::move(cluster_ids)),
      column_names_(std::move(column_names)) {
  if (column_names_.empty()) {
    column_names_.reserve(static_cast<std::size_t>(x_.cols()));
    for (Index j = 0; j < x_.cols(); ++j) column_names_.push_back("x" + std::to_string(j + 1));
  }
  check();
  row_cluster_.resize(static_cast<std::size_t>(n()));
  for (Index g = 0; g < G(); ++g)
    for (Index i = cluster_begin(g); i < cluster_end(g); ++i) row_cluster_[static_cast<std::size_t>(i)] = g;
  for (Index j = 0; j < x_.cols(); ++j) {
    bool all_one = true;
    for (Index i = 0; i < x_.rows() && all_one; ++i) all_one = x_.at(i, j) == 1.0;
    if (all_one) {
      intercept_ = j;
      break;
    }
  }
}

void ClusteredDataset::check() const {
  const auto G = cluster_ids_.size();
  if (G < 1) throw ShapeError("dataset needs at least one cluster");
  if (cluster_start_.size() != G + 1) throw ShapeError("cluster offsets do not match cluster count");
  if (cluster_start_.front() != 0 || cluster_start_.back() != y_.size())
    throw ShapeError("cluster offsets do not cover all observations");
  for (std::size_t g = 0; g < G; ++g)
    if (cluster_start_[g + 1] <= cluster_start_[g])
      throw ShapeError("cluster '" + cluster_ids_[g] + "' is empty");
  if (x_.rows() != y_.size()) throw ShapeError("design rows do not match outcome length");
  if (static_cast<Index>(column_names_.size()) != x_.cols())
    throw ShapeError("column name count does not match covariate count");
  for (Index i = 0; i < y_.size(); ++i)
    if (!(y_[i] >= 0.0 && y_[i] <= 1.0))
      throw DomainError("outcome at row " + std::to_string(i) + " is outside [0,1]");
}

ClusteredDataset ClusteredDataset::from_clusters(const std::vector<Cluster>& clusters,
                                                 std::vector<std::string> column_names) {
  if (clusters.empty()) throw ShapeError("dataset needs at least one cluster");
  std::size_t p = 0;
  bool have_p = false;
  std::size_t n = 0;
  for (const auto& c : clusters) {
    if (c.y.empty()) throw ShapeError("cluster '" + c.id + "' is empty");
    if (c.y.size() != c.x.size()) throw ShapeError("cluster '" + c.id + "' has mismatched rows");
    for (const auto& row : c.x) {
      if (!have_p) {
        p = row.size();
        have_p = true;
      } else if (row.size() != p) {
        throw ShapeError("cluster '" + c.id + "' has a ragged covariate row");
      }
    }
    n += c.y.size();
  }
  VectorXd y(static_cast<Index>(n));
  MatrixXd x(static_cast<Index>(n), static_cast<Index>(p));
  std::vector<Index> starts{0};
  std::vector<std::string> ids;
  Index r = 0;
  for (const auto& c : clusters) {
    for (std::size_t i = 0; i < c.y.size(); ++i, ++r) {
      y[r] = c.y[i];
      for (std::size_t j = 0; j < p; ++j) x(r, static_cast<Index>(j)) = c.x[i][j];
    }
    starts.push_back(r);
    ids.push_back(c.id);
  }
  return ClusteredDataset(std::move(y), Design(std::move(x)), std::move(starts), std::move(ids),
                          std::move(column_names));
}

std::optional<Index> ClusteredDataset::find_column(const std::string& name) const {
  auto it = std::find(column_names_.begin(), column_names_.end(), name);
  if (it == column_names_.end()) return std::nullopt;
  return static_cast<Index>(it - column_names_.begin());
}

Cluster ClusteredDataset::cluster(Index g) const {
  Cluster c;
  c.id = cluster_ids_[static_cast<std::size_t>(g)];
  for (Index i = cluster_begin(g); i < cluster_end(g); ++i) {
    c.y.push_back(y_[i]);
    std::vector<double> row(static_cast<std::size_t>(p()));
    for (Index j = 0; j < p(); ++j) row[static_cast<std::size_t>(j)] = x_.at(i, j);
    c.x.push_back(std::move(row));
  }
  return c;
}

ClusteredDataset ClusteredDataset::reorder_clusters(std::span<const Index> order) const {
  if (static_cast<Index>(order.size()) != G()) throw ShapeError("cluster order must list every cluster");
  std::vector<Index> rows;
  rows.reserve(static_cast<std::size_t>(n()));
  std::vector<Index> starts{0};
  std::vector<std::string> ids;
  for (Index g : order) {
    for (Index i = cluster_begin(g); i < cluster_end(g); ++i) rows.push_back(i);
    starts.push_back(static_cast<Index>(rows.size()));
    ids.push_back(cluster_ids_[static_cast<std::size_t>(g)]);
  }
  VectorXd y(n());
  for (std::size_t r = 0; r < rows.size(); ++r) y[static_cast<Index>(r)] = y_[rows[r]];
  return ClusteredDataset(std::move(y), x_.permute_rows(rows), std::move(starts), std::move(ids),
                          column_names_);
}

ClusteredDataset ClusteredDataset::with_dense_design() const {
  return ClusteredDataset(y_, Design(x_.to_dense()), cluster_start_, cluster_ids_, column_names_);
}

ClusteredDataset ClusteredDataset::with_sparse_design() const {
  SparseColMatrix s = x_.to_dense().sparseView(0.0, 0.0);
  return ClusteredDataset(y_, Design(std::move(s)), cluster_start_, cluster_ids_, column_names_);
}

double ClusteredDataset::mean_squared_cluster_sum(const VectorXd& v) const {
  double total = 0.0;
  for (Index g = 0; g < G(); ++g) {
    double s = 0.0;
    for (Index i = cluster_begin(g); i < cluster_end(g); ++i) s += v[i];
    total += s * s;
  }
  return total / static_cast<double>(G());
}

double ClusteredDataset::mean_squared_cluster_score(Index j, const VectorXd& v) const {
  // Rows of a cluster are contiguous, so a running sum flushed on cluster
  // change visits each touched cluster once.
  double total = 0.0;
  double current = 0.0;
  Index current_g = -1;
  x_.visit_col(j, [&](Index i, double x) {
    const Index g = row_cluster_[static_cast<std::size_t>(i)];
    if (g != current_g) {
      total += current * current;
      current = 0.0;
      current_g = g;
    }
    current += v[i] * x;
  });
  total += current * current;
  return total / static_cast<double>(G());
}

// ---------------------------------------------------------------------------
// Text parsing helpers

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.emplace_back(trim(cur));
  return out;
}

double parse_double(const std::string& field, std::size_t line, const std::string& what) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || field.empty())
    throw ParseError("cannot parse " + what + " '" + field + "'", line);
  return v;
}

long long parse_int(const std::string& field, std::size_t line, const std::string& what) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty())
    throw ParseError("cannot parse " + what + " '" + field + "'", line);
  return v;
}

bool blank(std::string_view line) { return trim(line).empty(); }

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'", 0);
  return in;
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

// ---------------------------------------------------------------------------
// Long CSV

ClusteredDataset load_long_csv(const std::filesystem::path& path, const LongCsvSchema& schema) {
  auto in = open_or_throw(path);
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (blank(line)) continue;
    header = split_csv(line);
    break;
  }
  if (header.empty()) throw ParseError("missing header row", lineno);

  auto locate = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError("header has no column '" + name + "'", lineno);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t cluster_pos = locate(schema.cluster_column);
  const std::size_t outcome_pos = locate(schema.outcome_column);
  std::vector<std::size_t> cov_pos;
  std::vector<std::string> names;
  if (schema.covariates.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == cluster_pos || c == outcome_pos) continue;
      cov_pos.push_back(c);
      names.push_back(header[c]);
    }
  } else {
    for (const auto& name : schema.covariates) {
      cov_pos.push_back(locate(name));
      names.push_back(name);
    }
  }

  std::unordered_map<std::string, std::size_t> cluster_index;
  std::vector<Cluster> clusters;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    const auto fields = split_csv(line);
    if (fields.size() != header.size())
      throw ShapeError("line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                       " fields, found " + std::to_string(fields.size()));
    const double y = parse_double(fields[outcome_pos], lineno, "outcome");
    if (!(y >= 0.0 && y <= 1.0))
      throw DomainError("line " + std::to_string(lineno) + ": outcome " + fields[outcome_pos] +
                        " is outside [0,1]");
    std::vector<double> x;
    x.reserve(cov_pos.size());
    for (std::size_t c : cov_pos) x.push_back(parse_double(fields[c], lineno, "covariate '" + header[c] + "'"));
    const auto& id = fields[cluster_pos];
    auto [it, inserted] = cluster_index.try_emplace(id, clusters.size());
    if (inserted) clusters.push_back(Cluster{id, {}, {}});
    auto& cl = clusters[it->second];
    cl.y.push_back(y);
    cl.x.push_back(std::move(x));
  }
  if (clusters.empty()) throw ParseError("file has a header but no data rows", lineno);
  return ClusteredDataset::from_clusters(clusters, std::move(names));
}

void write_long_csv(const ClusteredDataset& ds, const std::filesystem::path& path, const LongCsvSchema& schema) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path.string() + "'", 0);
  out << schema.cluster_column << ',' << schema.outcome_column;
  for (const auto& name : ds.column_names()) out << ',' << name;
  out << '\n';
  for (Index g = 0; g < ds.G(); ++g) {
    for (Index i = ds.cluster_begin(g); i < ds.cluster_end(g); ++i) {
      out << ds.cluster_ids()[static_cast<std::size_t>(g)] << ',' << format_double(ds.y()[i]);
      for (Index j = 0; j < ds.p(); ++j) out << ',' << format_double(ds.X().at(i, j));
      out << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Sparse triplets

namespace {

bool is_header(const std::vector<std::string>& fields) {
  for (const auto& f : fields) {
    double v;
    auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc() || ptr != f.data() + f.size()) return true;
  }
  return false;
}

}  // namespace

ClusteredDataset load_sparse_triplets(const std::filesystem::path& rows_path,
                                      const std::filesystem::path& labels_path,
                                      const SparseTripletOptions& options) {
  // Labels: document order and cluster membership.
  struct Label {
    long long doc;
    std::string cluster;
    double y;
  };
  std::vector<Label> labels;
  std::unordered_map<long long, std::size_t> doc_pos;
  {
    auto in = open_or_throw(labels_path);
    std::string line;
    std::size_t lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
      ++lineno;
      if (blank(line)) continue;
      auto f = split_csv(line);
      if (first && is_header(f) && f.size() == 3 && f[0] == "doc") {
        first = false;
        continue;
      }
      first = false;
      if (f.size() != 3) throw ShapeError("labels line " + std::to_string(lineno) + ": expected doc,cluster,y");
      const long long doc = parse_int(f[0], lineno, "document index");
      const double y = parse_double(f[2], lineno, "outcome");
      if (!(y >= 0.0 && y <= 1.0))
        throw DomainError("labels line " + std::to_string(lineno) + ": outcome " + f[2] + " is outside [0,1]");
      if (!doc_pos.try_emplace(doc, labels.size()).second)
        throw ConflictError("labels line " + std::to_string(lineno) + ": document " + f[0] + " labelled twice");
      labels.push_back(Label{doc, f[1], y});
    }
  }
  if (labels.empty()) throw ParseError("labels file has no documents", 0);

  struct Cell {
    std::size_t doc;
    Index col;
    double value;
  };
  std::vector<Cell> cells;
  Index max_col = -1;
  {
    auto in = open_or_throw(rows_path);
    std::string line;
    std::size_t lineno = 0;
    bool first = true;
    std::set<std::pair<std::size_t, Index>> seen;
    while (std::getline(in, line)) {
      ++lineno;
      if (blank(line)) continue;
      auto f = split_csv(line);
      if (first && f.size() == 3 && f[0] == "doc") {
        first = false;
        continue;
      }
      first = false;
      if (f.size() != 3) throw ShapeError("triplet line " + std::to_string(lineno) + ": expected doc,col,value");
      const long long doc = parse_int(f[0], lineno, "document index");
      const long long col = parse_int(f[1], lineno, "column index");
      const double value = parse_double(f[2], lineno, "value");
      if (col < 0) throw ShapeError("triplet line " + std::to_string(lineno) + ": negative column index");
      if (options.p > 0 && col >= options.p)
        throw ShapeError("triplet line " + std::to_string(lineno) + ": column " + f[1] + " >= declared p " +
                         std::to_string(options.p));
      auto it = doc_pos.find(doc);
      if (it == doc_pos.end())
        throw ConsistencyError("triplet line " + std::to_string(lineno) + ": document " + f[0] +
                               " has no label");
      if (!seen.emplace(it->second, static_cast<Index>(col)).second)
        throw ConflictError("triplet line " + std::to_string(lineno) + ": duplicate cell (" + f[0] + "," + f[1] +
                            ")");
      max_col = std::max<Index>(max_col, static_cast<Index>(col));
      cells.push_back(Cell{it->second, static_cast<Index>(col), value});
    }
  }
  const Index p_words = options.p > 0 ? options.p : max_col + 1;
  if (p_words + (options.intercept ? 1 : 0) < 1) throw ShapeError("design has no columns");

  // Rows grouped by cluster in first-appearance order, document order kept within a cluster.
  std::vector<std::string> ids;
  std::unordered_map<std::string, std::size_t> cluster_of;
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t d = 0; d < labels.size(); ++d) {
    auto [it, inserted] = cluster_of.try_emplace(labels[d].cluster, ids.size());
    if (inserted) {
      ids.push_back(labels[d].cluster);
      members.emplace_back();
    }
    members[it->second].push_back(d);
  }
  std::vector<Index> row_of(labels.size());
  std::vector<Index> starts{0};
  VectorXd y(static_cast<Index>(labels.size()));
  Index r = 0;
  for (const auto& m : members) {
    for (std::size_t d : m) {
      row_of[d] = r;
      y[r] = labels[d].y;
      ++r;
    }
    starts.push_back(r);
  }

  const Index offset = options.intercept ? 1 : 0;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(cells.size() + (options.intercept ? labels.size() : 0));
  if (options.intercept)
    for (Index i = 0; i < r; ++i) trip.emplace_back(i, 0, 1.0);
  for (const auto& c : cells)
    if (c.value != 0.0) trip.emplace_back(row_of[c.doc], c.col + offset, c.value);
  SparseColMatrix x(r, p_words + offset);
  x.setFromTriplets(trip.begin(), trip.end());

  std::vector<std::string> names;
  if (options.intercept) names.emplace_back("intercept");
  for (Index j = 0; j < p_words; ++j) names.push_back("w" + std::to_string(j));
  return ClusteredDataset(std::move(y), Design(std::move(x)), std::move(starts), std::move(ids), std::move(names));
}

// ---------------------------------------------------------------------------
// validate

std::vector<Finding> validate(const ClusteredDataset& ds, const ValidateOptions& options) {
  std::vector<Finding> out;
  const auto intercept = ds.intercept_column();
  for (Index j = 0; j < ds.p(); ++j) {
    if (intercept && *intercept == j) continue;
    const double first = ds.X().at(0, j);
    bool constant = true;
    for (Index i = 1; i < ds.n() && constant; ++i) constant = ds.X().at(i, j) == first;
    if (constant)
      out.push_back({FindingKind::ConstantColumn, j,
                     "constant column " + std::to_string(j) + " (" + ds.column_names()[static_cast<std::size_t>(j)] +
                         ")"});
  }
  for (Index g = 0; g < ds.G(); ++g)
    if (ds.cluster_size(g) > options.max_cluster_size)
      out.push_back({FindingKind::OversizedCluster, g,
                     "cluster '" + ds.cluster_ids()[static_cast<std::size_t>(g)] + "' has " +
                         std::to_string(ds.cluster_size(g)) + " rows"});
  const bool all_zero = (ds.y().array() == 0.0).all();
  const bool all_one = (ds.y().array() == 1.0).all();
  if (all_zero || all_one)
    out.push_back({FindingKind::DegenerateOutcome, -1,
                   std::string("degenerate outcome: every y is ") + (all_one ? "1" : "0")});
  return out;
}

}  // namespace pdsape
