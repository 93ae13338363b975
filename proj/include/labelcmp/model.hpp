#pragma once

// Linear multiclass models, datasets, and their plain-text formats.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace labelcmp {

using Label = int;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// k x d score matrix; row i scores class i. Immutable after construction.
class LinearModel {
 public:
  explicit LinearModel(Matrix weights) : weights_(std::move(weights)) {
    if (weights_.rows() < 2) throw std::invalid_argument("LinearModel: need at least 2 classes");
    if (weights_.cols() < 1) throw std::invalid_argument("LinearModel: dimension must be >= 1");
    if (!weights_.allFinite()) throw std::invalid_argument("LinearModel: non-finite weight");
  }

  static LinearModel zeros(int k, int d) { return LinearModel(Matrix::Zero(k, d)); }

  int k() const { return static_cast<int>(weights_.rows()); }
  int d() const { return static_cast<int>(weights_.cols()); }
  const Matrix& weights() const { return weights_; }
  auto row(Label i) const { return weights_.row(i); }

 private:
  Matrix weights_;
};

/// Score of a single class. Every score in the library goes through here so
/// that argmax and pairwise comparisons agree bit-for-bit.
inline double class_score(const Matrix& w, const Vector& x, Label i) { return w.row(i).dot(x); }

inline Vector scores(const Matrix& w, const Vector& x) {
  Vector s(w.rows());
  for (Eigen::Index i = 0; i < w.rows(); ++i) s[i] = class_score(w, x, static_cast<Label>(i));
  return s;
}

/// Wx. Throws on dimension mismatch.
inline Vector scores(const LinearModel& model, const Vector& x) {
  if (x.size() != model.d()) {
    throw std::invalid_argument("scores: point has dimension " + std::to_string(x.size()) +
                                ", model expects " + std::to_string(model.d()));
  }
  return scores(model.weights(), x);
}

/// Index of the largest entry; ties go to the lowest index.
inline Label argmax_index(const Vector& s) {
  Label best = 0;
  for (Eigen::Index i = 1; i < s.size(); ++i)
    if (s[i] > s[best]) best = static_cast<Label>(i);
  return best;
}

/// Best and runner-up indices, both ranks tie-broken toward the lower index.
inline std::pair<Label, Label> top_two(const Vector& s) {
  Label first = 0;
  Label second = -1;
  for (Eigen::Index i = 1; i < s.size(); ++i) {
    const auto li = static_cast<Label>(i);
    if (s[i] > s[first]) {
      second = first;
      first = li;
    } else if (second < 0 || s[i] > s[second]) {
      second = li;
    }
  }
  return {first, second};
}

/// Labels ordered by descending score, ties by ascending index.
inline std::vector<Label> ranking(const Vector& s) {
  std::vector<Label> order(static_cast<std::size_t>(s.size()));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Label>(i);
  std::stable_sort(order.begin(), order.end(), [&](Label a, Label b) { return s[a] > s[b]; });
  return order;
}

struct Dataset {
  std::vector<Vector> points;
  std::optional<std::vector<Label>> labels;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  int dim() const { return points.empty() ? 0 : static_cast<int>(points.front().size()); }

  /// Throws unless all points are finite with equal dimension and labels lie in [0,k).
  void validate(std::optional<int> k = std::nullopt) const {
    for (std::size_t n = 0; n < points.size(); ++n) {
      if (points[n].size() != points.front().size())
        throw std::invalid_argument("Dataset: ragged point " + std::to_string(n));
      if (!points[n].allFinite())
        throw std::invalid_argument("Dataset: non-finite point " + std::to_string(n));
    }
    if (!labels) return;
    if (labels->size() != points.size()) throw std::invalid_argument("Dataset: label count mismatch");
    for (Label y : *labels)
      if (y < 0 || (k && y >= *k)) throw std::invalid_argument("Dataset: label out of range");
  }
};

// ---------------------------------------------------------------------------
// Text formats
// ---------------------------------------------------------------------------

namespace detail {

inline double parse_double(std::string_view tok, const std::string& where) {
  while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
  while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r'))
    tok.remove_suffix(1);
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size())
    throw std::runtime_error(where + ": cannot parse number '" + std::string(tok) + "'");
  return v;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  return out;
}

}  // namespace detail

/// Header line "k d", then one whitespace-delimited row per class.
inline void write_model(std::ostream& out, const LinearModel& model) {
  out << model.k() << ' ' << model.d() << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (int i = 0; i < model.k(); ++i) {
    for (int c = 0; c < model.d(); ++c) out << (c ? " " : "") << model.weights()(i, c);
    out << '\n';
  }
}

inline LinearModel read_model(std::istream& in) {
  long k = 0, d = 0;
  if (!(in >> k >> d) || k < 2 || d < 1) throw std::runtime_error("read_model: bad 'k d' header");
  Matrix w(k, d);
  for (long i = 0; i < k; ++i)
    for (long c = 0; c < d; ++c) {
      std::string tok;
      if (!(in >> tok)) throw std::runtime_error("read_model: truncated at row " + std::to_string(i));
      w(i, c) = detail::parse_double(tok, "read_model row " + std::to_string(i));
    }
  return LinearModel(std::move(w));
}

inline void save_model(const std::string& path, const LinearModel& model) {
  auto out = detail::open_out(path);
  write_model(out, model);
}

inline LinearModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model: " + path);
  return read_model(in);
}

/// One point per row, comma-delimited. With `has_labels`, the last column is an
/// integer class index. Blank lines and lines starting with '#' are skipped.
inline Dataset read_csv_dataset(std::istream& in, bool has_labels) {
  Dataset ds;
  std::vector<Label> labels;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r" || line.front() == '#') continue;
    const std::string where = "line " + std::to_string(line_no);
    std::vector<std::string_view> cols;
    std::string_view rest(line);
    for (;;) {
      auto pos = rest.find(',');
      cols.push_back(rest.substr(0, pos));
      if (pos == std::string_view::npos) break;
      rest.remove_prefix(pos + 1);
    }
    if (width == 0) width = cols.size();
    if (cols.size() != width)
      throw std::runtime_error(where + ": expected " + std::to_string(width) + " columns, got " +
                               std::to_string(cols.size()));
    const std::size_t nfeat = has_labels ? cols.size() - 1 : cols.size();
    if (nfeat == 0) throw std::runtime_error(where + ": no feature columns");
    Vector x(static_cast<Eigen::Index>(nfeat));
    for (std::size_t c = 0; c < nfeat; ++c) x[static_cast<Eigen::Index>(c)] = detail::parse_double(cols[c], where);
    if (!x.allFinite()) throw std::runtime_error(where + ": non-finite value");
    if (has_labels) {
      const double y = detail::parse_double(cols.back(), where);
      if (y < 0 || y != std::floor(y) || y > std::numeric_limits<Label>::max())
        throw std::runtime_error(where + ": label must be a non-negative integer");
      labels.push_back(static_cast<Label>(y));
    }
    ds.points.push_back(std::move(x));
  }
  if (has_labels) ds.labels = std::move(labels);
  return ds;
}

inline Dataset load_csv_dataset(const std::string& path, bool has_labels) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);
  return read_csv_dataset(in, has_labels);
}

inline void write_csv_dataset(std::ostream& out, const Dataset& ds) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t n = 0; n < ds.size(); ++n) {
    const Vector& x = ds.points[n];
    for (Eigen::Index c = 0; c < x.size(); ++c) out << (c ? "," : "") << x[c];
    if (ds.labels) out << ',' << (*ds.labels)[n];
    out << '\n';
  }
}

}  // namespace labelcmp
