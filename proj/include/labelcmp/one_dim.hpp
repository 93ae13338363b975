#pragma once

// Linear classifiers on the real line.
//
// A k-class classifier on R is written as k centers; the class ranking at t
// sorts classes by |c_i - t|. As a homogeneous linear model it acts on the
// lifted point (t, 1) with row i = (2 c_i, -c_i^2), since
//   |c_i - t|^2 < |c_j - t|^2  <=>  2 c_i t - c_i^2 > 2 c_j t - c_j^2.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "labelcmp/aggregation.hpp"
#include "labelcmp/neighborhood_graph.hpp"
#include "labelcmp/oracle.hpp"

namespace labelcmp::one_dim {

struct CentersModel {
  std::vector<double> centers;

  int k() const { return static_cast<int>(centers.size()); }
};

/// Ranking of all classes, most preferred first.
using TotalOrder = std::vector<Label>;

inline Vector lift(double t) {
  Vector x(2);
  x << t, 1.0;
  return x;
}

inline LinearModel centers_to_linear(const CentersModel& m) {
  Matrix w(m.k(), 2);
  for (int i = 0; i < m.k(); ++i) {
    const double c = m.centers[static_cast<std::size_t>(i)];
    if (!std::isfinite(c)) throw std::invalid_argument("centers_to_linear: non-finite center");
    w(i, 0) = 2.0 * c;
    w(i, 1) = -c * c;
  }
  return LinearModel(std::move(w));
}

/// Classes sorted by distance of their center to t; ties by lower index.
inline TotalOrder total_order_at(const std::vector<double>& centers, double t) {
  TotalOrder order(centers.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Label>(i);
  std::stable_sort(order.begin(), order.end(), [&](Label a, Label b) {
    return std::abs(centers[static_cast<std::size_t>(a)] - t) < std::abs(centers[static_cast<std::size_t>(b)] - t);
  });
  return order;
}

inline TotalOrder total_order_at(const CentersModel& m, double t) { return total_order_at(m.centers, t); }

/// The true graph of a centers model: a path through the classes in center order.
inline NeighborhoodGraph true_graph(const CentersModel& m, std::vector<std::string>* diagnostics = nullptr) {
  return labelcmp::true_graph(centers_to_linear(m), ExactLifted1D{}, diagnostics);
}

/// Left-to-right order of the decision regions that contain at least one sample.
inline std::vector<Label> region_order(const LinearModel& teacher, std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  std::vector<Label> out;
  for (double t : samples) {
    const Label y = argmax_index(scores(teacher, lift(t)));
    if (out.empty() || out.back() != y) out.push_back(y);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Learning the class order from comparisons at the two extreme samples
// ---------------------------------------------------------------------------

enum class PairQueryMode { LazySort, EagerPairs };

struct GraphLearnResult {
  TotalOrder order;
  NeighborhoodGraph graph;  // path over `order`
  /// Classes that lost a pair at both extremes. They own no sample and sit at
  /// the end of `order`.
  std::set<Label> losers;
  std::uint64_t comparisons = 0;
  std::vector<std::string> diagnostics;
};

namespace detail {

/// Outcome of one resolved pair, stored for the lower index a of (a, b).
struct PairOutcome {
  bool a_first;
  std::optional<Label> loser;
};

template <ComparisonOracle O>
class PairResolver {
 public:
  PairResolver(O& oracle, double x_left, double x_right, GraphLearnResult& out)
      : oracle_(oracle), left_(lift(x_left)), right_(lift(x_right)), out_(out) {}

  bool before(Label a, Label b) {
    if (a < b) return resolve(a, b).a_first;
    return !resolve(b, a).a_first;
  }

  const PairOutcome& resolve(Label a, Label b) {
    auto key = std::make_pair(a, b);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const bool at_left = oracle_.compare(left_, a, b);
    const bool at_right = oracle_.compare(right_, a, b);
    PairOutcome o{};
    if (at_left != at_right) {
      o.a_first = at_left;  // a wins on the left end only: a is left of b
    } else if (at_left) {
      o.a_first = true;  // b loses at both ends
      o.loser = b;
    } else {
      o.a_first = false;  // a loses, or ties, at both ends
      o.loser = a;
      out_.diagnostics.push_back("pair (" + std::to_string(a) + "," + std::to_string(b) + "): class " +
                                 std::to_string(a) + " never wins at the extremes; ranked last");
    }
    if (o.loser) out_.losers.insert(*o.loser);
    return memo_.emplace(key, o).first->second;
  }

 private:
  O& oracle_;
  Vector left_, right_;
  GraphLearnResult& out_;
  std::map<std::pair<Label, Label>, PairOutcome> memo_;
};

template <class Before>
void merge_sort(std::vector<Label>& v, std::size_t lo, std::size_t hi, std::vector<Label>& tmp, Before& before) {
  if (hi - lo < 2) return;
  const std::size_t mid = lo + (hi - lo) / 2;
  merge_sort(v, lo, mid, tmp, before);
  merge_sort(v, mid, hi, tmp, before);
  std::size_t a = lo, b = mid, o = lo;
  while (a < mid && b < hi) tmp[o++] = before(v[b], v[a]) ? v[b++] : v[a++];
  while (a < mid) tmp[o++] = v[a++];
  while (b < hi) tmp[o++] = v[b++];
  std::copy(tmp.begin() + static_cast<std::ptrdiff_t>(lo), tmp.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
}

}  // namespace detail

/// Orders the classes from two comparisons per resolved pair, taken at the
/// smallest and largest sample. LazySort resolves only the pairs a merge sort
/// asks about; EagerPairs resolves all k(k-1)/2 pairs first.
template <ComparisonOracle O>
GraphLearnResult learn_graph_1d(O& oracle, const std::vector<double>& samples,
                                PairQueryMode mode = PairQueryMode::LazySort) {
  if (samples.empty()) throw std::invalid_argument("learn_graph_1d: need at least one sample");
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const int k = oracle.num_classes();
  const std::uint64_t start = oracle.ledger().comparisons;

  GraphLearnResult out;
  detail::PairResolver<O> resolver(oracle, *lo_it, *hi_it, out);
  if (mode == PairQueryMode::EagerPairs)
    for (Label a = 0; a < k; ++a)
      for (Label b = a + 1; b < k; ++b) resolver.resolve(a, b);

  TotalOrder order(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) order[static_cast<std::size_t>(i)] = i;
  std::vector<Label> tmp(order.size());
  auto before = [&](Label a, Label b) { return resolver.before(a, b); };
  detail::merge_sort(order, 0, order.size(), tmp, before);
  std::stable_partition(order.begin(), order.end(), [&](Label c) { return !out.losers.contains(c); });

  out.order = std::move(order);
  out.graph = path_graph_from_order(out.order);
  out.comparisons = oracle.ledger().comparisons - start;
  return out;
}

// ---------------------------------------------------------------------------
// Binary search for the boundary between two adjacent classes
// ---------------------------------------------------------------------------

struct ThresholdResult {
  Label left = 0;   // wins below the threshold
  Label right = 1;  // wins at or above it
  double threshold = 0;
  std::size_t lo = 0, hi = 0;  // the boundary index lies in [lo, hi]
  std::uint64_t queries = 0;

  /// Linear discriminator on lifted points for the canonical edge: >= 0 iff
  /// the lower-indexed class wins.
  Vector discriminator() const {
    Vector h(2);
    if (left < right) h << -1.0, threshold;  // lower index wins for t <= threshold
    else h << 1.0, -threshold;
    return h;
  }
};

/// Finds where `left` stops beating `right` over a sorted pool. The boundary
/// index b (first pool point where left does not win) is narrowed until at
/// most floor(gamma * n / 2) candidates remain, so at most that many pool
/// points fall on the wrong side of the returned threshold. Uses at most
/// ceil(log2(1 / gamma)) + 1 comparisons.
template <ComparisonOracle O>
ThresholdResult binary_search_learner(O& oracle, Label left, Label right, const std::vector<double>& pool,
                                      double gamma) {
  if (pool.empty()) throw std::invalid_argument("binary_search_learner: empty pool");
  if (!(gamma > 0)) throw std::invalid_argument("binary_search_learner: gamma must be positive");
  const std::size_t n = pool.size();
  const auto width_goal = static_cast<std::size_t>(std::floor(gamma * static_cast<double>(n) / 2.0));

  ThresholdResult r;
  r.left = left;
  r.right = right;
  std::size_t lo = 0, hi = n;
  while (hi - lo > width_goal) {
    const std::size_t mid = lo + (hi - lo) / 2;
    ++r.queries;
    if (oracle.compare(lift(pool[mid]), left, right)) lo = mid + 1;
    else hi = mid;
  }
  const double span = std::max(pool.back() - pool.front(), 1.0);
  const double below = lo > 0 ? pool[lo - 1] : pool.front() - span;
  const double above = hi < n ? pool[hi] : pool.back() + span;
  r.lo = lo;
  r.hi = hi;
  r.threshold = 0.5 * (below + above);
  return r;
}

/// Multiclass-to-binary over a path graph with binary search per edge. The
/// position of each class in `order` decides which side of an edge is left.
template <ComparisonOracle O>
GraphAggregate nbr_graph_m2b(O& oracle, const NeighborhoodGraph& g, const TotalOrder& order,
                             const std::vector<double>& sorted_pool, double eps) {
  std::vector<std::size_t> pos(order.size());
  for (std::size_t n = 0; n < order.size(); ++n) pos.at(static_cast<std::size_t>(order[n])) = n;
  return labelcmp::nbr_graph_m2b(g, eps, [&](Edge e, double gamma) {
    const bool i_left = pos.at(static_cast<std::size_t>(e.i)) < pos.at(static_cast<std::size_t>(e.j));
    const Label l = i_left ? e.i : e.j;
    const Label r = i_left ? e.j : e.i;
    return binary_search_learner(oracle, l, r, sorted_pool, gamma).discriminator();
  });
}

/// Same, orienting each edge with one extra comparison at the smallest pool point.
template <ComparisonOracle O>
GraphAggregate nbr_graph_m2b(O& oracle, const NeighborhoodGraph& g, const std::vector<double>& sorted_pool,
                             double eps) {
  if (sorted_pool.empty()) throw std::invalid_argument("nbr_graph_m2b: empty pool");
  return labelcmp::nbr_graph_m2b(g, eps, [&](Edge e, double gamma) {
    const bool i_left = oracle.compare(lift(sorted_pool.front()), e.i, e.j);
    const Label l = i_left ? e.i : e.j;
    const Label r = i_left ? e.j : e.i;
    return binary_search_learner(oracle, l, r, sorted_pool, gamma).discriminator();
  });
}

/// Aggregated classifier, or a constant when at most one class owns samples.
struct Classifier1D {
  std::optional<GraphAggregate> aggregate;
  Label constant = 0;

  Label predict(double t) const { return aggregate ? aggregate->predict(lift(t)) : constant; }
};

struct EndToEndResult {
  Classifier1D classifier;
  GraphLearnResult learned;
  std::uint64_t comparisons = 0;
};

/// Learns the class order from the samples, then binary-searches every
/// boundary between classes that own samples, using the samples as the pool.
template <ComparisonOracle O>
EndToEndResult end_to_end_1d(O& oracle, std::vector<double> samples, double eps,
                             PairQueryMode mode = PairQueryMode::LazySort) {
  if (!(eps > 0)) throw std::invalid_argument("end_to_end_1d: eps must be positive");
  const std::uint64_t start = oracle.ledger().comparisons;
  EndToEndResult out;
  out.learned = learn_graph_1d(oracle, samples, mode);
  std::sort(samples.begin(), samples.end());

  std::vector<Edge> kept;
  for (const auto& e : out.learned.graph.edges())
    if (!out.learned.losers.contains(e.i) && !out.learned.losers.contains(e.j)) kept.push_back(e);
  const NeighborhoodGraph g(out.learned.graph.k(), std::move(kept));
  if (g.empty()) out.classifier.constant = out.learned.order.front();
  else out.classifier.aggregate = nbr_graph_m2b(oracle, g, out.learned.order, samples, eps);
  out.comparisons = oracle.ledger().comparisons - start;
  return out;
}

/// Fraction of points where the classifier disagrees with the teacher argmax.
inline double disagreement(const Classifier1D& f, const LinearModel& teacher, const std::vector<double>& points) {
  if (points.empty()) return 0.0;
  std::size_t wrong = 0;
  for (double t : points)
    if (f.predict(t) != argmax_index(scores(teacher, lift(t)))) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(points.size());
}

}  // namespace labelcmp::one_dim
