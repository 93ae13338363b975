#pragma once

// Brute-force checks of the combinatorial constructions behind the query and
// sample complexity bounds.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <nlohmann/json.hpp>

#include "labelcmp/aggregation.hpp"
#include "labelcmp/neighborhood_graph.hpp"
#include "labelcmp/one_dim.hpp"

namespace labelcmp::theory {

// ---------------------------------------------------------------------------
// Shattered family of 1-D classifiers with 2k classes
// ---------------------------------------------------------------------------

/// Class (b, i), b in {0,1}, i in [0,k), has flat index 2i + b. Triplet i covers
/// the integer positions 3i+1, 3i+2, 3i+3; its middle 3i+2 is evaluation point i.
struct DSFamily {
  int k = 0;
  std::vector<std::vector<double>> members;  // 2k centers each
  std::vector<double> points;                // {2, 5, ..., 3k-1}
};

inline constexpr int kMaxFamilyTriplets = 8;

/// All 4^k placements: per triplet, which class sits on the middle and whether
/// the other sits left or right of it. With `offset` < 1 the off-middle center
/// sits at middle +- offset instead of on the neighboring integer.
inline DSFamily build_ds_family(int k, double offset = 1.0) {
  if (k < 1) throw std::invalid_argument("build_ds_family: k must be >= 1");
  if (k > kMaxFamilyTriplets) throw std::invalid_argument("build_ds_family: k too large to enumerate (max 8)");
  if (!(offset > 0)) throw std::invalid_argument("build_ds_family: offset must be positive");
  DSFamily f;
  f.k = k;
  for (int i = 0; i < k; ++i) f.points.push_back(3.0 * i + 2.0);
  const std::uint64_t count = std::uint64_t{1} << (2 * k);
  f.members.reserve(count);
  for (std::uint64_t code = 0; code < count; ++code) {
    std::vector<double> c(static_cast<std::size_t>(2 * k));
    for (int i = 0; i < k; ++i) {
      const unsigned bits = (code >> (2 * i)) & 3u;
      const int middle_class = static_cast<int>(bits & 1u);  // b of the class on the middle
      const double side = (bits & 2u) ? 1.0 : -1.0;
      const double mid = f.points[static_cast<std::size_t>(i)];
      c[static_cast<std::size_t>(2 * i + middle_class)] = mid;
      c[static_cast<std::size_t>(2 * i + 1 - middle_class)] = mid + side * offset;
    }
    f.members.push_back(std::move(c));
  }
  return f;
}

enum class ClosenessMode { Strict, ArgmaxOnly };

inline const char* to_string(ClosenessMode m) { return m == ClosenessMode::Strict ? "strict" : "argmax-only"; }

/// f and g agree away from point i (full ranking in strict mode, argmax
/// otherwise) and have different argmax at point i.
inline bool is_xi_close(const std::vector<double>& f, const std::vector<double>& g,
                        const std::vector<double>& points, std::size_t i, ClosenessMode mode) {
  for (std::size_t p = 0; p < points.size(); ++p) {
    const auto of = one_dim::total_order_at(f, points[p]);
    const auto og = one_dim::total_order_at(g, points[p]);
    if (p == i) {
      if (of.front() == og.front()) return false;
    } else if (mode == ClosenessMode::Strict ? of != og : of.front() != og.front()) {
      return false;
    }
  }
  return true;
}

struct ShatterReport {
  ClosenessMode mode = ClosenessMode::ArgmaxOnly;
  int k = 0;
  std::size_t members = 0;
  bool passes = false;
  std::size_t checked = 0;  // (member, point) pairs examined
  /// partner[m][i]: index of a member x_i-close to m, or -1.
  std::vector<std::vector<long>> partner;
  struct Failure {
    std::size_t member;
    std::size_t point;
  };
  std::vector<Failure> failures;  // first few only
  std::size_t failure_count = 0;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["mode"] = to_string(mode);
    j["k"] = k;
    j["members"] = members;
    j["passes"] = passes;
    j["checked"] = checked;
    j["failure_count"] = failure_count;
    auto& fl = j["failures"] = nlohmann::json::array();
    for (const auto& f : failures) fl.push_back({{"member", f.member}, {"point", f.point}});
    return j;
  }
};

/// Searches the family for an x_i-close partner of every (member, point).
inline ShatterReport verify_shattering(const DSFamily& family, ClosenessMode mode, std::size_t max_failures = 10) {
  ShatterReport r;
  r.mode = mode;
  r.k = family.k;
  r.members = family.members.size();
  const std::size_t n = family.points.size();

  // Precompute rankings at every point.
  std::vector<std::vector<one_dim::TotalOrder>> orders(family.members.size());
  for (std::size_t m = 0; m < family.members.size(); ++m)
    for (double p : family.points) orders[m].push_back(one_dim::total_order_at(family.members[m], p));

  auto close = [&](std::size_t f, std::size_t g, std::size_t i) {
    for (std::size_t p = 0; p < n; ++p) {
      const auto& of = orders[f][p];
      const auto& og = orders[g][p];
      if (p == i) {
        if (of.front() == og.front()) return false;
      } else if (mode == ClosenessMode::Strict ? of != og : of.front() != og.front()) {
        return false;
      }
    }
    return true;
  };

  r.partner.assign(family.members.size(), std::vector<long>(n, -1));
  for (std::size_t f = 0; f < family.members.size(); ++f) {
    for (std::size_t i = 0; i < n; ++i) {
      ++r.checked;
      for (std::size_t g = 0; g < family.members.size(); ++g) {
        if (g != f && close(f, g, i)) {
          r.partner[f][i] = static_cast<long>(g);
          break;
        }
      }
      if (r.partner[f][i] < 0) {
        ++r.failure_count;
        if (r.failures.size() < max_failures) r.failures.push_back({f, i});
      }
    }
  }
  r.passes = r.failure_count == 0;
  return r;
}

// ---------------------------------------------------------------------------
// Counting lower bound for argmax queries
// ---------------------------------------------------------------------------

using BigInt = boost::multiprecision::cpp_int;

/// k! * C(n, k-1): labelings of n sorted points by a 1-D k-class classifier.
inline BigInt one_dim_labelings(long n, long k) {
  if (k < 2 || n < k - 1) throw std::invalid_argument("one_dim_labelings: need n >= k - 1 >= 1");
  BigInt fact = 1;
  for (long i = 2; i <= k; ++i) fact *= i;
  BigInt binom = 1;
  for (long i = 0; i < k - 1; ++i) {
    binom *= (n - i);
    binom /= (i + 1);
  }
  return fact * binom;
}

/// Smallest q with k^q >= k! * C(n, k-1).
inline long argmax_query_lower_bound(long n, long k) {
  const BigInt target = one_dim_labelings(n, k);
  BigInt power = 1;
  long q = 0;
  while (power < target) {
    power *= k;
    ++q;
  }
  return q;
}

// ---------------------------------------------------------------------------
// Empirical graph that drops a needed boundary
// ---------------------------------------------------------------------------

struct CounterexampleReport {
  std::vector<double> centers;
  std::vector<double> support;
  NeighborhoodGraph true_graph;
  NeighborhoodGraph empirical_graph;
  double probe = 0;
  Label teacher_label = 0;
  Label true_graph_label = 0;
  Label empirical_graph_label = 0;
  bool empirical_is_three_disjoint_edges = false;
  bool reproduces = false;

  nlohmann::json to_json() const {
    auto edges = [](const NeighborhoodGraph& g) {
      auto a = nlohmann::json::array();
      for (const auto& e : g.edges()) a.push_back({e.i, e.j});
      return a;
    };
    return {{"centers", centers},
            {"support", support},
            {"true_graph", edges(true_graph)},
            {"empirical_graph", edges(empirical_graph)},
            {"probe", probe},
            {"teacher_label", teacher_label},
            {"true_graph_label", true_graph_label},
            {"empirical_graph_label", empirical_graph_label},
            {"empirical_is_three_disjoint_edges", empirical_is_three_disjoint_edges},
            {"reproduces", reproduces}};
  }
};

/// Six classes on a line with centers 1..6 (classes 0..5). The support only
/// witnesses runner-up pairs (0,1), (2,3), (4,5). The probe sits in class 2's
/// region next to the 1|2 boundary: with exact duels on the empirical graph,
/// classes 1, 2 and 4 all win every duel and the tie goes to class 1.
inline CounterexampleReport appendix_c_counterexample() {
  CounterexampleReport r;
  r.centers = {1, 2, 3, 4, 5, 6};
  // Runner-up of t in class a's region is a-1 when t is left of c_a, else a+1.
  r.support = {1.0, 1.8, 3.2, 3.8, 5.2, 6.0};
  r.probe = 2.6;
  const one_dim::CentersModel cm{r.centers};
  const LinearModel teacher = one_dim::centers_to_linear(cm);

  Dataset support;
  for (double t : r.support) support.points.push_back(one_dim::lift(t));
  r.true_graph = one_dim::true_graph(cm);
  r.empirical_graph = empirical_graph(teacher, support);

  const Vector x = one_dim::lift(r.probe);
  r.teacher_label = argmax_index(scores(teacher, x));
  r.true_graph_label = aggregate_predict(r.true_graph, exact_classifiers(teacher, r.true_graph), x);
  r.empirical_graph_label = aggregate_predict(r.empirical_graph, exact_classifiers(teacher, r.empirical_graph), x);

  const auto deg = r.empirical_graph.degrees();
  r.empirical_is_three_disjoint_edges =
      r.empirical_graph.edge_count() == 3 && std::all_of(deg.begin(), deg.end(), [](int v) { return v == 1; });
  r.reproduces = r.empirical_is_three_disjoint_edges && r.empirical_graph.is_subgraph_of(r.true_graph) &&
                 r.true_graph_label == r.teacher_label && r.empirical_graph_label != r.teacher_label;
  return r;
}

}  // namespace labelcmp::theory
