#pragma once

// Binary-to-multiclass aggregation over a neighborhood graph.
//
// Each edge (i, j), i < j, carries a linear discriminator h_ij. Class i wins the
// duel at x iff h_ij(x) >= 0, otherwise j wins. A class's score is the fraction
// of its graph neighbors it beats; the prediction is the best-scoring class.

#include <concepts>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "labelcmp/model.hpp"
#include "labelcmp/neighborhood_graph.hpp"

namespace labelcmp {

/// Per-edge linear discriminators keyed by canonical edge.
using BinaryClassifierSet = std::map<Edge, Vector>;

inline void require_matching(const NeighborhoodGraph& g, const BinaryClassifierSet& c) {
  bool ok = c.size() == g.edge_count();
  if (ok) {
    auto it = c.begin();
    for (const auto& e : g.edges()) {
      if (it->first != e) {
        ok = false;
        break;
      }
      ++it;
    }
  }
  if (!ok) throw std::invalid_argument("classifier set does not match the graph's edge set");
}

/// i wins the duel on canonical edge (i, j).
inline bool lower_wins(const Vector& h, const Vector& x) { return h.dot(x) >= 0.0; }

/// Fraction of duels won per class; isolated classes get -1 so they never win.
inline Vector aggregate_scores(const NeighborhoodGraph& g, const BinaryClassifierSet& c, const Vector& x) {
  require_matching(g, c);
  Vector wins = Vector::Zero(g.k());
  Vector degree = Vector::Zero(g.k());
  for (const auto& [e, h] : c) {
    if (lower_wins(h, x)) wins[e.i] += 1.0;
    else wins[e.j] += 1.0;
    degree[e.i] += 1.0;
    degree[e.j] += 1.0;
  }
  Vector s(g.k());
  for (int v = 0; v < g.k(); ++v) s[v] = degree[v] > 0 ? wins[v] / degree[v] : -1.0;
  return s;
}

/// Best aggregate score, lowest index on ties.
inline Label aggregate_predict(const NeighborhoodGraph& g, const BinaryClassifierSet& c, const Vector& x) {
  if (g.empty()) throw std::invalid_argument("aggregate_predict: every vertex is isolated");
  return argmax_index(aggregate_scores(g, c, x));
}

/// h*_ij = w_i - w_j for every edge of g.
inline BinaryClassifierSet exact_classifiers(const LinearModel& teacher, const NeighborhoodGraph& g) {
  BinaryClassifierSet c;
  for (const auto& e : g.edges()) c.emplace(e, (teacher.row(e.i) - teacher.row(e.j)).transpose());
  return c;
}

/// A graph plus its discriminators, usable as a classifier.
struct GraphAggregate {
  NeighborhoodGraph graph;
  BinaryClassifierSet classifiers;

  Vector scores(const Vector& x) const { return aggregate_scores(graph, classifiers, x); }
  Label predict(const Vector& x) const { return aggregate_predict(graph, classifiers, x); }
};

/// Multiclass learning by one binary learner per graph edge, each asked for
/// error at most eps / |E|. `learn(edge, gamma)` returns h_edge.
template <class BinaryLearner>
  requires std::invocable<BinaryLearner&, Edge, double>
GraphAggregate nbr_graph_m2b(const NeighborhoodGraph& g, double eps, BinaryLearner&& learn) {
  if (g.empty()) throw std::invalid_argument("nbr_graph_m2b: graph has no edges");
  if (!(eps > 0)) throw std::invalid_argument("nbr_graph_m2b: eps must be positive");
  const double gamma = eps / static_cast<double>(g.edge_count());
  GraphAggregate out{g, {}};
  for (const auto& e : g.edges()) out.classifiers.emplace(e, learn(e, gamma));
  return out;
}

// ---------------------------------------------------------------------------
// Empirical check of the aggregation error bound
// ---------------------------------------------------------------------------

struct AggregationReport {
  double eps = 0;
  double slack = 0;
  double per_edge_budget = 0;         // eps / |E|
  std::map<Edge, double> edge_error;  // disagreement of sign(h_ij) with sign(h*_ij)
  double union_bound = 0;             // sum of edge errors
  double aggregate_error = 0;         // disagreement with the teacher argmax
  bool precondition_met = false;      // every edge error within budget
  bool union_bound_holds = false;     // aggregate_error <= union_bound
  bool violation = false;             // aggregate_error > eps + slack
};

inline AggregationReport verify_aggregation_bound(const LinearModel& teacher, const NeighborhoodGraph& g,
                                                  const BinaryClassifierSet& c, const Dataset& sample,
                                                  double eps, double slack = 0.01) {
  require_matching(g, c);
  if (sample.empty()) throw std::invalid_argument("verify_aggregation_bound: empty sample");
  AggregationReport r;
  r.eps = eps;
  r.slack = slack;
  r.per_edge_budget = g.empty() ? eps : eps / static_cast<double>(g.edge_count());
  const auto truth = exact_classifiers(teacher, g);
  const double n = static_cast<double>(sample.size());

  std::map<Edge, std::size_t> flips;
  std::size_t wrong = 0;
  for (const auto& x : sample.points) {
    for (const auto& [e, h] : c)
      if (lower_wins(h, x) != lower_wins(truth.at(e), x)) ++flips[e];
    const Label y = argmax_index(scores(teacher, x));
    if (g.empty() || aggregate_predict(g, c, x) != y) ++wrong;
  }
  r.precondition_met = true;
  std::size_t total_flips = 0;
  for (const auto& e : g.edges()) {
    const double err = static_cast<double>(flips[e]) / n;
    r.edge_error[e] = err;
    total_flips += flips[e];
    if (err > r.per_edge_budget) r.precondition_met = false;
  }
  r.union_bound = static_cast<double>(total_flips) / n;
  r.aggregate_error = static_cast<double>(wrong) / n;
  r.union_bound_holds = wrong <= total_flips;
  r.violation = r.aggregate_error > eps + slack;
  return r;
}

// ---------------------------------------------------------------------------
// Text format: "k d", then one "i j h_1 ... h_d" line per edge.
// ---------------------------------------------------------------------------

inline void write_aggregate(std::ostream& out, const GraphAggregate& a) {
  require_matching(a.graph, a.classifiers);
  const Eigen::Index d = a.classifiers.empty() ? 0 : a.classifiers.begin()->second.size();
  out << a.graph.k() << ' ' << d << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& [e, h] : a.classifiers) {
    out << e.i << ' ' << e.j;
    for (Eigen::Index c = 0; c < h.size(); ++c) out << ' ' << h[c];
    out << '\n';
  }
}

inline GraphAggregate read_aggregate(std::istream& in) {
  int k = 0;
  long d = 0;
  if (!(in >> k >> d) || k < 0 || d < 0) throw std::runtime_error("read_aggregate: bad 'k d' header");
  std::vector<Edge> edges;
  BinaryClassifierSet c;
  Label a = 0, b = 0;
  while (in >> a >> b) {
    if (a >= b || a < 0 || b >= k) throw std::runtime_error("read_aggregate: edge must satisfy 0 <= i < j < k");
    Vector h(d);
    for (long n = 0; n < d; ++n) {
      std::string tok;
      if (!(in >> tok)) throw std::runtime_error("read_aggregate: truncated discriminator");
      h[n] = detail::parse_double(tok, "read_aggregate");
    }
    edges.push_back({a, b});
    if (!c.emplace(Edge{a, b}, std::move(h)).second) throw std::runtime_error("read_aggregate: duplicate edge");
  }
  if (!in.eof()) throw std::runtime_error("read_aggregate: trailing garbage");
  return {NeighborhoodGraph(k, std::move(edges)), std::move(c)};
}

}  // namespace labelcmp
