#pragma once

// Label neighborhood graphs: which classes share a decision boundary.
//
// Linear scores are positively homogeneous, so every boundary passes through
// the origin where all classes tie. Witnesses are therefore sought on the
// unit sphere only. The definition presumes continuous score functions,
// which linear models satisfy.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <istream>
#include <iterator>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "labelcmp/model.hpp"
#include "labelcmp/rng.hpp"

namespace labelcmp {

/// Undirected edge stored canonically with i < j.
struct Edge {
  Label i = 0;
  Label j = 0;

  static Edge of(Label a, Label b) {
    if (a == b) throw std::invalid_argument("Edge: self-loop");
    return a < b ? Edge{a, b} : Edge{b, a};
  }
  auto operator<=>(const Edge&) const = default;
};

class NeighborhoodGraph {
 public:
  NeighborhoodGraph() = default;

  explicit NeighborhoodGraph(int k, std::vector<Edge> edges = {}) : k_(k) {
    if (k < 0) throw std::invalid_argument("NeighborhoodGraph: negative class count");
    for (auto& e : edges) {
      e = Edge::of(e.i, e.j);
      if (e.i < 0 || e.j >= k) throw std::invalid_argument("NeighborhoodGraph: endpoint out of range");
      if (e.i == e.j) throw std::invalid_argument("NeighborhoodGraph: self-loop");
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    edges_ = std::move(edges);
  }

  static NeighborhoodGraph complete(int k) {
    std::vector<Edge> e;
    for (Label i = 0; i < k; ++i)
      for (Label j = i + 1; j < k; ++j) e.push_back({i, j});
    return NeighborhoodGraph(k, std::move(e));
  }

  int k() const { return k_; }
  /// Sorted, duplicate-free.
  const std::vector<Edge>& edges() const { return edges_; }
  /// Total number of edges (the "degree" of a graph in the aggregation bounds).
  std::size_t edge_count() const { return edges_.size(); }
  bool empty() const { return edges_.empty(); }

  bool has_edge(Label a, Label b) const {
    if (a == b) return false;
    return std::binary_search(edges_.begin(), edges_.end(), Edge::of(a, b));
  }

  std::vector<Label> neighbors(Label v) const {
    std::vector<Label> out;
    for (const auto& e : edges_) {
      if (e.i == v) out.push_back(e.j);
      else if (e.j == v) out.push_back(e.i);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  std::vector<int> degrees() const {
    std::vector<int> deg(static_cast<std::size_t>(k_), 0);
    for (const auto& e : edges_) {
      ++deg[static_cast<std::size_t>(e.i)];
      ++deg[static_cast<std::size_t>(e.j)];
    }
    return deg;
  }

  int max_degree() const {
    const auto deg = degrees();
    return deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
  }

  /// Vertices with at least one incident edge.
  std::vector<Label> active_vertices() const {
    std::vector<Label> out;
    const auto deg = degrees();
    for (std::size_t v = 0; v < deg.size(); ++v)
      if (deg[v] > 0) out.push_back(static_cast<Label>(v));
    return out;
  }

  bool is_subgraph_of(const NeighborhoodGraph& other) const {
    return k_ == other.k_ && std::includes(other.edges_.begin(), other.edges_.end(), edges_.begin(), edges_.end());
  }

  /// Edges of this graph missing from `other`.
  std::vector<Edge> edges_not_in(const NeighborhoodGraph& other) const {
    std::vector<Edge> out;
    std::set_difference(edges_.begin(), edges_.end(), other.edges_.begin(), other.edges_.end(),
                        std::back_inserter(out));
    return out;
  }

  /// Vertex v becomes perm[v].
  NeighborhoodGraph relabeled(const std::vector<Label>& perm) const {
    std::vector<Edge> e;
    e.reserve(edges_.size());
    for (const auto& ed : edges_) e.push_back(Edge::of(perm.at(static_cast<std::size_t>(ed.i)), perm.at(static_cast<std::size_t>(ed.j))));
    return NeighborhoodGraph(k_, std::move(e));
  }

  /// Induced subgraph on `vertices`, renumbered 0..n-1 in ascending vertex order.
  NeighborhoodGraph induced(const std::set<Label>& vertices) const {
    std::vector<Label> index(static_cast<std::size_t>(k_), -1);
    Label next = 0;
    for (Label v : vertices) index.at(static_cast<std::size_t>(v)) = next++;
    std::vector<Edge> e;
    for (const auto& ed : edges_) {
      const Label a = index[static_cast<std::size_t>(ed.i)];
      const Label b = index[static_cast<std::size_t>(ed.j)];
      if (a >= 0 && b >= 0) e.push_back(Edge::of(a, b));
    }
    return NeighborhoodGraph(next, std::move(e));
  }

  bool operator==(const NeighborhoodGraph&) const = default;

 private:
  int k_ = 0;
  std::vector<Edge> edges_;
};

// ---------------------------------------------------------------------------
// Computing graphs of linear models
// ---------------------------------------------------------------------------

/// Exact witness search for d = 2: the i/j boundary meets the unit circle at ±u.
struct Exact2D {};

/// Exact search for k x 2 models read as lifted 1-D classifiers acting on (t, 1):
/// the i/j boundary is the single point t = -(v1 / v0).
struct ExactLifted1D {};

/// Random witness search inside each pairwise boundary hyperplane. May miss
/// edges whose witness set is tiny; never reports an edge without a witness.
struct MonteCarlo {
  int samples = 2048;
  double tol = 1e-9;
  std::uint64_t seed = 0x5eedULL;
};

using GraphMethod = std::variant<Exact2D, ExactLifted1D, MonteCarlo>;

namespace detail {

/// True iff every class scores at most the mean of f_i and f_j (plus tol) at x.
inline bool dominates_at(const Matrix& w, const Vector& x, Label i, Label j, double tol, Label& last_violator) {
  const double level = 0.5 * (class_score(w, x, i) + class_score(w, x, j));
  const auto k = static_cast<Label>(w.rows());
  if (last_violator >= 0 && class_score(w, x, last_violator) > level + tol) return false;
  for (Label r = 0; r < k; ++r) {
    if (r == i || r == j || r == last_violator) continue;
    if (class_score(w, x, r) > level + tol) {
      last_violator = r;
      return false;
    }
  }
  return true;
}

inline bool pair_edge_exact2d(const Matrix& w, Label i, Label j) {
  const Vector v = (w.row(i) - w.row(j)).transpose();
  Vector u(2);
  u << -v[1], v[0];
  u /= u.norm();
  Label cache = -1;
  return dominates_at(w, u, i, j, 0.0, cache) || dominates_at(w, Vector(-u), i, j, 0.0, cache);
}

inline bool pair_edge_lifted1d(const Matrix& w, Label i, Label j) {
  const Vector v = (w.row(i) - w.row(j)).transpose();
  if (v[0] == 0.0) return false;  // parallel, never tie on the line
  Vector x(2);
  x << -v[1] / v[0], 1.0;
  Label cache = -1;
  return dominates_at(w, x, i, j, 0.0, cache);
}

inline bool pair_edge_montecarlo(const Matrix& w, Label i, Label j, const MonteCarlo& mc) {
  const Vector v = (w.row(i) - w.row(j)).transpose();
  const double vv = v.squaredNorm();
  const auto k = static_cast<std::uint64_t>(w.rows());
  Rng rng(derive_seed(mc.seed, static_cast<std::uint64_t>(i) * k + static_cast<std::uint64_t>(j)));
  Label cache = -1;
  for (int s = 0; s < mc.samples; ++s) {
    Vector g = rng.gaussian_vector(v.size());
    const double gn = g.norm();
    g -= (g.dot(v) / vv) * v;
    const double pn = g.norm();
    if (pn <= 1e-9 * gn) continue;
    g /= pn;
    if (dominates_at(w, g, i, j, mc.tol, cache)) return true;
  }
  return false;
}

}  // namespace detail

/// True neighborhood graph of a linear model. Identical rows share a boundary
/// everywhere; such pairs are reported as edges and noted in `diagnostics`.
inline NeighborhoodGraph true_graph(const LinearModel& model, const GraphMethod& method,
                                   std::vector<std::string>* diagnostics = nullptr) {
  const Matrix& w = model.weights();
  if (std::holds_alternative<Exact2D>(method) && model.d() != 2)
    throw std::invalid_argument("true_graph: exact2d requires d = 2");
  if (std::holds_alternative<ExactLifted1D>(method) && model.d() != 2)
    throw std::invalid_argument("true_graph: lifted 1-D models have d = 2");
  if (const auto* mc = std::get_if<MonteCarlo>(&method); mc && (mc->samples < 1 || !(mc->tol > 0)))
    throw std::invalid_argument("true_graph: montecarlo needs samples >= 1 and tol > 0");

  std::vector<Edge> edges;
  for (Label i = 0; i < model.k(); ++i) {
    for (Label j = i + 1; j < model.k(); ++j) {
      if (w.row(i) == w.row(j)) {
        edges.push_back({i, j});
        if (diagnostics)
          diagnostics->push_back("classes " + std::to_string(i) + " and " + std::to_string(j) +
                                 " have identical weights; boundary is everywhere");
        continue;
      }
      const bool edge = std::visit(
          [&](const auto& m) {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, Exact2D>) return detail::pair_edge_exact2d(w, i, j);
            else if constexpr (std::is_same_v<M, ExactLifted1D>) return detail::pair_edge_lifted1d(w, i, j);
            else return detail::pair_edge_montecarlo(w, i, j, m);
          },
          method);
      if (edge) edges.push_back({i, j});
    }
  }
  return NeighborhoodGraph(model.k(), std::move(edges));
}

/// Edges witnessed by the data: (best, runner-up) at each point.
inline NeighborhoodGraph empirical_graph(const LinearModel& model, const Dataset& data) {
  if (data.empty()) throw std::invalid_argument("empirical_graph: empty dataset");
  std::set<Edge> seen;
  for (const auto& x : data.points) {
    const auto [a, b] = top_two(scores(model, x));
    seen.insert(Edge::of(a, b));
  }
  return NeighborhoodGraph(model.k(), std::vector<Edge>(seen.begin(), seen.end()));
}

/// |edges| / C(k, 2).
inline double sparsity_level(const NeighborhoodGraph& g) {
  if (g.k() < 2) throw std::invalid_argument("sparsity_level: need k >= 2");
  const double pairs = 0.5 * g.k() * (g.k() - 1);
  return static_cast<double>(g.edge_count()) / pairs;
}

inline void require_permutation(const std::vector<Label>& order) {
  std::vector<char> seen(order.size(), 0);
  for (Label v : order) {
    if (v < 0 || static_cast<std::size_t>(v) >= order.size() || seen[static_cast<std::size_t>(v)])
      throw std::invalid_argument("not a permutation of 0..k-1");
    seen[static_cast<std::size_t>(v)] = 1;
  }
}

/// Path linking consecutive classes of `order`.
inline NeighborhoodGraph path_graph_from_order(const std::vector<Label>& order) {
  require_permutation(order);
  std::vector<Edge> e;
  for (std::size_t n = 1; n < order.size(); ++n) e.push_back(Edge::of(order[n - 1], order[n]));
  return NeighborhoodGraph(static_cast<int>(order.size()), std::move(e));
}

// ---------------------------------------------------------------------------
// Edge-list text format: "k" on the first line, then sorted "i j" pairs.
// ---------------------------------------------------------------------------

inline void write_graph(std::ostream& out, const NeighborhoodGraph& g) {
  out << g.k() << '\n';
  for (const auto& e : g.edges()) out << e.i << ' ' << e.j << '\n';
}

inline NeighborhoodGraph read_graph(std::istream& in) {
  int k = 0;
  if (!(in >> k) || k < 0) throw std::runtime_error("read_graph: bad header");
  std::vector<Edge> edges;
  Label a = 0, b = 0;
  while (in >> a >> b) {
    if (a == b || a < 0 || b < 0 || a >= k || b >= k)
      throw std::runtime_error("read_graph: invalid edge " + std::to_string(a) + " " + std::to_string(b));
    edges.push_back(Edge::of(a, b));
  }
  if (!in.eof()) throw std::runtime_error("read_graph: trailing garbage");
  return NeighborhoodGraph(k, std::move(edges));
}

}  // namespace labelcmp
