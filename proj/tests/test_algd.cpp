#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "test_common.hpp"

using namespace labelcmp;

namespace {

Matrix random_matrix(Rng& rng, int k, int d, double scale = 1.0) {
  Matrix w(k, d);
  for (int i = 0; i < k; ++i) w.row(i) = scale * rng.gaussian_vector(d).transpose();
  return w;
}

/// Stream of lifted 1-D points, uniform on [lo, hi).
class LiftedStream {
 public:
  LiftedStream(double lo, double hi, std::uint64_t seed) : lo_(lo), hi_(hi), rng_(seed) {}
  Vector next() { return one_dim::lift(rng_.uniform(lo_, hi_)); }

 private:
  double lo_, hi_;
  Rng rng_;
};

AlgdConfig config(NeighborhoodGraph g, double tau, long steps, int buffer = 8) {
  AlgdConfig c;
  c.graph = std::move(g);
  c.tau = tau;
  c.steps = steps;
  c.buffer_size = buffer;
  c.eta = 0.1;
  return c;
}

}  // namespace

TEST(Loss, Examples) {
  Matrix w(2, 1);
  w << 0, 0;
  const Vector x = Vector::Ones(1);
  EXPECT_NEAR(loss_value(w, x, 0, 1, 1), std::log(2.0), 1e-15);
  w << 50, 0;
  EXPECT_LE(loss_value(w, x, 0, 1, 1), 1e-20);
  EXPECT_GE(loss_value(w, x, 0, 1, 1), 0.0);
  EXPECT_NEAR(loss_value(w, x, 0, 1, -1), 50.0, 1e-12);
  w << 1e6, 0;
  EXPECT_TRUE(std::isfinite(loss_value(w, x, 0, 1, -1)));
  EXPECT_THROW(loss_value(w, x, 0, 1, 0), std::invalid_argument);
}

TEST(Loss, GradientMatchesCentralDifferences) {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 2 + static_cast<int>(rng.uniform_int(0, 5));
    const int d = 1 + static_cast<int>(rng.uniform_int(0, 5));
    const Matrix w = random_matrix(rng, k, d);
    const Vector x = rng.gaussian_vector(d);
    const Label i = static_cast<Label>(rng.uniform_int(0, k - 1));
    Label j = static_cast<Label>(rng.uniform_int(0, k - 2));
    if (j >= i) ++j;
    const int c = rng.uniform_int(0, 1) ? 1 : -1;
    Matrix grad = Matrix::Zero(k, d);
    accumulate_pair_gradient(w, x, i, j, c, grad);
    Matrix fd(k, d);
    const double h = 1e-5;
    for (int r = 0; r < k; ++r)
      for (int col = 0; col < d; ++col) {
        Matrix wp = w, wm = w;
        wp(r, col) += h;
        wm(r, col) -= h;
        fd(r, col) = (loss_value(wp, x, i, j, c) - loss_value(wm, x, i, j, c)) / (2 * h);
      }
    EXPECT_LE((grad - fd).norm(), 1e-5 * std::max(1.0, fd.norm())) << trial;
    for (int r = 0; r < k; ++r)
      if (r != i && r != j) {
        EXPECT_EQ(grad.row(r).norm(), 0.0);
      }
  }
}

TEST(Algd, ZeroTauNeverQueries) {
  const LinearModel teacher = random_teacher(3, 5, 1);
  QueryLedger l;
  LinearOracle o(teacher, l);
  SphereStream s(3, 2);
  const auto r = algd_train(config(NeighborhoodGraph::complete(5), 0.0, 200), o, s);
  EXPECT_EQ(r.queries, 0u);
  EXPECT_EQ(l.comparisons, 0u);
  EXPECT_EQ(r.model.weights(), Matrix::Zero(5, 3));
}

TEST(Algd, InfiniteTauSeparableTwoClassStream) {
  const LinearModel teacher = one_dim::centers_to_linear({{0, 1}});
  QueryLedger l;
  LinearOracle o(teacher, l);
  LiftedStream s(-1, 2, 3);
  AlgdConfig c = config(NeighborhoodGraph::complete(2), std::numeric_limits<double>::infinity(), 2000, 1);
  c.edge_mode = EdgeMode::SampleOne;
  std::size_t agree = 0, seen = 0;
  LiftedStream replay(-1, 2, 3);
  const auto r = algd_train(c, o, s, [&](long t, const Matrix& w, std::uint64_t) {
    const Vector x = replay.next();
    if (t > 1000) {
      ++seen;
      agree += argmax_index(scores(w, x)) == argmax_index(scores(teacher, x));
    }
  });
  EXPECT_EQ(r.queries, 2000u);
  EXPECT_EQ(l.comparisons, 2000u);
  EXPECT_GE(static_cast<double>(agree) / static_cast<double>(seen), 0.99);
}

TEST(Algd, FirstStepAtZeroMargin) {
  // One buffered term at delta = 0: the step moves rows i and j by eta * ||x|| / 2.
  Matrix w(3, 2);
  w << 1, 0, 0, 1, -1, -1;
  const LinearModel teacher(w);
  QueryLedger l;
  LinearOracle o(teacher, l);
  AlgdConfig c = config(NeighborhoodGraph(3, {{0, 1}}), 1.0, 1, 1);
  AlgdTrainer t(c, 2);
  Vector x(2);
  x << 3, 4;
  std::vector<UpdateEvent> events;
  t.on_update = [&](const UpdateEvent& e) { events.push_back(e); };
  t.observe(x, o);
  const Matrix& after = t.state().weights;
  EXPECT_NEAR(after.row(0).norm(), 0.1 * 5 / 2, 1e-15);
  EXPECT_NEAR(after.row(1).norm(), 0.1 * 5 / 2, 1e-15);
  EXPECT_EQ(after.row(2).norm(), 0.0);
  // Teacher prefers class 1 at x, so the step raises row 1 along x.
  EXPECT_GT(after.row(1).dot(x), 0.0);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_NEAR(events[0].loss, std::log(2.0), 1e-15);
  EXPECT_EQ(events[0].terms, 1u);
}

TEST(Algd, UpdatesTouchOnlyBufferedRows) {
  const LinearModel teacher = random_teacher(4, 6, 4);
  QueryLedger l;
  LinearOracle o(teacher, l);
  SphereStream s(4, 5);
  const auto r = algd_train(config(NeighborhoodGraph(6, {{0, 1}, {1, 2}}), 1.0, 300), o, s);
  for (int i = 3; i < 6; ++i) EXPECT_EQ(r.model.weights().row(i).norm(), 0.0);
  EXPECT_GT(r.model.weights().row(1).norm(), 0.0);
}

TEST(Algd, QueriesEqualLedgerAndAreDeterministic) {
  const LinearModel teacher = random_teacher(5, 8, 6);
  const auto g = true_graph(teacher, MonteCarlo{});
  auto run = [&](EdgeMode mode) {
    QueryLedger l;
    LinearOracle o(teacher, l);
    SphereStream s(5, 7);
    AlgdConfig c = config(g, 0.5, 500);
    c.edge_mode = mode;
    c.seed = 11;
    std::uint64_t last = 0;
    bool monotone = true;
    const auto r = algd_train(c, o, s, [&](long, const Matrix&, std::uint64_t q) {
      monotone = monotone && q >= last;
      last = q;
    });
    EXPECT_TRUE(monotone);
    EXPECT_EQ(r.queries, l.comparisons);
    return r;
  };
  for (auto mode : {EdgeMode::IterateAll, EdgeMode::SampleOne}) {
    const auto a = run(mode), b = run(mode);
    EXPECT_EQ(a.model.weights(), b.model.weights());
    EXPECT_EQ(a.queries, b.queries);
  }
  EXPECT_LE(run(EdgeMode::SampleOne).queries, 500u);
}

TEST(Algd, CompleteGraphQueriesAtLeastSparseGraph) {
  const LinearModel teacher = random_teacher(5, 10, 8);
  const auto g = true_graph(teacher, MonteCarlo{});
  const Dataset pts = sample_sphere(5, 1, 9);
  for (const auto& graph : {g, NeighborhoodGraph::complete(10)}) {
    QueryLedger l;
    LinearOracle o(teacher, l);
    AlgdTrainer t(config(graph, 0.5, 1, 1000), 5);
    t.observe(pts.points[0], o);
    EXPECT_EQ(l.comparisons, graph.edge_count());  // zero weights: every margin is 0
  }
}

TEST(Algd, BufferFlushesWhenFull) {
  const LinearModel teacher = random_teacher(3, 4, 10);
  QueryLedger l;
  LinearOracle o(teacher, l);
  SphereStream s(3, 11);
  AlgdConfig c = config(NeighborhoodGraph::complete(4), std::numeric_limits<double>::infinity(), 50, 6);
  std::vector<UpdateEvent> events;
  const auto r = algd_train(c, o, s, {}, [&](const UpdateEvent& e) { events.push_back(e); });
  // Six terms per point with tau = inf: one update per point.
  EXPECT_EQ(r.queries, 300u);
  ASSERT_EQ(events.size(), 50u);
  for (const auto& e : events) EXPECT_EQ(e.terms, 6u);
}

TEST(Algd, Errors) {
  const LinearModel teacher = random_teacher(3, 4, 12);
  QueryLedger l;
  LinearOracle o(teacher, l);
  SphereStream s(3, 1);
  EXPECT_THROW(algd_train(config(NeighborhoodGraph(4), 1.0, 10), o, s), std::invalid_argument);
  EXPECT_THROW(algd_train(config(NeighborhoodGraph::complete(5), 1.0, 10), o, s), std::invalid_argument);
  EXPECT_THROW(algd_train(config(NeighborhoodGraph::complete(4), 1.0, 10, 0), o, s), std::invalid_argument);
  AlgdConfig bad = config(NeighborhoodGraph::complete(4), 1.0, 10);
  bad.eta = 0;
  EXPECT_THROW(algd_train(bad, o, s), std::invalid_argument);
  bad.eta = 0.1;
  bad.tau = NAN;
  EXPECT_THROW(algd_train(bad, o, s), std::invalid_argument);

  const Dataset short_data = sample_sphere(3, 5, 2);
  DatasetStream ds(short_data);
  EXPECT_THROW(algd_train(config(NeighborhoodGraph::complete(4), 1.0, 10), o, ds), std::out_of_range);
}

TEST(Algd, LearnsRandomTeacherOnTrueGraph) {
  const LinearModel teacher = random_teacher(5, 10, 13);
  const auto g = true_graph(teacher, MonteCarlo{});
  QueryLedger l;
  LinearOracle o(teacher, l);
  SphereStream s(5, 14);
  AlgdConfig c = config(g, 1.0, 3000, 32);
  const auto r = algd_train(c, o, s);
  EXPECT_GE(topk_accuracy(r.model, teacher, sample_sphere(5, 2000, 15), 0.1), 0.9);
}
