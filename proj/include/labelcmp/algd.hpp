#pragma once

// Margin-gated comparison querying over graph edges, trained with buffered
// gradient steps on a pairwise logistic loss.
//
// For a queried pair (i, j) with answer c in {-1, +1} and margin
// delta = (w_i - w_j) . x, the loss term is log(1 + exp(-c * delta)) and
//   dL/dw_i = -c * sigmoid(-c * delta) * x,   dL/dw_j = -dL/dw_i.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "labelcmp/model.hpp"
#include "labelcmp/neighborhood_graph.hpp"
#include "labelcmp/oracle.hpp"
#include "labelcmp/rng.hpp"

namespace labelcmp {

/// log(1 + exp(z)) without overflow.
inline double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// log(1 + exp(-c (h_i(x) - h_j(x)))).
inline double loss_value(const Matrix& w, const Vector& x, Label i, Label j, int c) {
  if (c != 1 && c != -1) throw std::invalid_argument("loss_value: c must be +1 or -1");
  const double delta = class_score(w, x, i) - class_score(w, x, j);
  return softplus(-c * delta);
}

/// Adds the gradient of one pairwise term to `grad` (same shape as w).
inline void accumulate_pair_gradient(const Matrix& w, const Vector& x, Label i, Label j, int c, Matrix& grad) {
  const double delta = class_score(w, x, i) - class_score(w, x, j);
  const double g = -c * sigmoid(-c * delta);
  grad.row(i) += g * x.transpose();
  grad.row(j) -= g * x.transpose();
}

// ---------------------------------------------------------------------------
// Point streams
// ---------------------------------------------------------------------------

template <class S>
concept PointStream = requires(S& s) {
  { s.next() } -> std::convertible_to<Vector>;
};

/// Yields the points of a dataset in order; throws once exhausted.
class DatasetStream {
 public:
  explicit DatasetStream(const Dataset& data) : data_(&data) {}
  const Vector& next() {
    if (pos_ >= data_->size()) throw std::out_of_range("DatasetStream: stream exhausted");
    return data_->points[pos_++];
  }

 private:
  const Dataset* data_;
  std::size_t pos_ = 0;
};

/// Endless uniform points on the unit sphere.
class SphereStream {
 public:
  SphereStream(int d, std::uint64_t seed) : d_(d), rng_(seed) {}
  Vector next() { return rng_.unit_vector(d_); }

 private:
  int d_;
  Rng rng_;
};

// ---------------------------------------------------------------------------
// Trainer
// ---------------------------------------------------------------------------

enum class EdgeMode { SampleOne, IterateAll };

struct AlgdConfig {
  NeighborhoodGraph graph;
  int buffer_size = 32;
  long steps = 1000;
  double tau = 1.0;  // query when |h_i - h_j| < tau
  double eta = 0.1;
  EdgeMode edge_mode = EdgeMode::IterateAll;
  std::uint64_t seed = 0;

  void validate() const {
    if (graph.empty()) throw std::invalid_argument("AL-GD: graph has no edges");
    if (buffer_size < 1) throw std::invalid_argument("AL-GD: buffer_size must be >= 1");
    if (steps < 0) throw std::invalid_argument("AL-GD: steps must be >= 0");
    if (std::isnan(tau) || tau < 0) throw std::invalid_argument("AL-GD: tau must be >= 0");
    if (!std::isfinite(eta) || !(eta > 0)) throw std::invalid_argument("AL-GD: eta must be finite and positive");
  }
};

struct PairTerm {
  Vector x;
  Label i;
  Label j;
  int c;
};

struct AlgdState {
  Matrix weights;
  std::vector<PairTerm> pending;
  std::uint64_t queries = 0;
  std::uint64_t updates = 0;
  long step = 0;
};

/// One gradient step event: what the trajectory log records.
struct UpdateEvent {
  long step;
  std::uint64_t queries;
  std::uint64_t updates;
  std::size_t terms;
  double loss;
};

class AlgdTrainer {
 public:
  AlgdTrainer(AlgdConfig config, int d) : config_(std::move(config)), rng_(config_.seed) {
    config_.validate();
    state_.weights = Matrix::Zero(config_.graph.k(), d);
  }

  template <ComparisonOracle O>
  void observe(const Vector& x, O& oracle) {
    ++state_.step;
    const auto& edges = config_.graph.edges();
    if (config_.edge_mode == EdgeMode::SampleOne) {
      const auto pick = rng_.uniform_int(0, static_cast<std::int64_t>(edges.size()) - 1);
      consider(x, edges[static_cast<std::size_t>(pick)], oracle);
    } else {
      for (const auto& e : edges) consider(x, e, oracle);
    }
    if (state_.pending.size() >= static_cast<std::size_t>(config_.buffer_size)) flush();
  }

  /// Applies the buffered terms as one gradient step and clears the buffer.
  void flush() {
    if (state_.pending.empty()) return;
    Matrix grad = Matrix::Zero(state_.weights.rows(), state_.weights.cols());
    double loss = 0;
    for (const auto& t : state_.pending) {
      loss += loss_value(state_.weights, t.x, t.i, t.j, t.c);
      accumulate_pair_gradient(state_.weights, t.x, t.i, t.j, t.c, grad);
    }
    state_.weights -= config_.eta * grad;
    ++state_.updates;
    if (on_update) on_update({state_.step, state_.queries, state_.updates, state_.pending.size(), loss});
    state_.pending.clear();
  }

  const AlgdState& state() const { return state_; }
  const AlgdConfig& config() const { return config_; }
  LinearModel model() const { return LinearModel(state_.weights); }

  std::function<void(const UpdateEvent&)> on_update;

 private:
  template <ComparisonOracle O>
  void consider(const Vector& x, const Edge& e, O& oracle) {
    const double delta = class_score(state_.weights, x, e.i) - class_score(state_.weights, x, e.j);
    if (!(std::abs(delta) < config_.tau)) return;
    const int c = oracle.compare(x, e.i, e.j) ? 1 : -1;
    state_.pending.push_back({x, e.i, e.j, c});
    ++state_.queries;
  }

  AlgdConfig config_;
  Rng rng_;
  AlgdState state_;
};

struct TrainResult {
  LinearModel model;
  std::uint64_t queries;
};

/// Runs `config.steps` rounds. `on_step(round, model weights, queries)` fires
/// after each round when provided.
template <ComparisonOracle O, PointStream S>
TrainResult algd_train(const AlgdConfig& config, O& oracle, S& stream,
                       const std::function<void(long, const Matrix&, std::uint64_t)>& on_step = {},
                       const std::function<void(const UpdateEvent&)>& on_update = {}) {
  const int d = [&] {
    if constexpr (requires { oracle.dim(); }) return oracle.dim();
    else return -1;
  }();
  if (d < 1) throw std::invalid_argument("algd_train: oracle must report its input dimension");
  if (config.graph.k() != oracle.num_classes()) throw std::invalid_argument("algd_train: graph/teacher class count mismatch");
  AlgdTrainer trainer(config, d);
  trainer.on_update = on_update;
  for (long t = 0; t < config.steps; ++t) {
    trainer.observe(stream.next(), oracle);
    if (on_step) on_step(t + 1, trainer.state().weights, trainer.state().queries);
  }
  return {trainer.model(), trainer.state().queries};
}

}  // namespace labelcmp
