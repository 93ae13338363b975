#pragma once

// Tournament baselines: spend comparisons to recover the argmax, then train on
// it as an ordinary labeled example.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "labelcmp/algd.hpp"
#include "labelcmp/model.hpp"
#include "labelcmp/oracle.hpp"

namespace labelcmp {

enum class AnsweredBy { Oracle, Model };

struct Duel {
  Label champion;
  Label challenger;
  AnsweredBy by;
};

struct TournamentResult {
  Label winner = 0;
  std::vector<Duel> duels;
  std::uint64_t oracle_queries = 0;
};

/// Sequential scan: the champion meets labels 1..k-1 in order and is replaced
/// only when the challenger strictly wins. Exactly k-1 oracle comparisons.
template <ComparisonOracle O>
TournamentResult champion_tournament(O& oracle, const Vector& x) {
  const int k = oracle.num_classes();
  if (k < 2) throw std::invalid_argument("champion_tournament: need k >= 2");
  TournamentResult r;
  for (Label c = 1; c < k; ++c) {
    r.duels.push_back({r.winner, c, AnsweredBy::Oracle});
    ++r.oracle_queries;
    if (oracle.compare(x, c, r.winner)) r.winner = c;
  }
  return r;
}

/// Like champion_tournament, but a duel is settled by the student whenever its
/// margin |h_i - h_j| is at least tau. Only the rest reach the oracle.
template <ComparisonOracle O>
TournamentResult active_tournament(const Matrix& student, O& oracle, const Vector& x, double tau) {
  const int k = oracle.num_classes();
  if (k < 2) throw std::invalid_argument("active_tournament: need k >= 2");
  if (student.rows() != k) throw std::invalid_argument("active_tournament: student/teacher class count mismatch");
  const Vector s = scores(student, x);
  TournamentResult r;
  for (Label c = 1; c < k; ++c) {
    const double margin = s[c] - s[r.winner];
    bool challenger_wins;
    if (std::abs(margin) >= tau) {
      r.duels.push_back({r.winner, c, AnsweredBy::Model});
      challenger_wins = margin > 0;
    } else {
      r.duels.push_back({r.winner, c, AnsweredBy::Oracle});
      ++r.oracle_queries;
      challenger_wins = oracle.compare(x, c, r.winner);
    }
    if (challenger_wins) r.winner = c;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Accumulating-buffer softmax trainer
// ---------------------------------------------------------------------------

/// Softmax cross-entropy -log p_y(Wx), gradient (p - e_y) x^T.
inline void accumulate_softmax_gradient(const Matrix& w, const Vector& x, Label y, Matrix& grad) {
  Vector s = scores(w, x);
  s.array() -= s.maxCoeff();
  Vector p = s.array().exp();
  p /= p.sum();
  p[y] -= 1.0;
  grad.noalias() += p * x.transpose();
}

inline double softmax_loss(const Matrix& w, const Vector& x, Label y) {
  const Vector s = scores(w, x);
  const double m = s.maxCoeff();
  return m + std::log((s.array() - m).exp().sum()) - s[y];
}

/// Buffers labeled terms and applies their summed gradient once full.
class SoftmaxBufferTrainer {
 public:
  SoftmaxBufferTrainer(int k, int d, int buffer_size, double eta) : w_(Matrix::Zero(k, d)), buffer_size_(buffer_size), eta_(eta) {
    if (buffer_size < 1) throw std::invalid_argument("buffer_size must be >= 1");
    if (!std::isfinite(eta) || !(eta > 0)) throw std::invalid_argument("eta must be finite and positive");
  }

  void add(const Vector& x, Label y) { pending_.push_back({x, y}); }

  bool full() const { return pending_.size() >= static_cast<std::size_t>(buffer_size_); }

  /// Returns the summed loss of the applied terms.
  double flush() {
    if (pending_.empty()) return 0.0;
    Matrix grad = Matrix::Zero(w_.rows(), w_.cols());
    double loss = 0;
    for (const auto& [x, y] : pending_) {
      loss += softmax_loss(w_, x, y);
      accumulate_softmax_gradient(w_, x, y, grad);
    }
    w_ -= eta_ * grad;
    pending_.clear();
    ++updates_;
    return loss;
  }

  const Matrix& weights() const { return w_; }
  std::size_t pending() const { return pending_.size(); }
  std::uint64_t updates() const { return updates_; }

 private:
  struct Term {
    Vector x;
    Label y;
  };
  Matrix w_;
  int buffer_size_;
  double eta_;
  std::vector<Term> pending_;
  std::uint64_t updates_ = 0;
};

struct TournamentLearnerConfig {
  double theta = 0.1;  // reveal x when top1 - top2 < theta
  double tau = std::numeric_limits<double>::infinity();  // duel margin (active only)
  int buffer_size = 32;
  long steps = 1000;
  double eta = 0.1;
};

namespace detail {

template <ComparisonOracle O, PointStream S, class Reveal>
TrainResult tournament_learner(const TournamentLearnerConfig& cfg, O& oracle, S& stream, Reveal reveal,
                               const std::function<void(long, const Matrix&, std::uint64_t)>& on_step,
                               const std::function<void(const UpdateEvent&)>& on_update) {
  if (cfg.steps < 0) throw std::invalid_argument("tournament learner: steps must be >= 0");
  if (std::isnan(cfg.theta) || cfg.theta < 0) throw std::invalid_argument("tournament learner: theta must be >= 0");
  const int d = oracle.dim();
  SoftmaxBufferTrainer trainer(oracle.num_classes(), d, cfg.buffer_size, cfg.eta);
  std::uint64_t queries = 0;
  for (long t = 1; t <= cfg.steps; ++t) {
    const Vector x = stream.next();
    const Vector s = scores(trainer.weights(), x);
    const auto [first, second] = top_two(s);
    if (s[first] - s[second] < cfg.theta) {
      const TournamentResult r = reveal(trainer.weights(), x);
      queries += r.oracle_queries;
      trainer.add(x, r.winner);
      if (trainer.full()) {
        const std::size_t terms = trainer.pending();
        const double loss = trainer.flush();
        if (on_update) on_update({t, queries, trainer.updates(), terms, loss});
      }
    }
    if (on_step) on_step(t, trainer.weights(), queries);
  }
  return {LinearModel(trainer.weights()), queries};
}

}  // namespace detail

/// Uncertainty sampling on the student's top-two gap; the argmax of each
/// selected point is revealed by a full champion tournament.
template <ComparisonOracle O, PointStream S>
TrainResult passive_tournament_learner(const TournamentLearnerConfig& cfg, O& oracle, S& stream,
                                       const std::function<void(long, const Matrix&, std::uint64_t)>& on_step = {},
                                       const std::function<void(const UpdateEvent&)>& on_update = {}) {
  return detail::tournament_learner(
      cfg, oracle, stream, [&](const Matrix&, const Vector& x) { return champion_tournament(oracle, x); }, on_step,
      on_update);
}

/// As above, but the student settles the duels it is confident about.
template <ComparisonOracle O, PointStream S>
TrainResult active_tournament_learner(const TournamentLearnerConfig& cfg, O& oracle, S& stream,
                                      const std::function<void(long, const Matrix&, std::uint64_t)>& on_step = {},
                                      const std::function<void(const UpdateEvent&)>& on_update = {}) {
  return detail::tournament_learner(
      cfg, oracle, stream,
      [&](const Matrix& w, const Vector& x) { return active_tournament(w, oracle, x, cfg.tau); }, on_step,
      on_update);
}

}  // namespace labelcmp
