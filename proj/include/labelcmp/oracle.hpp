#pragma once

// Supervision oracles over a linear teacher, with query accounting.

#include <concepts>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>

#include "labelcmp/model.hpp"
#include "labelcmp/rng.hpp"

namespace labelcmp {

/// Oracle call counters for one learner run. Counts only ever grow.
struct QueryLedger {
  std::uint64_t comparisons = 0;
  std::uint64_t argmaxes = 0;

  std::uint64_t total() const { return comparisons + argmaxes; }
};

/// Argmax oracle: top-scoring class, lowest index on ties.
inline Label argmax_query(const LinearModel& model, const Vector& x, QueryLedger& ledger) {
  const Label y = argmax_index(scores(model, x));
  ++ledger.argmaxes;
  return y;
}

/// Comparison oracle: true iff class j1 scores strictly above class j2 at x.
inline bool comparison_query(const LinearModel& model, const Vector& x, Label j1, Label j2,
                             QueryLedger& ledger) {
  if (j1 == j2) throw std::invalid_argument("comparison_query: a class cannot duel itself");
  if (j1 < 0 || j2 < 0 || j1 >= model.k() || j2 >= model.k())
    throw std::invalid_argument("comparison_query: class index out of range");
  if (x.size() != model.d()) throw std::invalid_argument("comparison_query: dimension mismatch");
  const bool answer = class_score(model.weights(), x, j1) > class_score(model.weights(), x, j2);
  ++ledger.comparisons;
  return answer;
}

/// Anything the learners can ask "does j1 beat j2 at x?".
template <class O>
concept ComparisonOracle = requires(O& o, const Vector& x, Label a, Label b) {
  { o.compare(x, a, b) } -> std::same_as<bool>;
  { o.num_classes() } -> std::convertible_to<int>;
  { o.ledger() } -> std::convertible_to<const QueryLedger&>;
};

/// A linear teacher bound to the ledger of one run.
class LinearOracle {
 public:
  LinearOracle(const LinearModel& teacher, QueryLedger& ledger) : teacher_(&teacher), ledger_(&ledger) {}

  bool compare(const Vector& x, Label j1, Label j2) { return comparison_query(*teacher_, x, j1, j2, *ledger_); }
  Label argmax(const Vector& x) { return argmax_query(*teacher_, x, *ledger_); }

  int num_classes() const { return teacher_->k(); }
  int dim() const { return teacher_->d(); }
  const LinearModel& teacher() const { return *teacher_; }
  QueryLedger& ledger() { return *ledger_; }
  const QueryLedger& ledger() const { return *ledger_; }

 private:
  const LinearModel* teacher_;
  QueryLedger* ledger_;
};

static_assert(ComparisonOracle<LinearOracle>);

/// n i.i.d. uniform points on the unit sphere in R^d.
inline Dataset sample_sphere(int d, std::size_t n, std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("sample_sphere: d must be >= 1");
  Rng rng(seed);
  Dataset ds;
  ds.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ds.points.push_back(rng.unit_vector(d));
  return ds;
}

/// Classes attained as argmax somewhere on the dataset. Not an oracle call.
inline std::set<Label> effective_classes(const LinearModel& model, const Dataset& data) {
  if (data.empty()) throw std::invalid_argument("effective_classes: empty dataset");
  std::set<Label> out;
  for (const auto& x : data.points) out.insert(argmax_index(scores(model, x)));
  return out;
}

}  // namespace labelcmp
