// A random 5-class teacher in R^3 is learned from pairwise comparisons only,
// then checked against the teacher on fresh points.

#include <iostream>

#include "labelcmp/labelcmp.hpp"

using namespace labelcmp;

int main() {
  const LinearModel teacher = random_teacher(3, 5, 7);
  const Dataset train = sample_sphere(3, 4000, 11);
  const Dataset test = sample_sphere(3, 2000, 13);

  const NeighborhoodGraph g = empirical_graph(teacher, train);
  std::cout << "empirical graph: " << g.edge_count() << " of " << 5 * 4 / 2 << " pairs\n";

  QueryLedger ledger;
  LinearOracle oracle(teacher, ledger);
  DatasetStream stream(train);
  AlgdConfig cfg;
  cfg.graph = g;
  cfg.steps = static_cast<long>(train.size());
  cfg.tau = 1.0;
  cfg.eta = 0.1;
  const TrainResult r = algd_train(cfg, oracle, stream);

  std::size_t agree = 0;
  for (const auto& x : test.points)
    if (argmax_index(scores(r.model, x)) == argmax_index(scores(teacher, x))) ++agree;
  std::cout << "comparisons: " << r.queries << "\n"
            << "top-1 agreement: " << static_cast<double>(agree) / static_cast<double>(test.size()) << "\n";

  // Exact pairwise classifiers on the true graph reproduce the teacher.
  const auto gt = true_graph(teacher, MonteCarlo{});
  const auto c = exact_classifiers(teacher, gt);
  std::size_t exact = 0;
  for (const auto& x : test.points)
    if (aggregate_predict(gt, c, x) == argmax_index(scores(teacher, x))) ++exact;
  std::cout << "aggregate of exact duels: " << exact << "/" << test.size() << " correct\n";
}
