// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "labelcmp/labelcmp.hpp"

namespace fs = std::filesystem;
using namespace labelcmp;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// 1. argmax winner is never beaten; comparisons are antisymmetric.
void oracle_algebra(Outcome& o) {
  const auto t0 = Clock::now();
  Rng rng(1);
  std::size_t draws = 0, beaten = 0, asym = 0;
  for (int t = 0; t < 100; ++t) {
    const int d = 2 + static_cast<int>(rng.uniform_int(0, 6));
    const int k = 2 + static_cast<int>(rng.uniform_int(0, 18));
    const LinearModel m = random_teacher(d, k, rng.engine()());
    QueryLedger l;
    for (int s = 0; s < 100; ++s, ++draws) {
      const Vector x = rng.gaussian_vector(d);
      const Label y = argmax_query(m, x, l);
      for (Label j = 0; j < k; ++j)
        if (j != y && comparison_query(m, x, j, y, l)) ++beaten;
      const Label a = static_cast<Label>(rng.uniform_int(0, k - 1));
      const Label b = static_cast<Label>((a + 1 + rng.uniform_int(0, k - 2)) % k);
      const bool ab = comparison_query(m, x, a, b, l), ba = comparison_query(m, x, b, a, l);
      const bool tie = class_score(m.weights(), x, a) == class_score(m.weights(), x, b);
      if (tie ? (ab || ba) : (ab == ba)) ++asym;
    }
  }
  const double secs = seconds_since(t0);
  o.detail << "draws=" << draws << " beaten=" << beaten << " antisymmetry_violations=" << asym << " time=" << secs << "s";
  o.check(beaten == 0, "argmax beaten");
  o.check(asym == 0, "antisymmetry");
  o.check(secs < 5, "runtime");
}

// 2. Exact duels on the true graph reproduce the teacher.
void aggregation_exactness(Outcome& o) {
  std::size_t wrong = 0, total = 0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const LinearModel m = random_teacher(5, 20, 1000 + s);
    const auto g = true_graph(m, MonteCarlo{1 << 15, 1e-9, 2000 + s});
    const auto c = exact_classifiers(m, g);
    for (const auto& x : sample_sphere(5, 100000, 3000 + s).points) {
      ++total;
      wrong += aggregate_predict(g, c, x) != argmax_index(scores(m, x));
    }
  }
  o.detail << "points=" << total << " disagreements=" << wrong;
  o.check(wrong == 0, "disagreements");
}

BinaryClassifierSet shifted_thresholds(const std::vector<double>& centers, const NeighborhoodGraph& g,
                                       const std::vector<double>& delta) {
  BinaryClassifierSet c;
  std::size_t n = 0;
  for (const auto& e : g.edges()) {
    const double ci = centers[static_cast<std::size_t>(e.i)], cj = centers[static_cast<std::size_t>(e.j)];
    const double mid = 0.5 * (ci + cj) + delta[n++];
    Vector h(2);
    if (ci < cj) h << -1.0, mid;
    else h << 1.0, -mid;
    c.emplace(e, h);
  }
  return c;
}

// 3. Per-edge errors within eps/|E| keep the aggregate within eps.
void aggregation_error_bound(Outcome& o) {
  Rng rng(3);
  double worst = 0;
  int instances = 0, violations = 0, precondition_misses = 0;
  for (double eps : {0.05, 0.1}) {
    for (int trial = 0; trial < 20; ++trial) {
      const int k = 3 + trial % 10;
      std::vector<double> centers(static_cast<std::size_t>(k));
      for (auto& c : centers) c = rng.uniform(0, 1);
      const auto m = one_dim::centers_to_linear({centers});
      const auto g = true_graph(m, ExactLifted1D{});
      Dataset sample;
      for (int n = 0; n <= 20000; ++n) sample.points.push_back(one_dim::lift(n / 20000.0));
      const double budget = eps / static_cast<double>(g.edge_count());
      for (int pattern = 0; pattern < 3; ++pattern) {
        std::vector<double> delta;
        for (std::size_t e = 0; e < g.edge_count(); ++e) {
          const double sign = pattern == 0 ? 1.0 : pattern == 1 ? -1.0 : (e % 2 ? 1.0 : -1.0);
          delta.push_back(sign * 0.9 * budget);
        }
        const auto r = verify_aggregation_bound(m, g, shifted_thresholds(centers, g, delta), sample, eps);
        ++instances;
        precondition_misses += !r.precondition_met;
        violations += r.violation;
        worst = std::max(worst, r.aggregate_error / eps);
      }
    }
  }
  o.detail << "instances=" << instances << " violations=" << violations
           << " precondition_misses=" << precondition_misses << " worst_error/eps=" << worst;
  o.check(precondition_misses == 0, "per-edge budget");
  o.check(violations == 0, "aggregate error above eps + slack");
}

struct OneDRun {
  int k;
  std::uint64_t comparisons;
  double test_error;
  int max_degree;
};

std::vector<OneDRun> one_dim_runs(double eps) {
  std::vector<OneDRun> runs;
  for (int k : {5, 10, 20, 40})
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
      one_dim::CentersModel cm;
      for (int i = 0; i < k; ++i) cm.centers.push_back(rng.uniform(0, 1));
      const LinearModel teacher = one_dim::centers_to_linear(cm);
      std::vector<double> pool(static_cast<std::size_t>(std::ceil(20.0 * k / eps))), test(20000);
      for (auto& t : pool) t = rng.uniform(0, 1);
      for (auto& t : test) t = rng.uniform(0, 1);
      QueryLedger l;
      LinearOracle oracle(teacher, l);
      const auto r = one_dim::end_to_end_1d(oracle, pool, eps);
      runs.push_back({k, r.comparisons, one_dim::disagreement(r.classifier, teacher, test),
                      std::max(r.learned.graph.max_degree(), one_dim::true_graph(cm).max_degree())});
    }
  return runs;
}

// 4. 1-D learner: error, comparison budget and k log(k/eps) shape.
void one_dim_upper_bound(Outcome& o, const std::vector<OneDRun>& runs, double eps, double secs) {
  std::map<int, double> mean;
  double worst_err = 0;
  bool within_budget = true;
  for (const auto& r : runs) {
    mean[r.k] += static_cast<double>(r.comparisons) / 10.0;
    worst_err = std::max(worst_err, r.test_error);
    within_budget = within_budget && r.comparisons <= 10.0 * r.k * std::log2(r.k / eps);
  }
  // Least-squares c for mean ~ c * k log(k/eps).
  double num = 0, den = 0;
  for (const auto& [k, m] : mean) {
    const double f = k * std::log(k / eps);
    num += m * f;
    den += f * f;
  }
  const double c = num / den;
  double worst_ratio = 1;
  o.detail << "c=" << c;
  for (const auto& [k, m] : mean) {
    const double ratio = m / (c * k * std::log(k / eps));
    worst_ratio = std::max({worst_ratio, ratio, 1 / ratio});
    o.detail << " k=" << k << ":" << m;
  }
  o.detail << " worst_fit_ratio=" << worst_ratio << " worst_test_error=" << worst_err << " time=" << secs << "s";
  o.check(worst_err <= eps, "held-out disagreement");
  o.check(within_budget, "comparison budget");
  o.check(worst_ratio <= 2, "k log(k/eps) fit");
  o.check(secs < 30, "runtime");
}

// 5. Degree bounds in 1-D and the planar edge bound in 3-D.
void degree_bounds(Outcome& o, const std::vector<OneDRun>& runs) {
  int worst1d = 0;
  for (const auto& r : runs) worst1d = std::max(worst1d, r.max_degree);
  int violations = 0, checked = 0;
  for (std::uint64_t seed = 0; seed < 25; ++seed)
    for (int k_hat : {10, 20, 40}) {
      const LinearModel m = random_teacher(3, k_hat, derive_seed(seed, 5));
      const auto g = true_graph(m, MonteCarlo{4096, 1e-9, seed});
      const auto keff = static_cast<long>(g.active_vertices().size());
      if (keff < 3) continue;
      ++checked;
      violations += static_cast<long>(g.edge_count()) > 3 * keff - 6;
    }
  o.detail << "max_1d_degree=" << worst1d << " 3d_graphs=" << checked << " planar_violations=" << violations;
  o.check(worst1d <= 2, "1-D degree");
  o.check(violations == 0, "3k-6 bound");
}

// 6. Sparsity decreases with k_hat; empirical below true.
void sparsity_trend(Outcome& o) {
  SparsityConfig cfg;
  cfg.dims = {5};
  cfg.seed = 0;
  const auto r = sparsity_experiment(cfg);
  bool decreasing = true, ordered = true;
  for (std::size_t i = 0; i < r.cells.size(); ++i) {
    const auto& c = r.cells[i];
    o.detail << " k_hat=" << c.k_hat << ":true=" << c.true_mean << ",emp=" << c.empirical_mean;
    ordered = ordered && c.empirical_mean <= c.true_mean;
    if (i > 0)
      decreasing = decreasing && c.true_mean < r.cells[i - 1].true_mean && c.empirical_mean < r.cells[i - 1].empirical_mean;
  }
  o.check(decreasing, "strict decrease");
  o.check(ordered, "empirical <= true");
}

// 7. AL-GD on the true graph beats passive tournaments; active asks less than passive.
void method_ordering(Outcome& o) {
  const auto t0 = Clock::now();
  SuiteConfig cfg;
  const auto r = run_comparison_suite(cfg);
  const double level = 0.9;
  int algd_wins = 0, active_wins = 0;
  for (std::uint64_t seed : cfg.seeds) {
    std::map<std::string, const ExperimentRun*> by;
    for (const auto& run : r.runs)
      if (run.seed == seed) by[run.method] = &run;
    const auto& passive = *by.at(method_name(Method::PassiveTournament));
    const auto& active = *by.at(method_name(Method::ActiveTournament));
    const auto& algd = *by.at(method_name(Method::AlgdTrue));
    const auto p = first_reaching(passive, level);
    const auto a = first_reaching(active, level);
    o.detail << " seed " << seed << ":";
    if (p) {
      const auto* g = at_round(algd, p->round);
      const bool win = g && g->accuracy >= p->accuracy;
      algd_wins += win;
      o.detail << " passive@" << p->round << "=" << p->accuracy << " algd=" << (g ? g->accuracy : -1.0);
    } else {
      o.detail << " passive never reaches " << level;
    }
    if (p && a) {
      active_wins += a->queries <= p->queries;
      o.detail << " queries active=" << a->queries << " passive=" << p->queries
               << " algd=" << (first_reaching(algd, level) ? first_reaching(algd, level)->queries : 0);
    }
  }
  const double secs = seconds_since(t0);
  o.detail << " algd_wins=" << algd_wins << "/5 active_wins=" << active_wins << "/5 time=" << secs << "s";
  o.check(algd_wins >= 4, "AL-GD vs passive");
  o.check(active_wins == 5, "active vs passive queries");
  o.check(secs < 300, "runtime");
}

// 8. Analytic gradient of the pair loss against central differences.
void gradient_check(Outcome& o) {
  Rng rng(8);
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    const int k = 2 + static_cast<int>(rng.uniform_int(0, 8));
    const int d = 1 + static_cast<int>(rng.uniform_int(0, 7));
    Matrix w(k, d);
    for (int i = 0; i < k; ++i) w.row(i) = rng.gaussian_vector(d).transpose();
    const Vector x = rng.gaussian_vector(d);
    const Label i = static_cast<Label>(rng.uniform_int(0, k - 1));
    const Label j = static_cast<Label>((i + 1 + rng.uniform_int(0, k - 2)) % k);
    const int c = rng.uniform_int(0, 1) ? 1 : -1;
    Matrix grad = Matrix::Zero(k, d), fd(k, d);
    accumulate_pair_gradient(w, x, i, j, c, grad);
    const double h = 1e-5;
    for (int r = 0; r < k; ++r)
      for (int col = 0; col < d; ++col) {
        Matrix wp = w, wm = w;
        wp(r, col) += h;
        wm(r, col) -= h;
        fd(r, col) = (loss_value(wp, x, i, j, c) - loss_value(wm, x, i, j, c)) / (2 * h);
      }
    worst = std::max(worst, (grad - fd).norm() / std::max(1e-12, fd.norm()));
  }
  o.detail << "instances=100 worst_relative_error=" << worst;
  o.check(worst <= 1e-5, "relative error");
}

// 9. Shattering family, counting bound and counterexample.
void theory_checks(Outcome& o) {
  for (int k = 1; k <= 5; ++k) o.check(theory::build_ds_family(k).members.size() == (std::size_t{1} << (2 * k)), "family size");
  for (int k = 1; k <= 3; ++k)
    o.check(theory::verify_shattering(theory::build_ds_family(k), theory::ClosenessMode::ArgmaxOnly).passes,
            "argmax-only shattering k=" + std::to_string(k));
  for (long k = 2; k <= 5; ++k)
    for (long n = k - 1; n <= 12; ++n) {
      std::uint64_t fact = 1, binom = 1;
      for (long i = 2; i <= k; ++i) fact *= static_cast<std::uint64_t>(i);
      for (long i = 0; i < k - 1; ++i) binom = binom * static_cast<std::uint64_t>(n - i) / static_cast<std::uint64_t>(i + 1);
      long q = 0;
      for (std::uint64_t p = 1; p < fact * binom; p *= static_cast<std::uint64_t>(k)) ++q;
      o.check(theory::argmax_query_lower_bound(n, k) == q, "lower bound n=" + std::to_string(n));
    }
  const auto ce = theory::appendix_c_counterexample();
  o.detail << "counterexample teacher=" << ce.teacher_label << " true_graph=" << ce.true_graph_label
           << " empirical_graph=" << ce.empirical_graph_label;
  o.check(ce.reproduces, "counterexample");
}

// 10. Every CLI subcommand is byte-for-byte reproducible.
std::map<std::string, std::string> read_dir(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    files[e.path().filename().string()] = std::string(std::istreambuf_iterator<char>(in), {});
  }
  return files;
}

void cli_determinism(Outcome& o) {
  const fs::path root =
      fs::temp_directory_path() / ("labelcmp_acceptance_" + std::to_string(Clock::now().time_since_epoch().count()));
  fs::create_directories(root);
  {
    Rng rng(10);
    std::ofstream f(root / "labeled.csv");
    for (int n = 0; n < 300; ++n) {
      const int y = n % 3;
      const Vector x = rng.gaussian_vector(8);
      for (int c = 0; c < 8; ++c) f << x[c] + (c == y ? 3.0 : 0.0) << ',';
      f << y << '\n';
    }
    std::ofstream cfg(root / "suite.toml");
    cfg << "[suite]\nd = 4\nk-hat = 8\nn-train = 300\nn-test = 200\nsteps = 300\neval-every = 50\nnum-seeds = 2\n"
           "mc-samples = 1024\n";
  }
  const std::string cli = LABELCMP_CLI;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"sparsity", "sparsity --dims 4 --k-hats 6 12 --trials 3 --n-train 500 --mc-samples 1024"},
      {"suite", "--config " + (root / "suite.toml").string() + " suite"},
      {"verify", "verify"},
      {"teach", "teach --data " + (root / "labeled.csv").string() + " --dim 4 --epochs 5"},
      {"graph", "graph --d 3 --k-hat 8 --mc-samples 1024 --n-train 500"},
      {"oned", "oned --k 6 --eps 0.1 --n-test 2000"}};
  for (const auto& [name, args] : commands) {
    std::map<std::string, std::string> outputs[2];
    bool ran = true;
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = root / (name + std::to_string(rep));
      const std::string cmd = "\"" + cli + "\" --seed 7 --out \"" + out.string() + "\" " + args + " > \"" +
                              (root / (name + ".log")).string() + "\" 2>&1";
      const int status = std::system(cmd.c_str());
      ran = ran && status == 0;
      if (fs::exists(out)) outputs[rep] = read_dir(out);
    }
    const bool same = ran && !outputs[0].empty() && outputs[0] == outputs[1];
    o.detail << " " << name << "=" << (same ? "identical" : ran ? "differs" : "error") << "(" << outputs[0].size()
             << " files)";
    o.check(same, name);
  }
  fs::remove_all(root);
}

}  // namespace

int main() {
  int failures = 0;
  auto run = [&](int id, const std::string& name, const std::function<void(Outcome&)>& body) {
    Outcome o;
    try {
      body(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << id << " " << name << ": " << o.detail.str() << std::endl;
  };

  const double eps = 0.05;
  std::vector<OneDRun> runs;
  double oned_secs = 0;
  run(1, "oracle algebra", oracle_algebra);
  run(2, "aggregation exactness", aggregation_exactness);
  run(3, "aggregation error bound", aggregation_error_bound);
  run(4, "1-D comparison complexity", [&](Outcome& o) {
    const auto t0 = Clock::now();
    runs = one_dim_runs(eps);
    oned_secs = seconds_since(t0);
    one_dim_upper_bound(o, runs, eps, oned_secs);
  });
  run(5, "degree bounds", [&](Outcome& o) { degree_bounds(o, runs); });
  run(6, "sparsity trend", sparsity_trend);
  run(7, "method ordering", method_ordering);
  run(8, "pair-loss gradient", gradient_check);
  run(9, "theory verifiers", theory_checks);
  run(10, "CLI determinism", cli_determinism);
  std::cout << (failures ? "FAILED " : "ALL PASSED ") << failures << " failing criteria" << std::endl;
  return failures ? 1 : 0;
}
