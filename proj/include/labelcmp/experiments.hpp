#pragma once

// Simulation harness: synthetic teachers, graph sparsity statistics, and
// accuracy-versus-comparisons trajectories for the competing learners.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "labelcmp/algd.hpp"
#include "labelcmp/baselines.hpp"
#include "labelcmp/model.hpp"
#include "labelcmp/neighborhood_graph.hpp"
#include "labelcmp/oracle.hpp"
#include "labelcmp/rng.hpp"

namespace labelcmp {

/// k_hat i.i.d. Gaussian rows, each scaled to unit length.
inline LinearModel random_teacher(int d, int k_hat, std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("random_teacher: d must be >= 1");
  if (k_hat < 2) throw std::invalid_argument("random_teacher: need at least 2 classes");
  Rng rng(seed);
  Matrix w(k_hat, d);
  for (int i = 0; i < k_hat; ++i) w.row(i) = rng.unit_vector(d).transpose();
  return LinearModel(std::move(w));
}

/// K = max(1, ceil(fraction * k)), computed without floating-point creep
/// (0.1 * 30 is 3, not 4).
inline int topk_size(double fraction, int k) {
  if (!(fraction > 0) || fraction > 1) throw std::invalid_argument("topk: fraction must lie in (0, 1]");
  const double raw = fraction * k;
  const double nearest = std::round(raw);
  const double kk = std::abs(raw - nearest) <= 1e-9 * std::max(1.0, raw) ? nearest : std::ceil(raw);
  return std::clamp(static_cast<int>(kk), 1, k);
}

/// Position of class y in the student's ranking (descending score, index ties).
inline int rank_of(const Vector& s, Label y) {
  int rank = 0;
  for (Label r = 0; r < s.size(); ++r)
    if (s[r] > s[y] || (s[r] == s[y] && r < y)) ++rank;
  return rank;
}

/// Fraction of points whose teacher argmax is among the student's top K.
inline double topk_accuracy(const Matrix& student, const LinearModel& teacher, const Dataset& test, double fraction) {
  if (test.empty()) throw std::invalid_argument("topk_accuracy: empty test set");
  if (student.rows() != teacher.k()) throw std::invalid_argument("topk_accuracy: class count mismatch");
  const int K = topk_size(fraction, teacher.k());
  std::size_t hits = 0;
  for (const auto& x : test.points) {
    const Label y = argmax_index(scores(teacher, x));
    if (rank_of(scores(student, x), y) < K) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(test.size());
}

inline double topk_accuracy(const LinearModel& student, const LinearModel& teacher, const Dataset& test,
                            double fraction) {
  return topk_accuracy(student.weights(), teacher, test, fraction);
}

/// Classes owning a point of `data` or touching an edge of `g`.
inline std::set<Label> effective_vertex_set(const LinearModel& teacher, const Dataset& data,
                                            const NeighborhoodGraph& g) {
  std::set<Label> v = effective_classes(teacher, data);
  for (Label a : g.active_vertices()) v.insert(a);
  return v;
}

// ---------------------------------------------------------------------------
// Graph sparsity study
// ---------------------------------------------------------------------------

struct SparsityConfig {
  std::vector<int> dims{5, 7};
  std::vector<int> k_hats{10, 20, 40, 80};
  int trials = 25;
  std::size_t n_train = 2000;
  std::uint64_t seed = 0;
  MonteCarlo mc{};
};

struct SparsityTrial {
  int d = 0;
  int k_hat = 0;
  int trial = 0;
  int k_eff = 0;
  std::size_t true_edges = 0;
  std::size_t empirical_edges = 0;
  double true_sparsity = 0;
  double empirical_sparsity = 0;
  bool mc_miss = false;  // empirical edge absent from the Monte-Carlo true graph
};

struct SparsityCell {
  int d = 0;
  int k_hat = 0;
  int trials = 0;
  double mean_k_eff = 0;
  double true_mean = 0, true_stderr = 0;
  double empirical_mean = 0, empirical_stderr = 0;
  int mc_miss_trials = 0;
};

struct SparsityResult {
  std::vector<SparsityTrial> trials;
  std::vector<SparsityCell> cells;
};

inline SparsityTrial sparsity_trial(int d, int k_hat, int trial, const SparsityConfig& cfg) {
  const std::uint64_t base = derive_seed(cfg.seed, (static_cast<std::uint64_t>(d) << 40) ^
                                                        (static_cast<std::uint64_t>(k_hat) << 20) ^
                                                        static_cast<std::uint64_t>(trial));
  const LinearModel teacher = random_teacher(d, k_hat, derive_seed(base, 1));
  const Dataset train = sample_sphere(d, cfg.n_train, derive_seed(base, 2));
  MonteCarlo mc = cfg.mc;
  mc.seed = derive_seed(base, 3);
  const NeighborhoodGraph gt = true_graph(teacher, mc);
  const NeighborhoodGraph ge = empirical_graph(teacher, train);

  SparsityTrial t{d, k_hat, trial};
  const auto vertices = effective_vertex_set(teacher, train, gt);
  t.k_eff = static_cast<int>(vertices.size());
  t.true_edges = gt.edge_count();
  t.empirical_edges = ge.edge_count();
  t.mc_miss = !ge.is_subgraph_of(gt);
  if (t.k_eff >= 2) {
    t.true_sparsity = sparsity_level(gt.induced(vertices));
    t.empirical_sparsity = sparsity_level(ge.induced(vertices));
  }
  return t;
}

inline void mean_stderr(const std::vector<double>& v, double& mean, double& stderr_out) {
  mean = 0;
  stderr_out = 0;
  if (v.empty()) return;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return;
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  stderr_out = std::sqrt(ss / static_cast<double>(v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
}

inline SparsityResult sparsity_experiment(const SparsityConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("sparsity_experiment: trials must be >= 1");
  SparsityResult out;
  for (int d : cfg.dims) {
    for (int k_hat : cfg.k_hats) {
      std::vector<double> ts, es, ks;
      SparsityCell cell{d, k_hat, cfg.trials};
      for (int trial = 0; trial < cfg.trials; ++trial) {
        const SparsityTrial t = sparsity_trial(d, k_hat, trial, cfg);
        out.trials.push_back(t);
        ts.push_back(t.true_sparsity);
        es.push_back(t.empirical_sparsity);
        ks.push_back(t.k_eff);
        cell.mc_miss_trials += t.mc_miss ? 1 : 0;
      }
      double unused = 0;
      mean_stderr(ks, cell.mean_k_eff, unused);
      mean_stderr(ts, cell.true_mean, cell.true_stderr);
      mean_stderr(es, cell.empirical_mean, cell.empirical_stderr);
      out.cells.push_back(cell);
    }
  }
  return out;
}

inline void write_sparsity_trials_csv(std::ostream& out, const SparsityResult& r) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "d,k_hat,trial,k_eff,true_edges,empirical_edges,true_sparsity,empirical_sparsity,mc_miss\n";
  for (const auto& t : r.trials)
    out << t.d << ',' << t.k_hat << ',' << t.trial << ',' << t.k_eff << ',' << t.true_edges << ','
        << t.empirical_edges << ',' << t.true_sparsity << ',' << t.empirical_sparsity << ',' << (t.mc_miss ? 1 : 0)
        << '\n';
}

inline void write_sparsity_summary_csv(std::ostream& out, const SparsityResult& r) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "d,k_hat,trials,mean_k_eff,true_sparsity_mean,true_sparsity_stderr,empirical_sparsity_mean,"
         "empirical_sparsity_stderr,mc_miss_trials\n";
  for (const auto& c : r.cells)
    out << c.d << ',' << c.k_hat << ',' << c.trials << ',' << c.mean_k_eff << ',' << c.true_mean << ','
        << c.true_stderr << ',' << c.empirical_mean << ',' << c.empirical_stderr << ',' << c.mc_miss_trials << '\n';
}

// ---------------------------------------------------------------------------
// Method comparison suite
// ---------------------------------------------------------------------------

enum class Method { AlgdTrue, AlgdEmpirical, AlgdComplete, PassiveTournament, ActiveTournament };

inline std::string method_name(Method m) {
  switch (m) {
    case Method::AlgdTrue: return "algd_true";
    case Method::AlgdEmpirical: return "algd_empirical";
    case Method::AlgdComplete: return "algd_complete";
    case Method::PassiveTournament: return "passive_tournament";
    case Method::ActiveTournament: return "active_tournament";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  for (Method m : {Method::AlgdTrue, Method::AlgdEmpirical, Method::AlgdComplete, Method::PassiveTournament,
                   Method::ActiveTournament})
    if (method_name(m) == s) return m;
  throw std::invalid_argument("unknown method '" + s + "'");
}

struct SuiteConfig {
  int d = 5;
  int k_hat = 30;
  std::size_t n_train = 6000;
  std::size_t n_test = 2000;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::vector<Method> methods{Method::AlgdTrue, Method::AlgdEmpirical, Method::AlgdComplete,
                              Method::PassiveTournament, Method::ActiveTournament};
  long steps = 6000;     // rounds; one streamed point per round
  long eval_every = 100;
  int buffer_size = 32;  // shared by every method
  // AL-GD
  double algd_tau = 1.0;
  double algd_eta = 0.05;
  EdgeMode edge_mode = EdgeMode::IterateAll;
  // tournaments
  double theta = 0.5;
  double duel_tau = 1.0;
  double tournament_eta = 0.05;
  double topk_fraction = 0.1;
  MonteCarlo mc{};
  std::vector<double> accuracy_levels{0.5, 0.6, 0.7, 0.8, 0.9};

  void validate() const {
    if (d < 1 || k_hat < 2 || n_train == 0 || n_test == 0) throw std::invalid_argument("suite: sizes must be positive");
    if (methods.empty()) throw std::invalid_argument("suite: no methods");
    if (seeds.empty()) throw std::invalid_argument("suite: no seeds");
    if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
      throw std::invalid_argument("suite: seeds must be distinct");
    if (steps < 1 || eval_every < 1) throw std::invalid_argument("suite: steps and eval_every must be >= 1");
    if (static_cast<std::size_t>(steps) > n_train) throw std::invalid_argument("suite: steps exceeds n_train");
  }

  nlohmann::json to_json() const {
    std::vector<std::string> names;
    for (Method m : methods) names.push_back(method_name(m));
    return {{"d", d},
            {"k_hat", k_hat},
            {"n_train", n_train},
            {"n_test", n_test},
            {"seeds", seeds},
            {"methods", names},
            {"steps", steps},
            {"eval_every", eval_every},
            {"buffer_size", buffer_size},
            {"algd_tau", algd_tau},
            {"algd_eta", algd_eta},
            {"edge_mode", edge_mode == EdgeMode::IterateAll ? "iterate-all" : "sample-one"},
            {"theta", theta},
            {"duel_tau", duel_tau},
            {"tournament_eta", tournament_eta},
            {"topk_fraction", topk_fraction},
            {"mc_samples", mc.samples},
            {"mc_tol", mc.tol},
            {"accuracy_levels", accuracy_levels}};
  }
};

struct TrajectoryPoint {
  long round = 0;
  std::uint64_t queries = 0;
  double accuracy = 0;
};

struct ExperimentRun {
  std::string method;
  std::uint64_t seed = 0;
  std::vector<TrajectoryPoint> trajectory;
  std::size_t true_edges = 0;
  std::size_t empirical_edges = 0;
  int k_eff = 0;
  bool mc_miss = false;
  std::uint64_t ledger_comparisons = 0;
  std::string error;  // non-empty if the cell failed
};

/// Teacher, data and graphs shared by every method of one seed.
struct SuiteInstance {
  LinearModel teacher;
  Dataset train;
  Dataset test;
  NeighborhoodGraph true_graph;
  NeighborhoodGraph empirical_graph;
};

inline SuiteInstance make_synthetic_instance(const SuiteConfig& cfg, std::uint64_t seed) {
  LinearModel teacher = random_teacher(cfg.d, cfg.k_hat, derive_seed(seed, 1));
  Dataset train = sample_sphere(cfg.d, cfg.n_train, derive_seed(seed, 2));
  Dataset test = sample_sphere(cfg.d, cfg.n_test, derive_seed(seed, 3));
  MonteCarlo mc = cfg.mc;
  mc.seed = derive_seed(seed, 4);
  NeighborhoodGraph gt = labelcmp::true_graph(teacher, mc);
  NeighborhoodGraph ge = labelcmp::empirical_graph(teacher, train);
  return {std::move(teacher), std::move(train), std::move(test), std::move(gt), std::move(ge)};
}

/// Runs one method on one instance, recording accuracy every `eval_every` rounds
/// and at the last round. The query axis is the ledger count.
inline ExperimentRun run_method(const SuiteConfig& cfg, const SuiteInstance& inst, Method method, std::uint64_t seed) {
  ExperimentRun run;
  run.method = method_name(method);
  run.seed = seed;
  run.true_edges = inst.true_graph.edge_count();
  run.empirical_edges = inst.empirical_graph.edge_count();
  run.k_eff = static_cast<int>(effective_vertex_set(inst.teacher, inst.train, inst.true_graph).size());
  run.mc_miss = !inst.empirical_graph.is_subgraph_of(inst.true_graph);

  QueryLedger ledger;
  LinearOracle oracle(inst.teacher, ledger);
  DatasetStream stream(inst.train);
  const int k = inst.teacher.k();
  auto on_step = [&](long t, const Matrix& w, std::uint64_t) {
    if (t % cfg.eval_every == 0 || t == cfg.steps)
      run.trajectory.push_back({t, ledger.comparisons, topk_accuracy(w, inst.teacher, inst.test, cfg.topk_fraction)});
  };
  try {
    switch (method) {
      case Method::AlgdTrue:
      case Method::AlgdEmpirical:
      case Method::AlgdComplete: {
        AlgdConfig ac;
        ac.graph = method == Method::AlgdTrue        ? inst.true_graph
                   : method == Method::AlgdEmpirical ? inst.empirical_graph
                                                     : NeighborhoodGraph::complete(k);
        ac.buffer_size = cfg.buffer_size;
        ac.steps = cfg.steps;
        ac.tau = cfg.algd_tau;
        ac.eta = cfg.algd_eta;
        ac.edge_mode = cfg.edge_mode;
        ac.seed = derive_seed(seed, 5);
        algd_train(ac, oracle, stream, on_step);
        break;
      }
      case Method::PassiveTournament:
      case Method::ActiveTournament: {
        TournamentLearnerConfig tc;
        tc.theta = cfg.theta;
        tc.tau = cfg.duel_tau;
        tc.buffer_size = cfg.buffer_size;
        tc.steps = cfg.steps;
        tc.eta = cfg.tournament_eta;
        if (method == Method::PassiveTournament) passive_tournament_learner(tc, oracle, stream, on_step);
        else active_tournament_learner(tc, oracle, stream, on_step);
        break;
      }
    }
  } catch (const std::exception& e) {
    run.error = e.what();
  }
  run.ledger_comparisons = ledger.comparisons;
  return run;
}

struct SuiteResult {
  SuiteConfig config;
  std::vector<ExperimentRun> runs;  // seed-major, then method order
};

inline SuiteResult run_comparison_suite(const SuiteConfig& cfg) {
  cfg.validate();
  SuiteResult out{cfg, {}};
  for (std::uint64_t seed : cfg.seeds) {
    const SuiteInstance inst = make_synthetic_instance(cfg, seed);
    for (Method m : cfg.methods) out.runs.push_back(run_method(cfg, inst, m, seed));
  }
  return out;
}

/// Suite on a fixed teacher and fixed data (e.g. a projected real dataset).
/// Seeds reshuffle the training stream.
inline SuiteResult run_comparison_suite(const SuiteConfig& cfg, const LinearModel& teacher, const Dataset& train,
                                        const Dataset& test) {
  cfg.validate();
  SuiteResult out{cfg, {}};
  MonteCarlo mc = cfg.mc;
  const NeighborhoodGraph gt = true_graph(teacher, mc);
  const NeighborhoodGraph ge = empirical_graph(teacher, train);
  for (std::uint64_t seed : cfg.seeds) {
    Dataset shuffled = train;
    Rng rng(derive_seed(seed, 6));
    for (std::size_t i = shuffled.size(); i > 1; --i)
      std::swap(shuffled.points[i - 1], shuffled.points[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
    shuffled.labels.reset();
    const SuiteInstance inst{teacher, std::move(shuffled), test, gt, ge};
    for (Method m : cfg.methods) out.runs.push_back(run_method(cfg, inst, m, seed));
  }
  return out;
}

/// First checkpoint reaching `level`, if any.
inline std::optional<TrajectoryPoint> first_reaching(const ExperimentRun& run, double level) {
  for (const auto& p : run.trajectory)
    if (p.accuracy >= level) return p;
  return std::nullopt;
}

/// Accuracy at the last checkpoint whose cumulative comparisons do not exceed `budget`.
inline double accuracy_at_budget(const ExperimentRun& run, std::uint64_t budget) {
  double acc = 0.0;
  for (const auto& p : run.trajectory) {
    if (p.queries > budget) break;
    acc = p.accuracy;
  }
  return acc;
}

inline const TrajectoryPoint* at_round(const ExperimentRun& run, long round) {
  for (const auto& p : run.trajectory)
    if (p.round == round) return &p;
  return nullptr;
}

inline void write_trajectories_csv(std::ostream& out, const SuiteResult& r) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "method,seed,round,comparisons,topk_accuracy\n";
  for (const auto& run : r.runs)
    for (const auto& p : run.trajectory)
      out << run.method << ',' << run.seed << ',' << p.round << ',' << p.queries << ',' << p.accuracy << '\n';
}

/// Per method and checkpoint: mean comparisons and mean accuracy over seeds.
inline void write_mean_trajectory_csv(std::ostream& out, const SuiteResult& r) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "method,round,mean_comparisons,mean_topk_accuracy,runs\n";
  for (Method m : r.config.methods) {
    std::map<long, std::vector<const TrajectoryPoint*>> by_round;
    for (const auto& run : r.runs)
      if (run.method == method_name(m) && run.error.empty())
        for (const auto& p : run.trajectory) by_round[p.round].push_back(&p);
    for (const auto& [round, pts] : by_round) {
      double q = 0, a = 0;
      for (const auto* p : pts) {
        q += static_cast<double>(p->queries);
        a += p->accuracy;
      }
      out << method_name(m) << ',' << round << ',' << q / pts.size() << ',' << a / pts.size() << ',' << pts.size()
          << '\n';
    }
  }
}

/// For every accuracy level: first round and comparisons at which each run reaches it.
inline void write_matched_accuracy_csv(std::ostream& out, const SuiteResult& r) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "level,method,seed,reached,round,comparisons\n";
  for (double level : r.config.accuracy_levels)
    for (const auto& run : r.runs) {
      const auto p = first_reaching(run, level);
      out << level << ',' << run.method << ',' << run.seed << ',' << (p ? 1 : 0) << ',' << (p ? p->round : -1) << ','
          << (p ? static_cast<long long>(p->queries) : -1LL) << '\n';
    }
}

inline nlohmann::json suite_manifest(const SuiteResult& r) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& run : r.runs) {
    nlohmann::json j{{"method", run.method},
                     {"seed", run.seed},
                     {"true_edges", run.true_edges},
                     {"empirical_edges", run.empirical_edges},
                     {"k_eff", run.k_eff},
                     {"mc_miss", run.mc_miss},
                     {"comparisons", run.ledger_comparisons},
                     {"final_accuracy", run.trajectory.empty() ? 0.0 : run.trajectory.back().accuracy}};
    if (!run.error.empty()) j["error"] = run.error;
    runs.push_back(std::move(j));
  }
  return {{"config", r.config.to_json()}, {"runs", std::move(runs)}};
}

// ---------------------------------------------------------------------------
// Real-data pipeline: ingestion, random projection, teacher fitting
// ---------------------------------------------------------------------------

/// Gaussian matrix (input_dim x d), entries N(0, 1/d).
inline Matrix gaussian_projection(int input_dim, int d, std::uint64_t seed) {
  if (input_dim < 1 || d < 1) throw std::invalid_argument("gaussian_projection: dimensions must be >= 1");
  Rng rng(seed);
  Matrix p(input_dim, d);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < input_dim; ++r) p(r, c) = scale * rng.normal();
  return p;
}

/// x -> P^T x for every point. Labels are carried over unchanged.
inline Dataset project(const Dataset& data, const Matrix& projection) {
  Dataset out;
  out.labels = data.labels;
  out.points.reserve(data.size());
  for (const auto& x : data.points) {
    if (x.size() != projection.rows()) throw std::invalid_argument("project: dimension mismatch");
    out.points.push_back(projection.transpose() * x);
  }
  return out;
}

struct ProjectedData {
  Dataset data;
  Matrix projection;
};

inline ProjectedData ingest_and_project(const std::string& path, int d, std::uint64_t seed, bool has_labels,
                                        const std::optional<Matrix>& projection_override = std::nullopt) {
  Dataset raw = load_csv_dataset(path, has_labels);
  if (raw.empty()) throw std::runtime_error("ingest_and_project: no rows in " + path);
  Matrix p = projection_override ? *projection_override : gaussian_projection(raw.dim(), d, seed);
  Dataset projected = project(raw, p);
  return {std::move(projected), std::move(p)};
}

/// Multinomial logistic regression by per-example SGD, reshuffled every epoch.
/// The class count is the largest label plus one unless given.
inline LinearModel fit_linear_teacher(const Dataset& data, int epochs, double eta, std::uint64_t seed,
                                      std::optional<int> k = std::nullopt) {
  if (!data.labels) throw std::invalid_argument("fit_linear_teacher: dataset has no labels");
  if (data.empty()) throw std::invalid_argument("fit_linear_teacher: empty dataset");
  if (epochs < 0) throw std::invalid_argument("fit_linear_teacher: epochs must be >= 0");
  const auto& y = *data.labels;
  const int classes = k ? *k : *std::max_element(y.begin(), y.end()) + 1;
  data.validate(classes);
  if (std::set<Label>(y.begin(), y.end()).size() < 2)
    throw std::invalid_argument("fit_linear_teacher: need at least two distinct classes");
  Matrix w = Matrix::Zero(std::max(classes, 2), data.dim());
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  Matrix grad(w.rows(), w.cols());
  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
    for (std::size_t n : order) {
      grad.setZero();
      accumulate_softmax_gradient(w, data.points[n], y[n], grad);
      w -= eta * grad;
    }
  }
  return LinearModel(std::move(w));
}

inline double training_accuracy(const LinearModel& model, const Dataset& data) {
  if (!data.labels || data.empty()) throw std::invalid_argument("training_accuracy: need labeled data");
  std::size_t hits = 0;
  for (std::size_t n = 0; n < data.size(); ++n)
    if (argmax_index(scores(model, data.points[n])) == (*data.labels)[n]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

}  // namespace labelcmp
