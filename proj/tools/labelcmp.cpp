// Command-line front end: sparsity, suite, verify, teach, graph, oned.
//
// Every subcommand writes CSV tables and a JSON manifest into --out, and exits
// with status 1 when one of its built-in checks fails (2 on usage or I/O errors).

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "labelcmp/labelcmp.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace labelcmp;

namespace {

struct Common {
  std::uint64_t seed = 0;
  std::string out = "out";
};

std::ofstream open_file(const Common& c, const std::string& name) {
  fs::create_directories(c.out);
  return detail::open_out((fs::path(c.out) / name).string());
}

void write_json(const Common& c, const std::string& name, const json& j) {
  auto f = open_file(c, name);
  f << j.dump(2) << '\n';
}

json edges_json(const NeighborhoodGraph& g) {
  json a = json::array();
  for (const auto& e : g.edges()) a.push_back({e.i, e.j});
  return a;
}

int report(const std::vector<std::string>& failures) {
  for (const auto& f : failures) std::cerr << "check failed: " << f << '\n';
  return failures.empty() ? 0 : 1;
}

// --- sparsity ---------------------------------------------------------------

struct SparsityArgs {
  SparsityConfig cfg;
};

int run_sparsity(const Common& c, SparsityArgs a) {
  a.cfg.seed = c.seed;
  const SparsityResult r = sparsity_experiment(a.cfg);
  {
    auto f = open_file(c, "sparsity_trials.csv");
    write_sparsity_trials_csv(f, r);
  }
  {
    auto f = open_file(c, "sparsity_summary.csv");
    write_sparsity_summary_csv(f, r);
  }
  std::vector<std::string> failures;
  json cells = json::array();
  for (const auto& cell : r.cells) {
    cells.push_back({{"d", cell.d},
                     {"k_hat", cell.k_hat},
                     {"mean_k_eff", cell.mean_k_eff},
                     {"true_sparsity", cell.true_mean},
                     {"empirical_sparsity", cell.empirical_mean},
                     {"mc_miss_trials", cell.mc_miss_trials}});
    if (cell.empirical_mean > cell.true_mean)
      failures.push_back("empirical sparsity above true sparsity at d=" + std::to_string(cell.d) +
                         " k_hat=" + std::to_string(cell.k_hat));
  }
  write_json(c, "sparsity_manifest.json",
             {{"command", "sparsity"},
              {"seed", c.seed},
              {"dims", a.cfg.dims},
              {"k_hats", a.cfg.k_hats},
              {"trials", a.cfg.trials},
              {"n_train", a.cfg.n_train},
              {"mc_samples", a.cfg.mc.samples},
              {"mc_tol", a.cfg.mc.tol},
              {"outputs", {"sparsity_trials.csv", "sparsity_summary.csv"}},
              {"cells", cells},
              {"failed_checks", failures}});
  std::cout << "sparsity: " << r.cells.size() << " cells, " << r.trials.size() << " trials -> " << c.out << '\n';
  return report(failures);
}

// --- suite ------------------------------------------------------------------

struct SuiteArgs {
  SuiteConfig cfg;
  int num_seeds = 5;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> methods;
  std::string edge_mode = "iterate-all";
  std::string teacher;
  std::string data;
  bool data_has_labels = false;
};

int run_suite(const Common& c, SuiteArgs a) {
  if (a.seeds.empty())
    for (int i = 0; i < a.num_seeds; ++i) a.seeds.push_back(c.seed + static_cast<std::uint64_t>(i));
  a.cfg.seeds = a.seeds;
  if (!a.methods.empty()) {
    a.cfg.methods.clear();
    for (const auto& m : a.methods) a.cfg.methods.push_back(parse_method(m));
  }
  a.cfg.edge_mode = a.edge_mode == "sample-one" ? EdgeMode::SampleOne : EdgeMode::IterateAll;
  a.cfg.mc.seed = derive_seed(c.seed, 99);

  SuiteResult r;
  if (!a.teacher.empty()) {
    if (a.data.empty()) throw std::invalid_argument("suite: --teacher requires --data");
    const LinearModel teacher = load_model(a.teacher);
    Dataset all = load_csv_dataset(a.data, a.data_has_labels);
    all.validate();
    if (all.size() <= a.cfg.n_test) throw std::invalid_argument("suite: dataset smaller than n_test");
    Dataset test, train;
    test.points.assign(all.points.begin(), all.points.begin() + static_cast<std::ptrdiff_t>(a.cfg.n_test));
    train.points.assign(all.points.begin() + static_cast<std::ptrdiff_t>(a.cfg.n_test), all.points.end());
    a.cfg.d = teacher.d();
    a.cfg.k_hat = teacher.k();
    a.cfg.n_train = train.size();
    r = run_comparison_suite(a.cfg, teacher, train, test);
  } else {
    r = run_comparison_suite(a.cfg);
  }

  {
    auto f = open_file(c, "trajectories.csv");
    write_trajectories_csv(f, r);
  }
  {
    auto f = open_file(c, "mean_trajectory.csv");
    write_mean_trajectory_csv(f, r);
  }
  {
    auto f = open_file(c, "matched_accuracy.csv");
    write_matched_accuracy_csv(f, r);
  }
  std::vector<std::string> failures;
  for (const auto& run : r.runs) {
    const std::string cell = run.method + " seed " + std::to_string(run.seed);
    if (!run.error.empty()) failures.push_back(cell + ": " + run.error);
    for (std::size_t n = 0; n < run.trajectory.size(); ++n) {
      const auto& p = run.trajectory[n];
      if (p.accuracy < 0 || p.accuracy > 1) failures.push_back(cell + ": accuracy out of range");
      if (n > 0 && p.queries < run.trajectory[n - 1].queries)
        failures.push_back(cell + ": comparisons decreased");
    }
    if (!run.trajectory.empty() && run.trajectory.back().queries != run.ledger_comparisons)
      failures.push_back(cell + ": trajectory does not end at the ledger count");
  }
  json manifest = suite_manifest(r);
  manifest["command"] = "suite";
  manifest["seed"] = c.seed;
  if (!a.teacher.empty()) manifest["teacher"] = a.teacher, manifest["data"] = a.data;
  manifest["outputs"] = {"trajectories.csv", "mean_trajectory.csv", "matched_accuracy.csv"};
  manifest["failed_checks"] = failures;
  write_json(c, "suite_manifest.json", manifest);
  std::cout << "suite: " << r.runs.size() << " runs -> " << c.out << '\n';
  return report(failures);
}

// --- verify -----------------------------------------------------------------

struct VerifyArgs {
  int max_k = 3;
  int strict_max_k = 2;
  long bound_max_n = 12;
  long bound_max_k = 5;
};

int run_verify(const Common& c, const VerifyArgs& a) {
  std::vector<std::string> failures;
  json shatter = json::array();
  std::vector<theory::ShatterReport> reports;
  for (int k = 1; k <= a.max_k; ++k) {
    const auto fam = theory::build_ds_family(k);
    if (fam.members.size() != (std::size_t{1} << (2 * k))) failures.push_back("family size at k=" + std::to_string(k));
    reports.push_back(theory::verify_shattering(fam, theory::ClosenessMode::ArgmaxOnly));
    if (!reports.back().passes) failures.push_back("argmax-only shattering at k=" + std::to_string(k));
    if (k <= a.strict_max_k) reports.push_back(theory::verify_shattering(fam, theory::ClosenessMode::Strict));
  }
  for (const auto& r : reports) shatter.push_back(r.to_json());
  {
    auto f = open_file(c, "lower_bound.csv");
    f << "n,k,labelings,min_queries\n";
    for (long k = 2; k <= a.bound_max_k; ++k)
      for (long n = k - 1; n <= a.bound_max_n; ++n)
        f << n << ',' << k << ',' << theory::one_dim_labelings(n, k) << ',' << theory::argmax_query_lower_bound(n, k)
          << '\n';
  }
  const auto ce = theory::appendix_c_counterexample();
  if (!ce.reproduces) failures.push_back("empirical-graph counterexample does not reproduce");
  {
    auto f = open_file(c, "verify_report.txt");
    f << std::setprecision(6);
    f << "shattering (strict mode is reported only)\n";
    for (const auto& r : reports)
      f << "  k=" << r.k << " mode=" << theory::to_string(r.mode) << " members=" << r.members
        << " pairs=" << r.checked << " failures=" << r.failure_count << (r.passes ? " PASS" : " FAIL") << '\n';
    f << "argmax query lower bound: see lower_bound.csv (n <= " << a.bound_max_n << ", k <= " << a.bound_max_k
      << ")\n";
    f << "empirical-graph counterexample\n";
    f << "  empirical edges:";
    for (const auto& e : ce.empirical_graph.edges()) f << " (" << e.i << ',' << e.j << ')';
    f << "\n  probe=" << ce.probe << " teacher=" << ce.teacher_label << " true-graph=" << ce.true_graph_label
      << " empirical-graph=" << ce.empirical_graph_label << (ce.reproduces ? " REPRODUCES" : " DOES NOT REPRODUCE")
      << '\n';
    f << (failures.empty() ? "all checks passed\n" : "checks failed\n");
  }
  write_json(c, "verify_manifest.json",
             {{"command", "verify"},
              {"shattering", shatter},
              {"counterexample", ce.to_json()},
              {"outputs", {"lower_bound.csv", "verify_report.txt"}},
              {"failed_checks", failures}});
  std::cout << "verify: " << (failures.empty() ? "all checks passed" : "checks failed") << " -> " << c.out << '\n';
  return report(failures);
}

// --- teach ------------------------------------------------------------------

struct TeachArgs {
  std::string data;
  int dim = 10;
  int epochs = 20;
  double eta = 0.05;
  std::optional<int> classes;
};

int run_teach(const Common& c, const TeachArgs& a) {
  auto projected = ingest_and_project(a.data, a.dim, derive_seed(c.seed, 1), true);
  const LinearModel teacher = fit_linear_teacher(projected.data, a.epochs, a.eta, derive_seed(c.seed, 2), a.classes);
  fs::create_directories(c.out);
  save_model((fs::path(c.out) / "teacher.txt").string(), teacher);
  save_model((fs::path(c.out) / "projection.txt").string(), LinearModel(projected.projection.transpose()));
  {
    Dataset unlabeled{projected.data.points, std::nullopt};
    auto f = open_file(c, "projected.csv");
    write_csv_dataset(f, unlabeled);
  }
  const double acc = training_accuracy(teacher, projected.data);
  write_json(c, "teach_manifest.json",
             {{"command", "teach"},
              {"seed", c.seed},
              {"data", a.data},
              {"rows", projected.data.size()},
              {"input_dim", projected.projection.rows()},
              {"dim", a.dim},
              {"classes", teacher.k()},
              {"epochs", a.epochs},
              {"eta", a.eta},
              {"training_accuracy", acc},
              {"outputs", {"teacher.txt", "projection.txt", "projected.csv"}}});
  std::cout << "teach: " << teacher.k() << " classes, training accuracy " << acc << " -> " << c.out << '\n';
  return 0;
}

// --- graph ------------------------------------------------------------------

struct GraphArgs {
  std::string teacher;
  int d = 5;
  int k_hat = 20;
  std::string method = "montecarlo";
  int mc_samples = 2048;
  std::size_t n_train = 2000;
};

int run_graph(const Common& c, const GraphArgs& a) {
  const LinearModel teacher = a.teacher.empty() ? random_teacher(a.d, a.k_hat, c.seed) : load_model(a.teacher);
  GraphMethod method;
  if (a.method == "exact2d") method = Exact2D{};
  else if (a.method == "lifted1d") method = ExactLifted1D{};
  else if (a.method == "montecarlo") method = MonteCarlo{a.mc_samples, 1e-9, derive_seed(c.seed, 4)};
  else throw std::invalid_argument("graph: unknown method '" + a.method + "'");

  std::vector<std::string> diagnostics;
  const NeighborhoodGraph gt = true_graph(teacher, method, &diagnostics);
  const Dataset train = a.method == "lifted1d" ? [&] {
    Dataset ds;
    Rng rng(derive_seed(c.seed, 2));
    double lo = teacher.weights().col(0).minCoeff() / 2, hi = teacher.weights().col(0).maxCoeff() / 2;
    const double pad = std::max(hi - lo, 1.0);
    for (std::size_t n = 0; n < a.n_train; ++n) ds.points.push_back(one_dim::lift(rng.uniform(lo - pad, hi + pad)));
    return ds;
  }()
                                               : sample_sphere(teacher.d(), a.n_train, derive_seed(c.seed, 2));
  const NeighborhoodGraph ge = empirical_graph(teacher, train);
  {
    auto f = open_file(c, "true_graph.txt");
    write_graph(f, gt);
  }
  {
    auto f = open_file(c, "empirical_graph.txt");
    write_graph(f, ge);
  }
  const bool subset = ge.is_subgraph_of(gt);
  std::vector<std::string> failures;
  // Runner-up pairs are true neighbors for nearest-center rankings: lifted 1-D or equal row norms.
  const Vector norms = teacher.weights().rowwise().norm();
  const bool equal_norms = norms.maxCoeff() - norms.minCoeff() <= 1e-12 * norms.maxCoeff();
  const bool voronoi = a.method == "lifted1d" || equal_norms;
  if (!subset && a.method != "montecarlo" && voronoi)
    failures.push_back("empirical graph not contained in exact true graph");
  const auto k_eff = static_cast<int>(effective_vertex_set(teacher, train, gt).size());
  write_json(c, "graph_manifest.json",
             {{"command", "graph"},
              {"seed", c.seed},
              {"method", a.method},
              {"k", teacher.k()},
              {"d", teacher.d()},
              {"k_eff", k_eff},
              {"true_edges", edges_json(gt)},
              {"empirical_edges", edges_json(ge)},
              {"true_sparsity", sparsity_level(gt)},
              {"empirical_sparsity", sparsity_level(ge)},
              {"true_max_degree", gt.max_degree()},
              {"empirical_subset_of_true", subset},
              {"equal_row_norms", equal_norms},
              {"diagnostics", diagnostics},
              {"outputs", {"true_graph.txt", "empirical_graph.txt"}},
              {"failed_checks", failures}});
  std::cout << "graph: " << gt.edge_count() << " true edges, " << ge.edge_count() << " empirical edges -> " << c.out
            << '\n';
  return report(failures);
}

// --- oned -------------------------------------------------------------------

struct OnedArgs {
  int k = 10;
  double eps = 0.05;
  std::size_t n = 0;  // 0: choose from k and eps
  std::size_t n_test = 20000;
  std::string mode = "lazy";
};

int run_oned(const Common& c, OnedArgs a) {
  if (a.k < 2) throw std::invalid_argument("oned: k must be >= 2");
  if (a.n == 0) a.n = static_cast<std::size_t>(std::ceil(20.0 * a.k / a.eps));
  Rng rng(derive_seed(c.seed, 1));
  one_dim::CentersModel cm;
  for (int i = 0; i < a.k; ++i) cm.centers.push_back(rng.uniform(0.0, 1.0));
  const LinearModel teacher = one_dim::centers_to_linear(cm);
  std::vector<double> pool(a.n), test(a.n_test);
  for (auto& t : pool) t = rng.uniform(0.0, 1.0);
  for (auto& t : test) t = rng.uniform(0.0, 1.0);

  QueryLedger ledger;
  LinearOracle oracle(teacher, ledger);
  const auto r = one_dim::end_to_end_1d(oracle, pool,
                                        a.eps, a.mode == "eager" ? one_dim::PairQueryMode::EagerPairs
                                                                 : one_dim::PairQueryMode::LazySort);
  const double pool_err = one_dim::disagreement(r.classifier, teacher, pool);
  const double test_err = one_dim::disagreement(r.classifier, teacher, test);
  std::vector<std::string> failures;
  if (r.learned.graph.max_degree() > 2) failures.push_back("learned graph has a vertex of degree > 2");
  if (pool_err > a.eps) failures.push_back("pool disagreement exceeds eps");
  if (r.comparisons != ledger.comparisons) failures.push_back("comparison count differs from the ledger");
  {
    auto f = open_file(c, "oned_predictions.csv");
    f << "t,teacher,student\n";
    for (std::size_t n = 0; n < std::min<std::size_t>(test.size(), 1000); ++n)
      f << test[n] << ',' << argmax_index(scores(teacher, one_dim::lift(test[n]))) << ','
        << r.classifier.predict(test[n]) << '\n';
  }
  write_json(c, "oned_manifest.json",
             {{"command", "oned"},
              {"seed", c.seed},
              {"k", a.k},
              {"eps", a.eps},
              {"n", a.n},
              {"mode", a.mode},
              {"centers", cm.centers},
              {"learned_order", r.learned.order},
              {"losers", r.learned.losers},
              {"graph_edges", edges_json(r.learned.graph)},
              {"comparisons", r.comparisons},
              {"pool_disagreement", pool_err},
              {"test_disagreement", test_err},
              {"outputs", {"oned_predictions.csv"}},
              {"failed_checks", failures}});
  std::cout << "oned: k=" << a.k << " comparisons=" << r.comparisons << " test disagreement=" << test_err << " -> "
            << c.out << '\n';
  return report(failures);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning multiclass linear classifiers from label comparisons"};
  app.fallthrough();
  app.set_config("--config", "", "TOML/INI file; keys as long option names, [subcommand] sections");
  app.require_subcommand(1);
  Common common;
  app.add_option("--seed", common.seed, "Master seed")->capture_default_str();
  app.add_option("--out", common.out, "Output directory")->capture_default_str();

  SparsityArgs sp;
  auto* s_sp = app.add_subcommand("sparsity", "Sparsity of true and empirical graphs of random teachers");
  s_sp->add_option("--dims", sp.cfg.dims)->capture_default_str();
  s_sp->add_option("--k-hats", sp.cfg.k_hats)->capture_default_str();
  s_sp->add_option("--trials", sp.cfg.trials)->capture_default_str();
  s_sp->add_option("--n-train", sp.cfg.n_train)->capture_default_str();
  s_sp->add_option("--mc-samples", sp.cfg.mc.samples)->capture_default_str();

  SuiteArgs su;
  auto* s_su = app.add_subcommand("suite", "Accuracy against comparisons for AL-GD and tournament baselines");
  s_su->add_option("--d", su.cfg.d)->capture_default_str();
  s_su->add_option("--k-hat", su.cfg.k_hat)->capture_default_str();
  s_su->add_option("--n-train", su.cfg.n_train)->capture_default_str();
  s_su->add_option("--n-test", su.cfg.n_test)->capture_default_str();
  s_su->add_option("--num-seeds", su.num_seeds, "Seeds seed, seed+1, ... unless --seeds is given")->capture_default_str();
  s_su->add_option("--seeds", su.seeds);
  s_su->add_option("--methods", su.methods,
                   "algd_true, algd_empirical, algd_complete, passive_tournament, active_tournament");
  s_su->add_option("--steps", su.cfg.steps)->capture_default_str();
  s_su->add_option("--eval-every", su.cfg.eval_every)->capture_default_str();
  s_su->add_option("--buffer-size", su.cfg.buffer_size)->capture_default_str();
  s_su->add_option("--algd-tau", su.cfg.algd_tau)->capture_default_str();
  s_su->add_option("--algd-eta", su.cfg.algd_eta)->capture_default_str();
  s_su->add_option("--edge-mode", su.edge_mode)->check(CLI::IsMember({"iterate-all", "sample-one"}))->capture_default_str();
  s_su->add_option("--theta", su.cfg.theta)->capture_default_str();
  s_su->add_option("--duel-tau", su.cfg.duel_tau)->capture_default_str();
  s_su->add_option("--tournament-eta", su.cfg.tournament_eta)->capture_default_str();
  s_su->add_option("--topk-fraction", su.cfg.topk_fraction)->capture_default_str();
  s_su->add_option("--mc-samples", su.cfg.mc.samples)->capture_default_str();
  s_su->add_option("--accuracy-levels", su.cfg.accuracy_levels)->capture_default_str();
  s_su->add_option("--teacher", su.teacher, "Teacher model file (with --data: first n_test rows are the test set)");
  s_su->add_option("--data", su.data, "Point CSV for a fixed teacher");
  s_su->add_flag("--data-has-labels", su.data_has_labels, "Ignore the last column of --data");

  VerifyArgs ve;
  auto* s_ve = app.add_subcommand("verify", "Shattering, counting bound and empirical-graph counterexample");
  s_ve->add_option("--max-k", ve.max_k)->check(CLI::Range(1, theory::kMaxFamilyTriplets))->capture_default_str();
  s_ve->add_option("--strict-max-k", ve.strict_max_k)->capture_default_str();
  s_ve->add_option("--bound-max-n", ve.bound_max_n)->capture_default_str();
  s_ve->add_option("--bound-max-k", ve.bound_max_k)->capture_default_str();

  TeachArgs te;
  auto* s_te = app.add_subcommand("teach", "Project a labeled CSV and fit a linear teacher");
  s_te->add_option("--data", te.data, "Labeled CSV, label in the last column")->required();
  s_te->add_option("--dim", te.dim)->capture_default_str();
  s_te->add_option("--epochs", te.epochs)->capture_default_str();
  s_te->add_option("--eta", te.eta)->capture_default_str();
  s_te->add_option("--classes", te.classes);

  GraphArgs gr;
  auto* s_gr = app.add_subcommand("graph", "True and empirical neighborhood graphs of one teacher");
  s_gr->add_option("--teacher", gr.teacher, "Model file; random teacher if omitted");
  s_gr->add_option("--d", gr.d)->capture_default_str();
  s_gr->add_option("--k-hat", gr.k_hat)->capture_default_str();
  s_gr->add_option("--method", gr.method)->check(CLI::IsMember({"exact2d", "lifted1d", "montecarlo"}))->capture_default_str();
  s_gr->add_option("--mc-samples", gr.mc_samples)->capture_default_str();
  s_gr->add_option("--n-train", gr.n_train)->capture_default_str();

  OnedArgs od;
  auto* s_od = app.add_subcommand("oned", "End-to-end 1-D learner from comparisons");
  s_od->add_option("--k", od.k)->capture_default_str();
  s_od->add_option("--eps", od.eps)->capture_default_str();
  s_od->add_option("--n", od.n, "Pool size; 0 picks ceil(20 k / eps)")->capture_default_str();
  s_od->add_option("--n-test", od.n_test)->capture_default_str();
  s_od->add_option("--mode", od.mode)->check(CLI::IsMember({"lazy", "eager"}))->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*s_sp) return run_sparsity(common, sp);
    if (*s_su) return run_suite(common, su);
    if (*s_ve) return run_verify(common, ve);
    if (*s_te) return run_teach(common, te);
    if (*s_gr) return run_graph(common, gr);
    if (*s_od) return run_oned(common, od);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
