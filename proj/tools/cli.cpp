#include "cli.hpp"

#include "mmp/analysis.hpp"
#include "mmp/bench.hpp"
#include "mmp/matrix_io.hpp"
#include "mmp/solvers.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace mmp::cli {

namespace {

using Json = nlohmann::ordered_json;

// JSON has no infinity; unsatisfiable constants come out as null.
Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json one_based(const Support& s) {
  Json a = Json::array();
  for (Index i : s) a.push_back(i + 1);
  return a;
}

Json to_json(const RecoveryOutput& r) {
  Json coefficients = Json::array();
  for (Index i = 0; i < r.coefficients.size(); ++i) coefficients.push_back(r.coefficients(i));
  Json stats;
  stats["candidates_per_iteration"] = r.stats.candidates_per_iteration;
  stats["paths_explored"] = r.stats.paths_explored;
  stats["terminated_by"] = std::string(to_string(r.stats.terminated_by));
  Json j;
  j["support"] = one_based(r.support);
  j["coefficients"] = std::move(coefficients);
  j["residual_norm_sq"] = r.residual_norm_sq;
  j["partial"] = r.partial;
  j["stats"] = std::move(stats);
  return j;
}

Json to_json(const GuaranteeConstants& c) {
  Json j;
  j["bf_bound"] = number(c.bf_bound);
  j["gamma"] = number(c.gamma);
  j["mu"] = number(c.mu);
  j["lambda"] = number(c.lambda);
  j["zeta"] = number(c.zeta);
  j["tau"] = number(c.tau);
  return j;
}

struct SolveOptions {
  std::string matrix, measurements;
  Index k = 0;
  std::string algorithm = "omp";
  Index l = 2;
  std::uint64_t nmax = 50;
  std::optional<double> epsilon;
  std::optional<std::size_t> cap;
  std::vector<Index> support;
};

int do_solve(const SolveOptions& o, std::uint64_t seed, std::ostream& out) {
  const SensingMatrix matrix(read_matrix_file(o.matrix));
  const Vector y = read_vector_file(o.measurements);

  SolverSpec spec;
  spec.algorithm = parse_algorithm(o.algorithm);
  spec.config.expansion = o.l;
  spec.config.max_paths = o.nmax;
  spec.config.epsilon = o.epsilon;
  spec.config.max_candidates_per_iter = o.cap;

  Support oracle;
  if (spec.algorithm == Algorithm::oracle) {
    if (o.support.empty()) throw CLI::ValidationError("--support", "oracle needs --support (1-based column list)");
    for (Index i : o.support) {
      if (i < 1) throw CLI::ValidationError("--support", "column indices are 1-based");
      oracle.push_back(i - 1);
    }
    std::sort(oracle.begin(), oracle.end());
  }

  Json j;
  j["seed"] = seed;
  j["algorithm"] = o.algorithm;
  try {
    const RecoveryOutput r = run_solver(spec, matrix, y, o.k, oracle);
    j.update(to_json(r));
    out << j.dump() << '\n';
    return ok;
  } catch (const PartialRecovery& e) {
    j.update(to_json(e.best()));
    j["error"] = e.what();
    out << j.dump() << '\n';
    return numeric_error;
  }
}

struct RipOptions {
  std::string matrix;
  int max_order = 1;
  std::vector<Index> k, l;
};

int do_rip(const RipOptions& o, std::uint64_t seed, std::ostream& out) {
  const SensingMatrix matrix(read_matrix_file(o.matrix));
  RipReport report = rip_report(matrix, o.max_order);

  if (o.k.size() != o.l.size() && o.k.size() > 1 && o.l.size() > 1)
    throw CLI::ValidationError("--k/--l", "give equally many K and L values, or a single value of one of them");
  const std::size_t pairs = o.k.empty() || o.l.empty() ? 0 : std::max(o.k.size(), o.l.size());

  // Orders the guarantee constants need beyond --max-order.
  auto ensure = [&](Index order) {
    if (order > matrix.cols()) return false;
    if (!report.deltas.count(static_cast<int>(order)))
      report.deltas[static_cast<int>(order)] = rip_constant(matrix, static_cast<int>(order));
    return true;
  };

  Json constants = Json::array();
  for (std::size_t p = 0; p < pairs; ++p) {
    const Index K = o.k[o.k.size() == 1 ? 0 : p];
    const Index L = o.l[o.l.size() == 1 ? 0 : p];
    if (K < 1 || L < 1) throw CLI::ValidationError("--k/--l", "K and L must be positive");
    Json entry;
    entry["K"] = K;
    entry["L"] = L;
    entry["noiseless_bound"] = bf_recovery_bound(K, L);
    entry["first_iteration_bound"] = first_iter_bound(K, L);
    if (ensure(K + L)) {
      const double d = report.delta(static_cast<int>(K + L));
      entry["delta_K_plus_L"] = d;
      entry["noiseless_condition_holds"] = d < bf_recovery_bound(K, L);
    } else {
      entry["delta_K_plus_L"] = nullptr;
      entry["noiseless_condition_holds"] = nullptr;
    }
    const bool have = ensure(K) && ensure(2 * K) && ensure(K + L);
    if (have) {
      const double dK = report.delta(static_cast<int>(K)), d2K = report.delta(static_cast<int>(2 * K)),
                   dKL = report.delta(static_cast<int>(K + L));
      const bool in_range = dK < 1.0 && d2K < 1.0 && dKL < 1.0;
      entry["constants"] = in_range ? to_json(noisy_constants(dK, d2K, dKL, K, L)) : Json(nullptr);
    } else {
      entry["constants"] = nullptr;
    }
    const double romp = K >= 1 ? 0.03 / std::sqrt(std::log(2.0 * static_cast<double>(K))) : 0.0;
    entry["romp_delta_2K_bound"] = number(romp);
    constants.push_back(std::move(entry));
  }

  Json deltas;
  for (const auto& [order, d] : report.deltas) deltas[std::to_string(order)] = d;
  Json reference;
  reference["cosamp"] = {{"order", "4K"}, {"bound", 0.1}};
  reference["sp"] = {{"order", "3K"}, {"bound", 0.165}};
  reference["romp"] = {{"order", "2K"}, {"bound", "0.03/sqrt(log 2K)"}};
  reference["gomp"] = {{"order", "NK"}, {"bound", 0.25}};

  Json j;
  j["seed"] = seed;
  j["m"] = report.m;
  j["n"] = report.n;
  j["max_order"] = report.max_order;
  j["deltas"] = std::move(deltas);
  j["pairs"] = std::move(constants);
  j["reference"] = std::move(reference);
  out << j.dump() << '\n';
  return ok;
}

struct VerifyOptions {
  std::size_t trials = 200;
  std::size_t max_attempts = 20000;
  bool noisy = false;
};

int do_verify(const VerifyOptions& o, std::uint64_t seed, std::ostream& out) {
  SuiteConfig config;
  config.seed = seed;
  config.trials = o.trials;
  config.max_attempts = o.max_attempts;
  config.noisy = o.noisy;
  const SuiteCounts c = run_implication_suite(config);

  Json checks;
  std::size_t violations = 0;
  auto add = [&](const char* name, std::size_t n, std::size_t bad, bool counts = true) {
    checks[name] = {{"checked", n}, {"violations", bad}};
    if (counts) violations += bad;
    else checks[name]["informational"] = true;
  };
  add("alpha_upper", c.alpha_checks, c.alpha_violations);
  add("beta_lower", c.beta_checks, c.beta_violations);
  add("residual_true_upper", c.residual_upper_checks, c.residual_upper_violations);
  // With noise this bound drops a cross term that can be negative, so it is
  // reported but does not decide the verdict.
  add("residual_wrong_lower", c.residual_lower_checks, c.residual_lower_violations, !o.noisy);
  add("gram", c.gram_checks, c.gram_violations);
  add("cross_gram", c.cross_checks, c.cross_violations);
  add("spectral_norm", c.spectral_checks, c.spectral_violations);
  add("stability", c.stability_checks, c.stability_violations);

  Json j;
  j["seed"] = seed;
  j["noisy"] = o.noisy;
  j["attempts"] = c.attempts;
  j["instances"] = c.instances;
  j["recovered"] = c.recovered;
  j["counterexamples"] = c.counterexamples;
  j["checks"] = std::move(checks);
  j["pass"] = c.counterexamples == 0 && violations == 0 && c.instances >= o.trials;
  out << j.dump() << '\n';
  return ok;
}

struct BenchmarkOptions {
  std::string config;
  std::string out_dir = ".";
  bool plot = false;
  bool fix_matrix = false;
  unsigned threads = 0;
};

int do_benchmark(const BenchmarkOptions& o, std::optional<std::uint64_t> seed, std::ostream& out,
                 std::ostream& err) {
  ExperimentConfig config = load_experiment_config(o.config);
  if (seed) config.seed = *seed;
  if (o.fix_matrix) config.fix_matrix = true;
  if (o.threads) config.threads = o.threads;
  err << "benchmark: seed " << config.seed << ", " << config.trials << " trials per cell\n";

  const ExperimentResult result = run_experiment(config);
  const auto files = emit_results(result.rows, o.out_dir, o.plot);

  Json j;
  j["seed"] = config.seed;
  j["rows"] = result.rows.size();
  Json paths = Json::array();
  for (const auto& f : files) paths.push_back(f.string());
  j["files"] = std::move(paths);
  out << j.dump() << '\n';
  return ok;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multipath matching pursuit: sparse recovery, RIP analysis and benchmarks", "mmp"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  std::optional<std::uint64_t> seed;

  SolveOptions so;
  auto* solve = app.add_subcommand("solve", "Recover a sparse vector from a matrix and measurements");
  solve->add_option("--matrix", so.matrix, "Sensing matrix file (header \"m n\", then m rows)")
      ->required()->check(CLI::ExistingFile);
  solve->add_option("--measurements", so.measurements, "Measurement vector file (\"m 1\" or \"1 m\")")
      ->required()->check(CLI::ExistingFile);
  solve->add_option("--k", so.k, "Sparsity K")->required()->check(CLI::PositiveNumber);
  solve->add_option("--algorithm", so.algorithm, "omp, mmp-bf, mmp-df or oracle")
      ->check(CLI::IsMember({"omp", "mmp-bf", "mmp-df", "oracle"}))->capture_default_str();
  solve->add_option("--l", so.l, "Expansion L (children per path)")->check(CLI::PositiveNumber)->capture_default_str();
  solve->add_option("--nmax", so.nmax, "Depth-first candidate budget")->check(CLI::PositiveNumber)->capture_default_str();
  solve->add_option("--epsilon", so.epsilon, "Depth-first residual stop threshold (default 1e-12 ||y||^2)")
      ->check(CLI::NonNegativeNumber);
  solve->add_option("--cap", so.cap, "Breadth-first candidates kept per iteration (default unlimited)")
      ->check(CLI::PositiveNumber);
  solve->add_option("--support", so.support, "Known support for oracle, 1-based")->delimiter(',');
  solve->add_option("--seed", seed, "Seed (echoed; solve is deterministic)");

  RipOptions ro;
  auto* rip = app.add_subcommand("rip", "Exact restricted isometry constants and guarantee constants");
  rip->add_option("--matrix", ro.matrix, "Sensing matrix file")->required()->check(CLI::ExistingFile);
  rip->add_option("--max-order", ro.max_order, "Largest order s for delta_s")->required()->check(CLI::PositiveNumber);
  rip->add_option("--k", ro.k, "Sparsity values for guarantee constants")->delimiter(',');
  rip->add_option("--l", ro.l, "Expansion values paired with --k")->delimiter(',');
  rip->add_option("--seed", seed, "Seed (echoed)");

  VerifyOptions vo;
  auto* verify = app.add_subcommand("verify", "Property suite for the recovery guarantees and RIP bounds");
  verify->add_option("--seed", seed, "Suite seed (default 0)");
  verify->add_option("--trials", vo.trials, "Instances that must meet the recovery condition")
      ->check(CLI::PositiveNumber)->capture_default_str();
  verify->add_option("--max-attempts", vo.max_attempts, "Random draws before giving up")
      ->check(CLI::PositiveNumber)->capture_default_str();
  verify->add_flag("--noisy", vo.noisy, "Add measurement noise and use the noisy condition");

  BenchmarkOptions bo;
  auto* bench = app.add_subcommand("benchmark", "Monte Carlo sweep from a JSON experiment file");
  bench->add_option("--config", bo.config, "Experiment JSON (see README)")->required()->check(CLI::ExistingFile);
  bench->add_option("--out", bo.out_dir, "Output directory")->capture_default_str();
  bench->add_flag("--plot", bo.plot, "Also write err.svg and mse.svg");
  bench->add_flag("--fix-matrix", bo.fix_matrix, "One sensing matrix for every trial");
  bench->add_option("--threads", bo.threads, "Worker threads (default MMP_THREADS or all cores)");
  bench->add_option("--seed", seed, "Override the config seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage_error;
  }

  try {
    const std::uint64_t resolved = seed.value_or(0);
    if (*solve) return do_solve(so, resolved, out);
    if (*rip) return do_rip(ro, resolved, out);
    if (*verify) return do_verify(vo, resolved, out);
    return do_benchmark(bo, seed, out, err);
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << '\n';
    return usage_error;
  } catch (const DimensionMismatch& e) {
    err << "error: " << e.what() << '\n';
    return numeric_error;
  } catch (const nlohmann::json::exception& e) {
    err << "error: bad experiment config: " << e.what() << '\n';
    return usage_error;
  } catch (const std::logic_error& e) {
    err << "error: " << e.what() << '\n';
    return usage_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return numeric_error;
  }
}

}  // namespace mmp::cli
