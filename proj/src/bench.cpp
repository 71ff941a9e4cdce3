#include "mmp/bench.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

namespace mmp {

namespace {

constexpr std::uint64_t kFixedMatrixStream = 0x6d6174726978ULL;  // "matrix"

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

std::optional<double> parse_snr(const nlohmann::json& value) {
  if (value.is_null()) return std::nullopt;
  if (value.is_string()) {
    const auto s = value.get<std::string>();
    if (s == "inf" || s == "noiseless") return std::nullopt;
    throw std::invalid_argument("snr_db entry '" + s + "' is neither a number nor \"inf\"");
  }
  const double snr = value.get<double>();
  if (std::isinf(snr) && snr > 0) return std::nullopt;
  if (!std::isfinite(snr)) throw std::invalid_argument("snr_db must be finite or \"inf\"");
  return snr;
}

}  // namespace

SensingMatrix gen_sensing_matrix(Index m, Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(m)));
  Matrix phi(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) phi(i, j) = normal(rng);
  return SensingMatrix(std::move(phi));
}

SparseSignal gen_sparse_signal(Index n, Index K, Rng& rng) {
  if (K < 0 || K > n) throw std::invalid_argument("sparsity must be in [0, n]");
  Support pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  // Partial Fisher-Yates: the first K slots are a uniform K-subset.
  for (Index i = 0; i < K; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  Support support(pool.begin(), pool.begin() + K);
  std::sort(support.begin(), support.end());

  std::normal_distribution<double> normal;
  SparseSignal s{Vector::Zero(n), {}};
  for (Index i : support) {
    double value = 0.0;
    while (value == 0.0) value = normal(rng);
    s.values(i) = value;
  }
  s.support = std::move(support);
  return s;
}

Measurement add_noise(const Vector& y_clean, std::optional<double> snr_db, Rng& rng) {
  if (!snr_db || (std::isinf(*snr_db) && *snr_db > 0)) return {y_clean, Vector::Zero(y_clean.size())};
  if (!std::isfinite(*snr_db)) throw std::invalid_argument("SNR must be finite or +inf");
  std::normal_distribution<double> normal(0.0, std::sqrt(std::pow(10.0, -*snr_db / 10.0)));
  Vector v(y_clean.size());
  for (Index i = 0; i < v.size(); ++i) v(i) = normal(rng);
  return {y_clean + v, v};
}

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::omp: return "omp";
    case Algorithm::mmp_bf: return "mmp-bf";
    case Algorithm::mmp_df: return "mmp-df";
    case Algorithm::oracle: return "oracle";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  for (Algorithm a : {Algorithm::omp, Algorithm::mmp_bf, Algorithm::mmp_df, Algorithm::oracle})
    if (name == to_string(a)) return a;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) +
                              "' (expected omp, mmp-bf, mmp-df or oracle)");
}

RecoveryOutput run_solver(const SolverSpec& spec, const SensingMatrix& matrix, const Vector& y, Index K,
                          const Support& true_support) {
  SolverConfig config = spec.config;
  config.sparsity = K;
  switch (spec.algorithm) {
    case Algorithm::omp: return omp(matrix, y, K);
    case Algorithm::mmp_bf: return mmp_bf(matrix, y, config);
    case Algorithm::mmp_df: return mmp_df(matrix, y, config);
    case Algorithm::oracle: return oracle_ls(matrix, y, true_support);
  }
  throw std::logic_error("unhandled algorithm");
}

TrialMetrics metrics(const SparseSignal& x_true, const RecoveryOutput& output) {
  const Index n = x_true.values.size();
  TrialMetrics t;
  t.exact = !output.partial && output.support == x_true.support;
  t.squared_error = (x_true.values - output.dense(n)).squaredNorm();
  Support missed, extra;
  std::set_difference(x_true.support.begin(), x_true.support.end(), output.support.begin(), output.support.end(),
                      std::back_inserter(missed));
  std::set_difference(output.support.begin(), output.support.end(), x_true.support.begin(), x_true.support.end(),
                      std::back_inserter(extra));
  t.missed = static_cast<Index>(missed.size());
  t.false_alarms = static_cast<Index>(extra.size());
  return t;
}

ExperimentConfig parse_experiment_config(std::string_view json_text) {
  const auto j = nlohmann::json::parse(json_text);
  ExperimentConfig c;
  c.m = j.value("m", Index{100});
  c.n = j.value("n", Index{256});
  c.k_values = j.at("k_values").get<std::vector<Index>>();
  if (j.contains("snr_db")) {
    c.snr_db_values.clear();
    for (const auto& s : j.at("snr_db")) c.snr_db_values.push_back(parse_snr(s));
  }
  c.trials = j.value("trials", std::size_t{500});
  c.seed = j.value("seed", std::uint64_t{0});
  c.fix_matrix = j.value("fix_matrix", false);
  c.threads = j.value("threads", 0u);

  for (const auto& s : j.at("solvers")) {
    SolverSpec spec;
    spec.algorithm = parse_algorithm(s.at("algorithm").get<std::string>());
    spec.label = s.value("label", std::string(to_string(spec.algorithm)));
    spec.config.expansion = s.value("l", Index{1});
    if (s.contains("cap") && !s.at("cap").is_null()) spec.config.max_candidates_per_iter = s.at("cap").get<std::size_t>();
    spec.config.max_paths = s.value("nmax", std::uint64_t{1});
    if (s.contains("epsilon") && !s.at("epsilon").is_null()) spec.config.epsilon = s.at("epsilon").get<double>();
    c.solvers.push_back(std::move(spec));
  }

  if (c.m < 1 || c.n < 1) throw std::invalid_argument("m and n must be positive");
  if (c.trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (c.k_values.empty() || c.solvers.empty() || c.snr_db_values.empty())
    throw std::invalid_argument("k_values, snr_db and solvers must be nonempty");
  for (Index K : c.k_values)
    if (K < 1 || K > c.m) throw std::invalid_argument("every K must be in [1, m]");
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment_config(buffer.str());
}

TrialInstance make_instance(const ExperimentConfig& config, Index K, std::size_t snr_index, std::size_t trial) {
  Rng rng = make_rng(config.seed, {static_cast<std::uint64_t>(K), snr_index, trial});
  std::optional<SensingMatrix> matrix;
  if (config.fix_matrix) {
    Rng fixed = make_rng(config.seed, {kFixedMatrixStream});
    matrix.emplace(gen_sensing_matrix(config.m, config.n, fixed));
  } else {
    matrix.emplace(gen_sensing_matrix(config.m, config.n, rng));
  }
  SparseSignal signal = gen_sparse_signal(config.n, K, rng);
  const Vector clean = matrix->entries() * signal.values;
  Measurement measurement = add_noise(clean, config.snr_db_values.at(snr_index), rng);
  return {std::move(*matrix), std::move(signal), std::move(measurement)};
}

unsigned default_thread_count() {
  if (const char* env = std::getenv("MMP_THREADS")) {
    const int requested = std::atoi(env);
    if (requested > 0) return static_cast<unsigned>(requested);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const std::size_t n_solvers = config.solvers.size();
  const std::size_t n_snr = config.snr_db_values.size();
  const std::size_t n_jobs = config.k_values.size() * n_snr * config.trials;
  // Slot (job, solver); a job is one (K, SNR, trial) instance shared by all solvers.
  std::vector<TrialRecord> slots(n_jobs * n_solvers);

  auto run_job = [&](std::size_t job) {
    const std::size_t trial = job % config.trials;
    const std::size_t snr_index = (job / config.trials) % n_snr;
    const Index K = config.k_values[job / (config.trials * n_snr)];
    const TrialInstance inst = make_instance(config, K, snr_index, trial);

    for (std::size_t s = 0; s < n_solvers; ++s) {
      const SolverSpec& spec = config.solvers[s];
      TrialRecord& rec = slots[job * n_solvers + s];
      rec.trial = trial;
      rec.algorithm = spec.label;
      rec.K = K;
      rec.snr_db = config.snr_db_values[snr_index];

      RecoveryOutput out;
      const auto start = std::chrono::steady_clock::now();
      try {
        out = run_solver(spec, inst.matrix, inst.measurement.y, K, inst.signal.support);
      } catch (const PartialRecovery& e) {
        out = e.best();
        rec.failed = true;
      } catch (const std::exception&) {
        out = RecoveryOutput{};
        out.partial = true;
        rec.failed = true;
      }
      rec.wall_time_ms = elapsed_ms(start);

      const TrialMetrics t = metrics(inst.signal, out);
      rec.exact = t.exact && !rec.failed;
      rec.squared_error = t.squared_error;
      rec.missed = t.missed;
      rec.false_alarms = t.false_alarms;
      rec.candidates_total = std::accumulate(out.stats.candidates_per_iteration.begin(),
                                             out.stats.candidates_per_iteration.end(), std::size_t{0});
    }
  };

  const unsigned workers = std::min<std::size_t>(config.threads ? config.threads : default_thread_count(),
                                                 std::max<std::size_t>(n_jobs, 1));
  if (workers <= 1) {
    for (std::size_t job = 0; job < n_jobs; ++job) run_job(job);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t job = next++; job < n_jobs; job = next++) run_job(job);
      });
  }

  ExperimentResult result;
  for (std::size_t s = 0; s < n_solvers; ++s) {
    for (std::size_t ki = 0; ki < config.k_values.size(); ++ki) {
      for (std::size_t si = 0; si < n_snr; ++si) {
        AggregateRow row;
        row.algorithm = config.solvers[s].label;
        row.K = config.k_values[ki];
        row.snr_db = config.snr_db_values[si];
        std::size_t exact = 0, missed = 0, extra = 0, candidates = 0;
        double sq = 0.0, time = 0.0;
        for (std::size_t trial = 0; trial < config.trials; ++trial) {
          const std::size_t job = (ki * n_snr + si) * config.trials + trial;
          const TrialRecord& rec = slots[job * n_solvers + s];
          exact += rec.exact ? 1 : 0;
          sq += rec.squared_error;
          missed += static_cast<std::size_t>(rec.missed);
          extra += static_cast<std::size_t>(rec.false_alarms);
          candidates += rec.candidates_total;
          time += rec.wall_time_ms;
        }
        const auto trials = static_cast<double>(config.trials);
        const double nonzeros = trials * static_cast<double>(row.K);
        row.err = static_cast<double>(exact) / trials;
        row.mse = sq / trials;
        row.p_md = static_cast<double>(missed) / nonzeros;
        row.p_f = static_cast<double>(extra) / nonzeros;
        row.mean_candidates = static_cast<double>(candidates) / trials;
        row.mean_time_ms = time / trials;
        result.rows.push_back(std::move(row));
      }
    }
  }
  result.trials = std::move(slots);
  return result;
}

}  // namespace mmp
