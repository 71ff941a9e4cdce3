#ifndef MMP_BENCH_HPP
#define MMP_BENCH_HPP

#include "mmp/core.hpp"
#include "mmp/random.hpp"
#include "mmp/solvers.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mmp {

/// N(0, 1/m) entries.
SensingMatrix gen_sensing_matrix(Index m, Index n, Rng& rng);

/// Uniformly random size-K support, N(0, 1) nonzeros.
SparseSignal gen_sparse_signal(Index n, Index K, Rng& rng);

/// y = y_clean + v with v_i ~ N(0, 10^(-snr_db/10)). No SNR (or +inf) means
/// noiseless: v = 0.
Measurement add_noise(const Vector& y_clean, std::optional<double> snr_db, Rng& rng);

enum class Algorithm { omp, mmp_bf, mmp_df, oracle };
std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view name);

struct SolverSpec {
  std::string label;
  Algorithm algorithm = Algorithm::omp;
  SolverConfig config;  // sparsity is overwritten per cell
};

/// Runs one solver. Oracle uses `true_support`.
RecoveryOutput run_solver(const SolverSpec& spec, const SensingMatrix& matrix, const Vector& y,
                          Index K, const Support& true_support);

struct TrialMetrics {
  bool exact = false;
  double squared_error = 0.0;
  Index missed = 0;
  Index false_alarms = 0;
};

TrialMetrics metrics(const SparseSignal& x_true, const RecoveryOutput& output);

struct ExperimentConfig {
  Index m = 100;
  Index n = 256;
  std::vector<Index> k_values;
  std::vector<std::optional<double>> snr_db_values{std::nullopt};  // nullopt = noiseless
  std::size_t trials = 500;
  std::uint64_t seed = 0;
  bool fix_matrix = false;
  std::vector<SolverSpec> solvers;
  /// Worker threads; 0 means MMP_THREADS or the hardware concurrency.
  unsigned threads = 0;
};

/// Reads the JSON experiment description (see README for the schema).
ExperimentConfig parse_experiment_config(std::string_view json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct TrialRecord {
  std::size_t trial = 0;
  std::string algorithm;
  Index K = 0;
  std::optional<double> snr_db;
  bool exact = false;
  bool failed = false;  // solver threw
  double squared_error = 0.0;
  Index missed = 0;
  Index false_alarms = 0;
  std::size_t candidates_total = 0;
  double wall_time_ms = 0.0;
};

struct AggregateRow {
  std::string algorithm;
  Index K = 0;
  std::optional<double> snr_db;
  double err = 0.0;
  double mse = 0.0;
  double p_md = 0.0;
  double p_f = 0.0;
  double mean_candidates = 0.0;
  double mean_time_ms = 0.0;
};

struct ExperimentResult {
  std::vector<AggregateRow> rows;
  std::vector<TrialRecord> trials;
};

/// One synthetic problem. Every solver in a sweep sees the same instance for
/// a given (K, SNR index, trial).
struct TrialInstance {
  SensingMatrix matrix;
  SparseSignal signal;
  Measurement measurement;
};

TrialInstance make_instance(const ExperimentConfig& config, Index K, std::size_t snr_index, std::size_t trial);

ExperimentResult run_experiment(const ExperimentConfig& config);

/// Worker count from MMP_THREADS, else the hardware concurrency (at least 1).
unsigned default_thread_count();

// Output.

/// Header: algorithm,K,snr_db,err,mse,p_md,p_f,mean_candidates,mean_time_ms.
/// snr_db is "inf" for noiseless rows.
std::string to_csv(const std::vector<AggregateRow>& rows);
std::vector<AggregateRow> parse_csv(std::string_view text);

/// Decibel value of an MSE, 10 log10(mse).
double to_db(double value);

/// Line chart of ERR against K (noiseless rows), one series per algorithm.
std::string err_plot_svg(const std::vector<AggregateRow>& rows);
/// Line chart of MSE in dB against SNR, one series per (algorithm, K).
std::string mse_plot_svg(const std::vector<AggregateRow>& rows);

/// Writes results.csv (and err.svg / mse.svg when `plot`) into `dir`.
/// Returns the paths written.
std::vector<std::filesystem::path> emit_results(const std::vector<AggregateRow>& rows,
                                                const std::filesystem::path& dir, bool plot);

}  // namespace mmp

#endif  // MMP_BENCH_HPP
