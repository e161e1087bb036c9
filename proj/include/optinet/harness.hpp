#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "optinet/core.hpp"
#include "optinet/rules.hpp"
#include "optinet/synth.hpp"

namespace optinet {

enum class CompressionMode { none, simultaneous_exact, simultaneous_approx, iterative_approx };

std::string_view to_string(CompressionMode mode);
CompressionMode parse_compression_mode(std::string_view name);

/// Applies a compression mode to a fitted rule. Approximate modes estimate
/// the neighbor relation from `train_points`.
PrototypeRule apply_compression(const PrototypeRule& rule, CompressionMode mode,
                                const PointSet& train_points);

/// One sweep: every rule kind x every n in the grid x `trials` repetitions.
///
/// Synthetic runs draw train and test sets from the radial family. When
/// `data_csv` is set, each trial instead splits that file into train/test
/// and subsamples the training part down to n (an empty grid means "all").
struct ExperimentConfig {
  std::vector<RuleKind> rules{RuleKind::optinet};
  Schedule schedule{1.0, 1.0, 2};
  std::optional<double> t;                  // radial boundary; default formula
  std::vector<std::size_t> n_grid;
  std::size_t trials = 1;
  std::size_t test_size = 10000;
  CompressionMode compression = CompressionMode::none;
  std::uint64_t master_seed = 0;
  std::size_t k = 10;                       // knn and protoknn
  std::optional<double> gamma;              // fixed gamma instead of the schedule
  std::optional<std::size_t> pool_size;     // 0 = whole training set; unset = m_schedule
  std::size_t burn_in = 1;                  // smallest grid points left out of slope fits
  unsigned workers = 1;
  double envelope_factor = 49.0;            // boundary envelope, in units of gamma_n
  std::optional<std::string> data_csv;
  double test_fraction = 0.2;

  void validate() const;
  bool synthetic() const { return !data_csv.has_value(); }
};

nlohmann::json config_to_json(const ExperimentConfig& config);
/// Missing keys take the defaults above; throws InvalidArgument when malformed.
ExperimentConfig config_from_json(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// FNV-1a (64-bit, hex) of the canonical JSON form of the config.
std::string config_hash(const ExperimentConfig& config);

/// Per-(rule, n, trial) seed: derive_seed(master_seed, {n, trial}). Data
/// streams hang off it: {1} train, {2} test, {3} pool order, {4} prototype
/// draw, {5} train/test split. Rules share the data of a given (n, trial).
std::uint64_t trial_seed(const ExperimentConfig& config, std::size_t n, std::size_t trial);

struct TrialRecord {
  RuleKind rule = RuleKind::optinet;
  std::size_t n = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::optional<double> gamma;
  std::size_t pool_size = 0;
  std::size_t test_size = 0;
  double test_error = 0.0;
  /// Mean of eta(x) * [g(x) != g*(x)] over the test points (synthetic only).
  std::optional<double> excess_error;
  /// test_error - L* and its binomial standard error (synthetic only).
  std::optional<double> excess_error_raw;
  std::optional<double> excess_error_raw_se;
  std::size_t proto_count_before = 0;
  std::size_t proto_count_after = 0;
  double compression_before = 0.0;
  double compression_after = 0.0;
  std::size_t empty_cell_count = 0;
  std::size_t excluded_query_count = 0;
  std::size_t changed_predictions = 0;
  std::optional<double> boundary_concentration_before;
  std::optional<double> boundary_concentration_after;
  double fit_ms = 0.0;
  double compress_ms = 0.0;
  double query_ns_per_point = 0.0;
};

struct SlopeFit {
  double slope = 0.0;
  double stderr_ = 0.0;
};

/// Least squares of log y on log x. Needs >= 3 points, all positive.
SlopeFit fit_slope(std::span<const double> xs, std::span<const double> ys);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

struct GridSummary {
  RuleKind rule = RuleKind::optinet;
  std::size_t n = 0;
  std::optional<double> gamma;
  MeanStd test_error;
  std::optional<MeanStd> excess_error;
  MeanStd compression_before;
  MeanStd compression_after;
  MeanStd count_before;
  MeanStd count_after;
  std::optional<MeanStd> boundary_concentration_before;
  std::optional<MeanStd> boundary_concentration_after;
  MeanStd fit_ms;
};

struct RuleSlopes {
  RuleKind rule = RuleKind::optinet;
  std::optional<SlopeFit> excess_error;
  std::optional<SlopeFit> compression_before;
  std::optional<SlopeFit> compression_after;
  std::optional<SlopeFit> count_after;
  std::optional<SlopeFit> fit_ms;
  /// Fits over each trial index separately (same grid, burn-in applied).
  std::vector<SlopeFit> per_trial_compression_before;
  std::vector<SlopeFit> per_trial_compression_after;
};

struct SweepResult {
  ExperimentConfig config;
  std::string config_hash;
  std::optional<double> bayes_error;
  std::vector<TrialRecord> records;  // ordered by (rule, n, trial)
  std::vector<GridSummary> grid;
  std::vector<RuleSlopes> slopes;
};

TrialRecord run_trial(const ExperimentConfig& config, RuleKind rule, std::size_t n,
                      std::size_t trial);

/// Runs every trial, `config.workers` at a time, then aggregates and fits.
SweepResult run_sweep(const ExperimentConfig& config);

/// Aggregation and slope fitting over finished records.
void summarize(SweepResult& result);

/// Fraction of prototypes within `envelope` of the decision boundary.
double boundary_concentration(const PrototypeRule& rule, const RadialSpec& spec,
                              double envelope);

/// Seeded shuffle, then the first round(test_fraction * n) samples form the
/// test set. Throws InvalidArgument if either side would be empty.
std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& data,
                                                double test_fraction, std::uint64_t seed);

nlohmann::json record_to_json(const TrialRecord& record, bool with_timings = true);
nlohmann::json summary_to_json(const SweepResult& result);

struct ResultPaths {
  std::filesystem::path records;
  std::filesystem::path summary;
  std::optional<std::filesystem::path> plot_data;
};

/// Writes records.jsonl and summary.json into `dir` (plus plot_data.csv with
/// columns rule,n,metric,mean,std when requested). Without timings the
/// output is a pure function of the config.
ResultPaths save_results(const SweepResult& result, const std::filesystem::path& dir,
                         bool emit_plot_data, bool with_timings = true);

/// Loads the radial spec a synthetic config describes.
RadialSpec spec_for(const ExperimentConfig& config);

}  // namespace optinet
