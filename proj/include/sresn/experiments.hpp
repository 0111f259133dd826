#pragma once

// Seed-averaged prediction experiments on the Mackey-Glass series.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sresn/mackey_glass.hpp"
#include "sresn/readout.hpp"
#include "sresn/reservoir.hpp"

namespace sresn::exp {

inline constexpr double kNoTrainingNoise = std::numeric_limits<double>::infinity();

struct PipelineConfig {
  mg::MGParams mg;
  mg::GridSpec grid;
  // Template for every run; size, activation, SR noise and seed are set per cell.
  esn::ReservoirConfig reservoir;
  // When set, the SR integration interval follows the series spacing.
  bool sr_dt_from_grid = true;
  std::size_t feed_len = 3000;
  std::size_t washout = 1000;
  std::size_t eval_len = 100;
  readout::Method solver = readout::Method::SvdMinNorm;
  double lambda = 0.0;

  // Throws ConfigError.
  void validate() const;
};

struct CellKey {
  esn::ActivationKind activation = esn::ActivationKind::SR;
  std::size_t n = 200;
  double d = 0.0;  // SR noise amplitude; 0 for sigmoid cells
  double snr_db = kNoTrainingNoise;

  friend bool operator==(const CellKey&, const CellKey&) = default;
};

enum class RecordStatus { Ok, Diverged };

std::string_view status_name(RecordStatus s) noexcept;

struct ExperimentRecord {
  CellKey key;
  std::uint64_t seed = 0;
  double mse = std::numeric_limits<double>::quiet_NaN();
  RecordStatus status = RecordStatus::Ok;
};

// Shared immutable inputs: the clean series is integrated once.
class PipelineContext {
 public:
  explicit PipelineContext(PipelineConfig config);

  const PipelineConfig& config() const noexcept { return config_; }
  const mg::MGSeries& clean() const noexcept { return clean_; }

 private:
  PipelineConfig config_;
  mg::MGSeries clean_;
};

// Seed of repetition `rep` for reservoir size n. Activation, SR noise and SNR
// are deliberately not part of the derivation: cells that differ only in
// those share the reservoir draw and noise paths.
std::uint64_t run_seed(std::uint64_t base_seed, std::size_t n, std::size_t repetition) noexcept;
// Training-noise seed; depends on the run seed and the SNR only.
std::uint64_t training_noise_seed(std::uint64_t seed, double snr_db) noexcept;

esn::ReservoirConfig reservoir_config_for(const PipelineConfig& config, const CellKey& key,
                                          std::uint64_t seed);

struct RunArtifacts {
  mg::MGSeries teacher;  // possibly corrupted copy of the clean series
  readout::TrainedReadout readout;
  std::vector<double> predictions;
  std::vector<double> truth;  // clean continuation
  std::size_t first_prediction_index = 0;
  double mse = 0.0;
  std::vector<sr::ProbeSnapshot> probes;
};

// Full pipeline on a built reservoir: corrupt at snr_db (teacher only),
// teacher-force, train, free-run, score against the clean continuation.
// Throws DivergenceError / NumericalError.
RunArtifacts run_pipeline(const PipelineContext& ctx, esn::Reservoir reservoir, double snr_db,
                          std::uint64_t noise_seed, std::vector<std::size_t> probe_steps = {});

// run_pipeline with failures folded into the record status.
ExperimentRecord run_cell(const PipelineContext& ctx, const CellKey& key, std::uint64_t seed);

struct SweepSpec {
  std::vector<std::size_t> n_grid{50, 100, 200, 400};
  std::vector<double> d_grid{0.0, 1e-10, 1e-8, 1e-6};
  std::vector<double> snr_grid{20.0, 30.0, 40.0, kNoTrainingNoise};
  std::vector<esn::ActivationKind> activations{esn::ActivationKind::Sigmoid,
                                               esn::ActivationKind::SR};
  std::size_t n_seeds = 50;
  std::uint64_t base_seed = 1;

  // Throws ConfigError.
  void validate() const;
  // Grid cells in output order; sigmoid cells ignore d_grid (d = 0).
  std::vector<CellKey> cells() const;
};

struct AggregateCell {
  CellKey key;
  double mean_mse = std::numeric_limits<double>::quiet_NaN();
  double std_mse = std::numeric_limits<double>::quiet_NaN();  // sample std of per-run MSE
  double median_mse = std::numeric_limits<double>::quiet_NaN();
  std::size_t n_ok = 0;
  std::size_t n_diverged = 0;
};

struct SweepResult {
  std::vector<ExperimentRecord> records;  // cell-major, repetition-minor
  std::vector<AggregateCell> cells;
};

// Runs every cell x repetition on `jobs` worker threads. Output is
// independent of jobs and of completion order.
SweepResult sweep(const PipelineContext& ctx, const SweepSpec& spec, std::size_t jobs = 1);

// Mean/std/median over Ok records for each key, in the order of `keys`.
std::vector<AggregateCell> aggregate(std::span<const ExperimentRecord> records,
                                     std::span<const CellKey> keys);

struct BestAccuracyRow {
  double snr_db;
  std::string series;  // "sr", "sigmoid", "sigmoid_matched"
  double best_mean_mse;
  double std_mse;
  std::size_t argmin_n;
};

// Per SNR: best-over-n mean MSE for SR (at SR noise sr_d) and sigmoid, plus
// sigmoid evaluated at the SR-optimal n. Cells without Ok records are skipped
// and reported through `warnings`.
std::vector<BestAccuracyRow> best_accuracy_curve(std::span<const AggregateCell> cells, double sr_d,
                                                 std::vector<std::string>* warnings = nullptr);

double mean_squared_error(std::span<const double> a, std::span<const double> b);

void write_records_csv(std::ostream& out, std::span<const ExperimentRecord> records);
void write_aggregate_csv(std::ostream& out, std::span<const AggregateCell> cells);
void write_best_accuracy_csv(std::ostream& out, std::span<const BestAccuracyRow> rows);

}  // namespace sresn::exp
