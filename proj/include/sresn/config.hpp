#pragma once

// Run configuration and reservoir snapshots as JSON.
//
// Parsing is strict: unknown keys and wrongly typed values are ConfigErrors,
// missing keys keep their defaults. An SNR of +infinity (no training noise)
// is written as the string "inf"; "inf" and null are accepted on input.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "sresn/experiments.hpp"
#include "sresn/reservoir.hpp"

namespace sresn::config {

using Json = nlohmann::ordered_json;

// A single pipeline run (train-eval, transfer-fn).
struct RunSpec {
  esn::ActivationKind activation = esn::ActivationKind::SR;
  std::size_t n = 200;
  double d = 1e-10;
  double snr_db = exp::kNoTrainingNoise;
  std::size_t repetition = 0;
};

struct TransferSpec {
  std::vector<std::size_t> steps{1, 10, 1000, 3100};
};

struct RegStudySpec {
  std::size_t m = 3000;
  std::size_t n = 1000;
  std::size_t k = 500;
  std::size_t t = 2000;
  int lambda_lo_exponent = -20;
  int lambda_hi_exponent = 4;
  int per_decade = 1;

  void validate() const;
  std::vector<double> lambda_grid() const;
};

struct RunConfig {
  // Root of every derived seed: run seeds, the sweep base seed, the
  // synthetic regression problem, and the generate-mg noise path.
  std::uint64_t seed = 1;
  // Training-noise level for generate-mg.
  double mg_snr_db = exp::kNoTrainingNoise;
  exp::PipelineConfig pipeline;
  RunSpec run;
  exp::SweepSpec sweep;
  TransferSpec transfer;
  RegStudySpec reg_study;

  // Throws ConfigError.
  void validate() const;
};

Json to_json(const RunConfig& config);
// Throws ConfigError.
RunConfig run_config_from_json(const Json& j);

Json to_json(const esn::ReservoirConfig& config);
esn::ReservoirConfig reservoir_config_from_json(const Json& j);

// Everything needed to rebuild a reservoir bit for bit.
Json snapshot_to_json(const esn::Reservoir& reservoir);
esn::Reservoir reservoir_from_snapshot(const Json& j);

// Throws IoError when the file cannot be read, ConfigError on bad JSON.
Json load_json_file(const std::filesystem::path& path);
// Pretty-printed with a trailing newline. Throws IoError.
void write_json_file(const std::filesystem::path& path, const Json& j);

// Shared JSON encodings.
Json snr_to_json(double snr_db);
double snr_from_json(const Json& j, const std::string& where);

}  // namespace sresn::config
