#include "sresn/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <map>
#include <ostream>
#include <thread>

#include "sresn/csv.hpp"
#include "sresn/error.hpp"
#include "sresn/rng.hpp"

namespace sresn::exp {

void PipelineConfig::validate() const {
  mg.validate();
  if (grid.n_points < 2) throw ConfigError("pipeline: grid needs at least 2 points");
  if (washout >= feed_len) throw ConfigError("pipeline: washout must be < feed_len");
  if (feed_len + eval_len >= grid.n_points) {
    throw ConfigError("pipeline: feed_len + eval_len must be < grid.n_points");
  }
  if (!(lambda >= 0.0)) throw ConfigError("pipeline: lambda must be >= 0");
  reservoir.validate();
}

std::string_view status_name(RecordStatus s) noexcept {
  return s == RecordStatus::Ok ? "ok" : "diverged";
}

PipelineContext::PipelineContext(PipelineConfig config) : config_(std::move(config)) {
  config_.validate();
  clean_ = mg::generate_series(config_.mg, config_.grid);
}

std::uint64_t run_seed(std::uint64_t base_seed, std::size_t n, std::size_t repetition) noexcept {
  return derive_seed(base_seed, "run", n, repetition);
}

std::uint64_t training_noise_seed(std::uint64_t seed, double snr_db) noexcept {
  return derive_seed(seed, "mg.awgn", std::bit_cast<std::uint64_t>(snr_db));
}

esn::ReservoirConfig reservoir_config_for(const PipelineConfig& config, const CellKey& key,
                                          std::uint64_t seed) {
  esn::ReservoirConfig rc = config.reservoir;
  rc.n_neurons = key.n;
  rc.activation = key.activation;
  rc.sr.noise_amp = key.activation == esn::ActivationKind::SR ? key.d : 0.0;
  if (config.sr_dt_from_grid) rc.sr.dt = config.grid.dt;
  rc.seed = seed;
  return rc;
}

double mean_squared_error(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) throw ConfigError("mse: length mismatch or empty");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double e = a[i] - b[i];
    acc += e * e;
  }
  return acc / static_cast<double>(a.size());
}

RunArtifacts run_pipeline(const PipelineContext& ctx, esn::Reservoir reservoir, double snr_db,
                          std::uint64_t noise_seed, std::vector<std::size_t> probe_steps) {
  const PipelineConfig& cfg = ctx.config();
  RunArtifacts art;
  art.teacher = mg::add_awgn(ctx.clean(), mg::NoisySpec{snr_db, noise_seed});
  if (!probe_steps.empty()) reservoir.record_transfer_steps(probe_steps);

  const esn::StateMatrix harvested =
      esn::teacher_forced_run(reservoir, art.teacher, cfg.feed_len, cfg.washout);
  art.readout = readout::solve(cfg.solver, harvested.states, harvested.targets, cfg.lambda);
  art.predictions = esn::free_run(reservoir, art.readout, cfg.eval_len);

  art.first_prediction_index = cfg.feed_len + 1;
  const auto first = ctx.clean().values.begin() + static_cast<std::ptrdiff_t>(art.first_prediction_index);
  art.truth.assign(first, first + static_cast<std::ptrdiff_t>(cfg.eval_len));
  art.mse = cfg.eval_len > 0 ? mean_squared_error(art.predictions, art.truth) : 0.0;

  if (!probe_steps.empty()) {
    art.probes = sr::transfer_probe(*reservoir.sr_bank(), probe_steps);
  }
  return art;
}

ExperimentRecord run_cell(const PipelineContext& ctx, const CellKey& key, std::uint64_t seed) {
  ExperimentRecord rec;
  rec.key = key;
  rec.seed = seed;
  try {
    esn::Reservoir reservoir = esn::Reservoir::build(reservoir_config_for(ctx.config(), key, seed));
    const RunArtifacts art =
        run_pipeline(ctx, std::move(reservoir), key.snr_db, training_noise_seed(seed, key.snr_db));
    rec.mse = art.mse;
    rec.status = std::isfinite(art.mse) ? RecordStatus::Ok : RecordStatus::Diverged;
  } catch (const NumericalError&) {
    rec.status = RecordStatus::Diverged;
  }
  return rec;
}

void SweepSpec::validate() const {
  if (n_grid.empty() || snr_grid.empty() || activations.empty()) {
    throw ConfigError("sweep: n_grid, snr_grid and activations must be non-empty");
  }
  const bool has_sr =
      std::find(activations.begin(), activations.end(), esn::ActivationKind::SR) != activations.end();
  if (has_sr && d_grid.empty()) throw ConfigError("sweep: d_grid must be non-empty for SR");
  for (double d : d_grid) {
    if (!(d >= 0.0) || !std::isfinite(d)) throw ConfigError("sweep: d values must be finite and >= 0");
  }
  for (double s : snr_grid) {
    if (std::isnan(s) || s == -std::numeric_limits<double>::infinity()) {
      throw ConfigError("sweep: snr values must be finite or +inf");
    }
  }
  for (std::size_t n : n_grid) {
    if (n < 1) throw ConfigError("sweep: n values must be >= 1");
  }
  if (n_seeds < 1) throw ConfigError("sweep: n_seeds must be >= 1");
}

std::vector<CellKey> SweepSpec::cells() const {
  std::vector<CellKey> out;
  for (esn::ActivationKind act : activations) {
    for (std::size_t n : n_grid) {
      if (act == esn::ActivationKind::Sigmoid) {
        for (double snr : snr_grid) out.push_back({act, n, 0.0, snr});
      } else {
        for (double d : d_grid) {
          for (double snr : snr_grid) out.push_back({act, n, d, snr});
        }
      }
    }
  }
  return out;
}

std::vector<AggregateCell> aggregate(std::span<const ExperimentRecord> records,
                                     std::span<const CellKey> keys) {
  std::vector<AggregateCell> out;
  out.reserve(keys.size());
  for (const CellKey& key : keys) {
    AggregateCell cell;
    cell.key = key;
    std::vector<double> ok;
    for (const ExperimentRecord& r : records) {
      if (!(r.key == key)) continue;
      if (r.status == RecordStatus::Ok) {
        ok.push_back(r.mse);
      } else {
        ++cell.n_diverged;
      }
    }
    cell.n_ok = ok.size();
    if (!ok.empty()) {
      double sum = 0.0;
      for (double v : ok) sum += v;
      cell.mean_mse = sum / static_cast<double>(ok.size());
      double ss = 0.0;
      for (double v : ok) ss += (v - cell.mean_mse) * (v - cell.mean_mse);
      cell.std_mse = ok.size() > 1 ? std::sqrt(ss / static_cast<double>(ok.size() - 1)) : 0.0;
      std::sort(ok.begin(), ok.end());
      const std::size_t h = ok.size() / 2;
      cell.median_mse = ok.size() % 2 ? ok[h] : 0.5 * (ok[h - 1] + ok[h]);
    }
    out.push_back(cell);
  }
  return out;
}

SweepResult sweep(const PipelineContext& ctx, const SweepSpec& spec, std::size_t jobs) {
  spec.validate();
  const std::vector<CellKey> keys = spec.cells();
  const std::size_t n_tasks = keys.size() * spec.n_seeds;
  SweepResult result;
  result.records.resize(n_tasks);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < n_tasks; t = next++) {
      const CellKey& key = keys[t / spec.n_seeds];
      const std::size_t rep = t % spec.n_seeds;
      result.records[t] = run_cell(ctx, key, run_seed(spec.base_seed, key.n, rep));
    }
  };
  const std::size_t width = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n_tasks, 1));
  {
    std::vector<std::jthread> pool;
    for (std::size_t i = 1; i < width; ++i) pool.emplace_back(worker);
    worker();
  }
  result.cells = aggregate(result.records, keys);
  return result;
}

std::vector<BestAccuracyRow> best_accuracy_curve(std::span<const AggregateCell> cells, double sr_d,
                                                 std::vector<std::string>* warnings) {
  std::vector<double> snrs;
  for (const AggregateCell& c : cells) {
    if (std::find(snrs.begin(), snrs.end(), c.key.snr_db) == snrs.end()) snrs.push_back(c.key.snr_db);
  }
  std::sort(snrs.begin(), snrs.end());

  auto best_of = [&](double snr, esn::ActivationKind act) -> const AggregateCell* {
    const AggregateCell* best = nullptr;
    for (const AggregateCell& c : cells) {
      if (c.key.snr_db != snr || c.key.activation != act) continue;
      if (act == esn::ActivationKind::SR && c.key.d != sr_d) continue;
      if (c.n_ok == 0) {
        if (warnings) {
          warnings->push_back("no ok records for " + std::string(esn::activation_name(act)) +
                              " n=" + std::to_string(c.key.n) + " snr=" + format_double(snr));
        }
        continue;
      }
      if (!best || c.mean_mse < best->mean_mse) best = &c;
    }
    return best;
  };

  std::vector<BestAccuracyRow> rows;
  for (double snr : snrs) {
    const AggregateCell* sr_best = best_of(snr, esn::ActivationKind::SR);
    const AggregateCell* sig_best = best_of(snr, esn::ActivationKind::Sigmoid);
    if (sr_best) rows.push_back({snr, "sr", sr_best->mean_mse, sr_best->std_mse, sr_best->key.n});
    if (sig_best) {
      rows.push_back({snr, "sigmoid", sig_best->mean_mse, sig_best->std_mse, sig_best->key.n});
    }
    if (sr_best) {
      for (const AggregateCell& c : cells) {
        if (c.key.activation == esn::ActivationKind::Sigmoid && c.key.snr_db == snr &&
            c.key.n == sr_best->key.n && c.n_ok > 0) {
          rows.push_back({snr, "sigmoid_matched", c.mean_mse, c.std_mse, c.key.n});
        }
      }
    }
  }
  return rows;
}

void write_records_csv(std::ostream& out, std::span<const ExperimentRecord> records) {
  out << "activation,n,d,snr_db,seed,mse,status\n";
  for (const ExperimentRecord& r : records) {
    out << esn::activation_name(r.key.activation) << ',' << r.key.n << ',' << format_double(r.key.d)
        << ',' << format_double(r.key.snr_db) << ',' << r.seed << ',' << format_double(r.mse) << ','
        << status_name(r.status) << '\n';
  }
}

void write_aggregate_csv(std::ostream& out, std::span<const AggregateCell> cells) {
  out << "activation,n,d,snr_db,mean_mse,std_mse,n_ok,n_diverged\n";
  for (const AggregateCell& c : cells) {
    out << esn::activation_name(c.key.activation) << ',' << c.key.n << ',' << format_double(c.key.d)
        << ',' << format_double(c.key.snr_db) << ',' << format_double(c.mean_mse) << ','
        << format_double(c.std_mse) << ',' << c.n_ok << ',' << c.n_diverged << '\n';
  }
}

void write_best_accuracy_csv(std::ostream& out, std::span<const BestAccuracyRow> rows) {
  out << "snr_db,series,best_mean_mse,std_mse,argmin_n\n";
  for (const BestAccuracyRow& r : rows) {
    out << format_double(r.snr_db) << ',' << r.series << ',' << format_double(r.best_mean_mse) << ','
        << format_double(r.std_mse) << ',' << r.argmin_n << '\n';
  }
}

}  // namespace sresn::exp
