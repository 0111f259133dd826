#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>

#include "sresn/csv.hpp"
#include "sresn/error.hpp"
#include "sresn/experiments.hpp"
#include "sresn/kernels.hpp"
#include "sresn/mackey_glass.hpp"
#include "sresn/readout.hpp"
#include "sresn/reservoir.hpp"
#include "sresn/rng.hpp"

namespace sresn::cli {
namespace {

namespace fs = std::filesystem;
using config::Json;

constexpr const char* kSnrConvention =
    "snr_db = 10 log10(mean(q^2) / eta^2) over the clean series; white Gaussian noise of "
    "variance eta^2 is added to the teacher segment only, predictions are scored against the "
    "clean continuation; \"inf\" disables the noise";

void prepare_out(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw IoError("cannot create output directory " + out.string());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  return f;
}

void close_out(std::ofstream& f, const fs::path& path) {
  f.close();
  if (!f) throw IoError("write failed: " + path.string());
}

// Metadata carries the defaults and the resolved config, so passing the
// file back through --config reproduces the run.
Json metadata(const Invocation& inv, Json results) {
  const config::RunConfig& c = inv.config;
  return {{"tool", "sresn"},
          {"version", SRESN_VERSION},
          {"command", inv.command},
          {"kernel_isa", kernels::isa_name(kernels::active().isa)},
          {"rng", {{"algorithm", RandomStream::kAlgorithm}, {"seed", c.seed}}},
          {"spectral_radius", c.pipeline.reservoir.spectral_radius},
          {"snr_convention", kSnrConvention},
          {"defaults", config::to_json(config::RunConfig{})},
          {"config", config::to_json(c)},
          {"results", std::move(results)}};
}

void write_common(const Invocation& inv, Json results) {
  config::write_json_file(inv.out / "config.json", config::to_json(inv.config));
  config::write_json_file(inv.out / "metadata.json", metadata(inv, std::move(results)));
}

esn::Reservoir make_reservoir(const Invocation& inv) {
  if (!inv.replay.empty()) return config::reservoir_from_snapshot(config::load_json_file(inv.replay));
  const config::RunSpec& r = inv.config.run;
  const exp::CellKey key{r.activation, r.n, r.d, r.snr_db};
  const std::uint64_t seed = exp::run_seed(inv.config.seed, r.n, r.repetition);
  return esn::Reservoir::build(exp::reservoir_config_for(inv.config.pipeline, key, seed));
}

Json reservoir_summary(const esn::Reservoir& res) {
  return {{"n_neurons", res.size()},
          {"activation", esn::activation_name(res.config().activation)},
          {"noise_amp", res.config().activation == esn::ActivationKind::SR ? res.config().sr.noise_amp : 0.0},
          {"reservoir_seed", res.config().seed},
          {"nnz", res.w().nnz()},
          {"build_attempt", res.build_attempt()},
          {"measured_spectral_radius", esn::spectral_radius(res.w())}};
}

// Runs the pipeline; on a numerical failure writes what exists and reports it.
struct PipelineOutcome {
  std::optional<exp::RunArtifacts> artifacts;
  std::string error;
};

PipelineOutcome run_checked(const exp::PipelineContext& ctx, const esn::Reservoir& res,
                            double snr_db, std::vector<std::size_t> probe_steps = {}) {
  PipelineOutcome out;
  try {
    out.artifacts = exp::run_pipeline(ctx, res, snr_db, exp::training_noise_seed(res.config().seed, snr_db),
                                      std::move(probe_steps));
    if (!std::isfinite(out.artifacts->mse)) {
      out.error = "free run produced a non-finite prediction";
      out.artifacts.reset();
    }
  } catch (const NumericalError& e) {
    out.error = e.what();
  }
  return out;
}

Json readout_json(const readout::TrainedReadout& r) {
  return {{"method", readout::method_name(r.method)},
          {"lambda", r.lambda},
          {"train_residual", r.train_residual},
          {"w_out", std::vector<double>(r.w_out.data(), r.w_out.data() + r.w_out.size())}};
}

}  // namespace

int cmd_generate_mg(const Invocation& inv) {
  const config::RunConfig& c = inv.config;
  prepare_out(inv.out);
  const mg::MGSeries clean = mg::generate_series(c.pipeline.mg, c.pipeline.grid);
  const mg::NoisySpec spec{c.mg_snr_db, derive_seed(c.seed, "generate-mg")};

  const fs::path csv = inv.out / "mg.csv";
  std::ofstream f = open_out(csv);
  Json results = {{"n_points", clean.n_points()}, {"signal_power", mg::signal_power(clean)}};
  if (spec.disabled()) {
    mg::write_csv(f, clean);
  } else {
    const mg::MGSeries noisy = mg::add_awgn(clean, spec);
    mg::write_csv(f, clean, &noisy);
    results["noise_variance"] = mg::noise_variance_for(clean, spec.snr_db);
    results["noise_seed"] = spec.noise_seed;
  }
  close_out(f, csv);
  write_common(inv, std::move(results));
  return kOk;
}

int cmd_train_eval(const Invocation& inv) {
  prepare_out(inv.out);
  const exp::PipelineContext ctx(inv.config.pipeline);
  const esn::Reservoir res = make_reservoir(inv);
  config::write_json_file(inv.out / "snapshot.json", config::snapshot_to_json(res));

  Json results = reservoir_summary(res);
  results["snr_db"] = config::snr_to_json(inv.config.run.snr_db);
  const PipelineOutcome run = run_checked(ctx, res, inv.config.run.snr_db);
  if (!run.artifacts) {
    results["status"] = "diverged";
    results["error"] = run.error;
    write_common(inv, std::move(results));
    std::cerr << "train-eval: " << run.error << '\n';
    return kNumerical;
  }
  const exp::RunArtifacts& art = *run.artifacts;

  const fs::path csv = inv.out / "predictions.csv";
  std::ofstream f = open_out(csv);
  f << "step,y_pred,y_true\n";
  for (std::size_t i = 0; i < art.predictions.size(); ++i) {
    f << art.first_prediction_index + i << ',' << format_double(art.predictions[i]) << ','
      << format_double(art.truth[i]) << '\n';
  }
  close_out(f, csv);
  config::write_json_file(inv.out / "readout.json", readout_json(art.readout));

  const Json metrics = {{"status", "ok"},
                        {"mse", art.mse},
                        {"train_residual", art.readout.train_residual},
                        {"first_prediction_step", art.first_prediction_index},
                        {"eval_len", art.predictions.size()}};
  config::write_json_file(inv.out / "metrics.json", metrics);
  results.update(metrics);
  write_common(inv, std::move(results));
  return kOk;
}

int cmd_transfer_fn(const Invocation& inv) {
  prepare_out(inv.out);
  const exp::PipelineContext ctx(inv.config.pipeline);
  const esn::Reservoir res = make_reservoir(inv);
  if (res.config().activation != esn::ActivationKind::SR) {
    throw ConfigError("transfer-fn: requires the sr activation");
  }
  const std::size_t run_length = inv.config.pipeline.feed_len + inv.config.pipeline.eval_len;
  for (std::size_t s : inv.config.transfer.steps) {
    if (s > run_length) {
      throw DomainError("transfer-fn: step " + std::to_string(s) + " is beyond the run length " +
                        std::to_string(run_length));
    }
  }

  Json results = reservoir_summary(res);
  const PipelineOutcome run = run_checked(ctx, res, inv.config.run.snr_db, inv.config.transfer.steps);
  if (!run.artifacts) {
    results["status"] = "diverged";
    results["error"] = run.error;
    write_common(inv, std::move(results));
    std::cerr << "transfer-fn: " << run.error << '\n';
    return kNumerical;
  }

  const fs::path csv = inv.out / "transfer_fn.csv";
  std::ofstream f = open_out(csv);
  f << "step,neuron,s,xi_next\n";
  for (const sr::ProbeSnapshot& snap : run.artifacts->probes) {
    for (const sr::ProbePoint& p : snap.points) {
      f << snap.step << ',' << p.neuron << ',' << format_double(p.drive) << ','
        << format_double(p.xi_next) << '\n';
    }
  }
  close_out(f, csv);
  results["status"] = "ok";
  results["mse"] = run.artifacts->mse;
  write_common(inv, std::move(results));
  return kOk;
}

int cmd_reg_study(const Invocation& inv) {
  const config::RegStudySpec& spec = inv.config.reg_study;
  prepare_out(inv.out);
  const readout::SynthProblem problem =
      readout::make_synth_problem(spec.m, spec.n, spec.k, spec.t, inv.config.seed);
  const std::vector<double> grid = spec.lambda_grid();
  const std::vector<readout::StudyRow> rows = readout::regularization_study(problem, grid, inv.jobs);

  const fs::path csv = inv.out / "reg_study.csv";
  std::ofstream f = open_out(csv);
  readout::write_study_csv(f, rows);
  close_out(f, csv);

  Json failures = Json::object();
  for (const readout::StudyRow& r : rows) {
    if (r.status != "ok") failures[std::string(readout::method_name(r.method))].push_back(r.lambda);
  }
  write_common(inv, {{"rows", rows.size()}, {"non_ok_lambdas", failures}});
  return kOk;
}

int cmd_sweep(const Invocation& inv) {
  prepare_out(inv.out);
  const exp::PipelineContext ctx(inv.config.pipeline);
  exp::SweepSpec spec = inv.config.sweep;
  spec.base_seed = inv.config.seed;
  const exp::SweepResult result = exp::sweep(ctx, spec, inv.jobs);

  std::vector<std::string> warnings;
  const std::vector<exp::BestAccuracyRow> best =
      exp::best_accuracy_curve(result.cells, inv.config.run.d, &warnings);
  for (const std::string& w : warnings) std::cerr << "sweep: warning: " << w << '\n';

  auto emit = [&](const char* name, auto&& writer) {
    const fs::path path = inv.out / name;
    std::ofstream f = open_out(path);
    writer(f);
    close_out(f, path);
  };
  emit("records.csv", [&](std::ostream& o) { exp::write_records_csv(o, result.records); });
  emit("aggregate.csv", [&](std::ostream& o) { exp::write_aggregate_csv(o, result.cells); });
  emit("best_accuracy.csv", [&](std::ostream& o) { exp::write_best_accuracy_csv(o, best); });
  emit("medians.csv", [&](std::ostream& o) {
    o << "activation,n,d,snr_db,median_mse\n";
    for (const exp::AggregateCell& c : result.cells) {
      o << esn::activation_name(c.key.activation) << ',' << c.key.n << ',' << format_double(c.key.d)
        << ',' << format_double(c.key.snr_db) << ',' << format_double(c.median_mse) << '\n';
    }
  });

  std::size_t diverged = 0;
  for (const exp::ExperimentRecord& r : result.records) {
    diverged += r.status == exp::RecordStatus::Diverged;
  }
  write_common(inv, {{"cells", result.cells.size()},
                     {"records", result.records.size()},
                     {"diverged", diverged},
                     {"best_accuracy_sr_d", inv.config.run.d},
                     {"warnings", warnings}});
  return kOk;
}

}  // namespace sresn::cli
