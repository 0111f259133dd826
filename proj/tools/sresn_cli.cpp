// sresn_cli: command-line front end for the SR echo state network experiments.
//
//   sresn_cli <command> --out DIR [--config FILE] [--seed N] [--jobs N] [flags]
//
// Commands: generate-mg, train-eval, transfer-fn, reg-study, sweep.
// Exit status: 0 success, 1 usage or configuration error, 2 numerical failure
// (divergence, ill-conditioning), 3 I/O error.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "commands.hpp"
#include "sresn/error.hpp"
#include "sresn/readout.hpp"

namespace {

using namespace sresn;

double parse_snr(const std::string& text) {
  if (text == "inf") return exp::kNoTrainingNoise;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !std::isfinite(v)) {
    throw ConfigError("--snr-db: expected a number or 'inf', got '" + text + "'");
  }
  return v;
}

// Accepts both a plain config file and a metadata.json written by a previous run.
config::RunConfig load_config(const std::string& path) {
  config::Json j = config::load_json_file(path);
  if (j.is_object() && j.contains("tool") && j.contains("config")) j = j["config"];
  return config::run_config_from_json(j);
}

struct Flags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t jobs = 1;

  std::optional<std::string> snr_db;
  std::optional<std::string> activation;
  std::optional<std::size_t> n;
  std::optional<double> d;
  std::optional<std::size_t> repetition;
  std::optional<std::string> solver;
  std::optional<double> lambda;
  std::string replay;

  std::optional<std::size_t> n_seeds;
  std::vector<std::size_t> n_grid;
  std::vector<double> d_grid;
  std::vector<std::string> snr_grid;
  std::vector<std::string> activations;

  std::optional<int> lambda_lo;
  std::optional<int> lambda_hi;
  std::optional<int> per_decade;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config_path, "JSON config (or a previous metadata.json)");
  sub->add_option("--seed", f.seed, "Root seed");
  sub->add_option("--out", f.out, "Output directory")->required();
  sub->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

void add_run(CLI::App* sub, Flags& f) {
  sub->add_option("--activation", f.activation, "sr or sigmoid");
  sub->add_option("--n", f.n, "Reservoir size");
  sub->add_option("--d", f.d, "SR noise amplitude");
  sub->add_option("--snr-db", f.snr_db, "Training SNR in dB, or inf");
  sub->add_option("--repetition", f.repetition, "Repetition index of the run seed");
  sub->add_option("--solver", f.solver, "svd, qr or ridge");
  sub->add_option("--lambda", f.lambda, "Ridge parameter");
  sub->add_option("--replay", f.replay, "Rebuild the reservoir from a snapshot.json");
}

cli::Invocation resolve(const std::string& command, const Flags& f) {
  cli::Invocation inv;
  inv.command = command;
  inv.out = f.out;
  inv.jobs = f.jobs;
  inv.replay = f.replay;

  config::RunConfig& c = inv.config;
  if (!f.config_path.empty()) c = load_config(f.config_path);
  if (f.seed) {
    c.seed = *f.seed;
    c.sweep.base_seed = *f.seed;
  }
  if (f.snr_db) {
    const double snr = parse_snr(*f.snr_db);
    if (command == "generate-mg") {
      c.mg_snr_db = snr;
    } else {
      c.run.snr_db = snr;
    }
  }
  if (f.activation) c.run.activation = esn::parse_activation(*f.activation);
  if (f.n) c.run.n = *f.n;
  if (f.d) c.run.d = *f.d;
  if (f.repetition) c.run.repetition = *f.repetition;
  if (f.solver) c.pipeline.solver = readout::parse_method(*f.solver);
  if (f.lambda) c.pipeline.lambda = *f.lambda;

  if (f.n_seeds) c.sweep.n_seeds = *f.n_seeds;
  if (!f.n_grid.empty()) c.sweep.n_grid = f.n_grid;
  if (!f.d_grid.empty()) c.sweep.d_grid = f.d_grid;
  if (!f.snr_grid.empty()) {
    c.sweep.snr_grid.clear();
    for (const std::string& s : f.snr_grid) c.sweep.snr_grid.push_back(parse_snr(s));
  }
  if (!f.activations.empty()) {
    c.sweep.activations.clear();
    for (const std::string& a : f.activations) c.sweep.activations.push_back(esn::parse_activation(a));
  }

  if (f.lambda_lo) c.reg_study.lambda_lo_exponent = *f.lambda_lo;
  if (f.lambda_hi) c.reg_study.lambda_hi_exponent = *f.lambda_hi;
  if (f.per_decade) c.reg_study.per_decade = *f.per_decade;

  c.validate();
  return inv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic-resonance echo state network experiments"};
  app.require_subcommand(1);
  Flags flags;

  CLI::App* gen = app.add_subcommand("generate-mg", "Write the Mackey-Glass series (optionally noisy)");
  add_common(gen, flags);
  gen->add_option("--snr-db", flags.snr_db, "Add noise at this SNR (dB), or inf");

  CLI::App* train = app.add_subcommand("train-eval", "Train one network and score its free run");
  add_common(train, flags);
  add_run(train, flags);

  CLI::App* transfer = app.add_subcommand("transfer-fn", "Dump SR transfer-function scatter");
  add_common(transfer, flags);
  add_run(transfer, flags);

  CLI::App* reg = app.add_subcommand("reg-study", "Compare readout solvers on a rank-deficient problem");
  add_common(reg, flags);
  reg->add_option("--lambda-lo", flags.lambda_lo, "Smallest lambda exponent");
  reg->add_option("--lambda-hi", flags.lambda_hi, "Largest lambda exponent");
  reg->add_option("--per-decade", flags.per_decade, "Grid points per decade");

  CLI::App* sw = app.add_subcommand("sweep", "Seed-averaged sweep over (activation, N, D, SNR)");
  add_common(sw, flags);
  sw->add_option("--n-seeds", flags.n_seeds, "Repetitions per cell");
  sw->add_option("--n-grid", flags.n_grid, "Reservoir sizes");
  sw->add_option("--d-grid", flags.d_grid, "SR noise amplitudes");
  sw->add_option("--snr-grid", flags.snr_grid, "Training SNRs (dB or inf)");
  sw->add_option("--activations", flags.activations, "Subset of sr, sigmoid");
  sw->add_option("--d", flags.d, "SR noise used for the best-accuracy table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const std::string command = chosen->get_name();
  try {
    const cli::Invocation inv = resolve(command, flags);
    if (command == "generate-mg") return cli::cmd_generate_mg(inv);
    if (command == "train-eval") return cli::cmd_train_eval(inv);
    if (command == "transfer-fn") return cli::cmd_transfer_fn(inv);
    if (command == "reg-study") return cli::cmd_reg_study(inv);
    return cli::cmd_sweep(inv);
  } catch (const IoError& e) {
    std::cerr << command << ": " << e.what() << '\n';
    return cli::kIo;
  } catch (const NumericalError& e) {
    std::cerr << command << ": " << e.what() << '\n';
    return cli::kNumerical;
  } catch (const Error& e) {
    std::cerr << command << ": " << e.what() << '\n';
    return cli::kUsage;
  }
}
