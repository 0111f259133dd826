#include "sresn/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "sresn/error.hpp"
#include "sresn/readout.hpp"

namespace sresn::config {
namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError("config: " + where + ": " + what);
}

// Walks one JSON object, remembering which keys were consumed so that
// anything left over can be reported.
class Fields {
 public:
  Fields(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail(where_, "expected an object");
  }

  const Json* find(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string path(const char* key) const { return where_ + "." + key; }

  void number(const char* key, double& out) {
    if (const Json* v = find(key)) {
      if (!v->is_number()) fail(path(key), "expected a number");
      out = v->get<double>();
    }
  }

  void snr(const char* key, double& out) {
    if (const Json* v = find(key)) out = snr_from_json(*v, path(key));
  }

  template <class Int>
  void integer(const char* key, Int& out) {
    if (const Json* v = find(key)) {
      if constexpr (std::is_unsigned_v<Int>) {
        if (!v->is_number_unsigned()) fail(path(key), "expected a non-negative integer");
        out = static_cast<Int>(v->get<std::uint64_t>());
      } else {
        if (!v->is_number_integer()) fail(path(key), "expected an integer");
        out = static_cast<Int>(v->get<std::int64_t>());
      }
    }
  }

  void boolean(const char* key, bool& out) {
    if (const Json* v = find(key)) {
      if (!v->is_boolean()) fail(path(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  const std::string* string(const char* key) {
    const Json* v = find(key);
    if (!v) return nullptr;
    if (!v->is_string()) fail(path(key), "expected a string");
    return v->get_ptr<const std::string*>();
  }

  const Json* array(const char* key) {
    const Json* v = find(key);
    if (v && !v->is_array()) fail(path(key), "expected an array");
    return v;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) fail(where_, "unknown key '" + key + "'");
    }
  }

 private:
  const Json& j_;
  std::string where_;
  std::set<std::string, std::less<>> seen_;
};

// ConfigError instead of the library's own exception for bad enum names.
template <class F>
auto parse_name(const std::string& where, F&& parse) {
  try {
    return parse();
  } catch (const ConfigError& e) {
    fail(where, e.what());
  }
}

std::string_view shape_name(esn::SigmoidShape s) noexcept {
  return s == esn::SigmoidShape::Tanh ? "tanh" : "logistic";
}

esn::SigmoidShape parse_shape(const std::string& name, const std::string& where) {
  if (name == "tanh") return esn::SigmoidShape::Tanh;
  if (name == "logistic") return esn::SigmoidShape::Logistic;
  fail(where, "unknown sigmoid shape '" + name + "'");
}

Json mg_to_json(const mg::MGParams& p) {
  return {{"a", p.a},
          {"b", p.b},
          {"tau", p.tau},
          {"exponent", p.exponent},
          {"history_value", p.history_value},
          {"t_end", p.t_end},
          {"integrator_step", p.integrator_step}};
}

mg::MGParams mg_from_json(const Json& j, const std::string& where) {
  mg::MGParams p;
  Fields f(j, where);
  f.number("a", p.a);
  f.number("b", p.b);
  f.number("tau", p.tau);
  f.number("exponent", p.exponent);
  f.number("history_value", p.history_value);
  f.number("t_end", p.t_end);
  f.number("integrator_step", p.integrator_step);
  f.finish();
  return p;
}

Json grid_to_json(const mg::GridSpec& g) {
  return {{"t_start", g.t_start}, {"n_points", g.n_points}, {"dt", g.dt}};
}

mg::GridSpec grid_from_json(const Json& j, const std::string& where) {
  mg::GridSpec g;
  Fields f(j, where);
  f.number("t_start", g.t_start);
  f.integer("n_points", g.n_points);
  f.number("dt", g.dt);
  f.finish();
  return g;
}

// `dt_from_grid` selects the null encoding of dt.
Json sr_to_json(const sr::SRParams& p, bool with_noise, const bool* dt_from_grid) {
  Json j = {{"alpha", p.alpha}, {"beta", p.beta}};
  if (with_noise) j["noise_amp"] = p.noise_amp;
  if (dt_from_grid && *dt_from_grid) {
    j["dt"] = nullptr;
  } else {
    j["dt"] = p.dt;
  }
  j["sde_scaling"] = p.sde_scaling;
  return j;
}

sr::SRParams sr_from_json(const Json& j, const std::string& where, bool with_noise,
                          bool* dt_from_grid) {
  sr::SRParams p;
  Fields f(j, where);
  f.number("alpha", p.alpha);
  f.number("beta", p.beta);
  if (with_noise) f.number("noise_amp", p.noise_amp);
  if (const Json* v = f.find("dt")) {
    if (v->is_null() && dt_from_grid) {
      *dt_from_grid = true;
    } else if (v->is_number()) {
      p.dt = v->get<double>();
      if (dt_from_grid) *dt_from_grid = false;
    } else {
      fail(f.path("dt"), dt_from_grid ? "expected a number or null" : "expected a number");
    }
  }
  f.boolean("sde_scaling", p.sde_scaling);
  f.finish();
  return p;
}

Json reservoir_template_to_json(const exp::PipelineConfig& p) {
  const esn::ReservoirConfig& r = p.reservoir;
  return {{"connectivity", r.connectivity},
          {"spectral_radius", r.spectral_radius},
          {"w_back_scale", r.w_back_scale},
          {"w_in_scale", r.w_in_scale},
          {"sigmoid_shape", shape_name(r.sigmoid_shape)},
          {"sr", sr_to_json(r.sr, false, &p.sr_dt_from_grid)}};
}

void reservoir_template_from_json(const Json& j, const std::string& where,
                                  exp::PipelineConfig& p) {
  esn::ReservoirConfig& r = p.reservoir;
  Fields f(j, where);
  f.number("connectivity", r.connectivity);
  f.number("spectral_radius", r.spectral_radius);
  f.number("w_back_scale", r.w_back_scale);
  f.number("w_in_scale", r.w_in_scale);
  if (const std::string* s = f.string("sigmoid_shape")) {
    r.sigmoid_shape = parse_shape(*s, f.path("sigmoid_shape"));
  }
  if (const Json* v = f.find("sr")) r.sr = sr_from_json(*v, f.path("sr"), false, &p.sr_dt_from_grid);
  f.finish();
}

Json training_to_json(const exp::PipelineConfig& p) {
  return {{"feed_len", p.feed_len},
          {"washout", p.washout},
          {"eval_len", p.eval_len},
          {"solver", readout::method_name(p.solver)},
          {"lambda", p.lambda}};
}

void training_from_json(const Json& j, const std::string& where, exp::PipelineConfig& p) {
  Fields f(j, where);
  f.integer("feed_len", p.feed_len);
  f.integer("washout", p.washout);
  f.integer("eval_len", p.eval_len);
  if (const std::string* s = f.string("solver")) {
    p.solver = parse_name(f.path("solver"), [&] { return readout::parse_method(*s); });
  }
  f.number("lambda", p.lambda);
  f.finish();
}

Json run_to_json(const RunSpec& r) {
  return {{"activation", esn::activation_name(r.activation)},
          {"n", r.n},
          {"d", r.d},
          {"snr_db", snr_to_json(r.snr_db)},
          {"repetition", r.repetition}};
}

RunSpec run_from_json(const Json& j, const std::string& where) {
  RunSpec r;
  Fields f(j, where);
  if (const std::string* s = f.string("activation")) {
    r.activation = parse_name(f.path("activation"), [&] { return esn::parse_activation(*s); });
  }
  f.integer("n", r.n);
  f.number("d", r.d);
  f.snr("snr_db", r.snr_db);
  f.integer("repetition", r.repetition);
  f.finish();
  return r;
}

Json sweep_to_json(const exp::SweepSpec& s) {
  Json snr = Json::array();
  for (double v : s.snr_grid) snr.push_back(snr_to_json(v));
  Json acts = Json::array();
  for (auto a : s.activations) acts.push_back(esn::activation_name(a));
  return {{"n_grid", s.n_grid}, {"d_grid", s.d_grid}, {"snr_grid", snr},
          {"activations", acts}, {"n_seeds", s.n_seeds}};
}

exp::SweepSpec sweep_from_json(const Json& j, const std::string& where) {
  exp::SweepSpec s;
  Fields f(j, where);
  if (const Json* a = f.array("n_grid")) {
    s.n_grid.clear();
    for (const Json& v : *a) {
      if (!v.is_number_unsigned()) fail(f.path("n_grid"), "expected non-negative integers");
      s.n_grid.push_back(v.get<std::size_t>());
    }
  }
  if (const Json* a = f.array("d_grid")) {
    s.d_grid.clear();
    for (const Json& v : *a) {
      if (!v.is_number()) fail(f.path("d_grid"), "expected numbers");
      s.d_grid.push_back(v.get<double>());
    }
  }
  if (const Json* a = f.array("snr_grid")) {
    s.snr_grid.clear();
    for (const Json& v : *a) s.snr_grid.push_back(snr_from_json(v, f.path("snr_grid")));
  }
  if (const Json* a = f.array("activations")) {
    s.activations.clear();
    for (const Json& v : *a) {
      if (!v.is_string()) fail(f.path("activations"), "expected strings");
      s.activations.push_back(parse_name(
          f.path("activations"), [&] { return esn::parse_activation(v.get<std::string>()); }));
    }
  }
  f.integer("n_seeds", s.n_seeds);
  f.finish();
  return s;
}

Json reg_to_json(const RegStudySpec& r) {
  return {{"m", r.m},
          {"n", r.n},
          {"k", r.k},
          {"t", r.t},
          {"lambda_lo_exponent", r.lambda_lo_exponent},
          {"lambda_hi_exponent", r.lambda_hi_exponent},
          {"per_decade", r.per_decade}};
}

RegStudySpec reg_from_json(const Json& j, const std::string& where) {
  RegStudySpec r;
  Fields f(j, where);
  f.integer("m", r.m);
  f.integer("n", r.n);
  f.integer("k", r.k);
  f.integer("t", r.t);
  f.integer("lambda_lo_exponent", r.lambda_lo_exponent);
  f.integer("lambda_hi_exponent", r.lambda_hi_exponent);
  f.integer("per_decade", r.per_decade);
  f.finish();
  return r;
}

std::vector<double> double_array(const Json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const Json& v : j) {
    if (!v.is_number()) fail(where, "expected numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

Json snr_to_json(double snr_db) {
  if (snr_db == exp::kNoTrainingNoise) return "inf";
  return snr_db;
}

double snr_from_json(const Json& j, const std::string& where) {
  if (j.is_null()) return exp::kNoTrainingNoise;
  if (j.is_string()) {
    if (j.get_ref<const std::string&>() == "inf") return exp::kNoTrainingNoise;
    fail(where, "SNR string must be \"inf\"");
  }
  if (!j.is_number()) fail(where, "expected a number, \"inf\" or null");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(where, "SNR must be finite or \"inf\"");
  return v;
}

void RegStudySpec::validate() const {
  if (!(k < n && n < m)) throw ConfigError("reg_study: need k < n < m");
  if (!(k < t && t < m)) throw ConfigError("reg_study: need k < t < m");
  if (per_decade < 1) throw ConfigError("reg_study: per_decade must be >= 1");
  if (lambda_hi_exponent < lambda_lo_exponent) {
    throw ConfigError("reg_study: lambda_hi_exponent < lambda_lo_exponent");
  }
}

std::vector<double> RegStudySpec::lambda_grid() const {
  return readout::log_grid(lambda_lo_exponent, lambda_hi_exponent, per_decade);
}

void RunConfig::validate() const {
  pipeline.validate();
  if (run.n < 1) throw ConfigError("run: n must be >= 1");
  if (!(run.d >= 0.0) || !std::isfinite(run.d)) throw ConfigError("run: d must be finite and >= 0");
  exp::SweepSpec s = sweep;
  s.base_seed = seed;
  s.validate();
  if (transfer.steps.empty()) throw ConfigError("transfer_fn: steps must not be empty");
  for (std::size_t step : transfer.steps) {
    if (step < 1) throw ConfigError("transfer_fn: steps start at 1");
  }
  reg_study.validate();
}

Json to_json(const RunConfig& c) {
  return {{"seed", c.seed},
          {"mg_snr_db", snr_to_json(c.mg_snr_db)},
          {"mackey_glass", mg_to_json(c.pipeline.mg)},
          {"grid", grid_to_json(c.pipeline.grid)},
          {"reservoir", reservoir_template_to_json(c.pipeline)},
          {"training", training_to_json(c.pipeline)},
          {"run", run_to_json(c.run)},
          {"sweep", sweep_to_json(c.sweep)},
          {"transfer_fn", {{"steps", c.transfer.steps}}},
          {"reg_study", reg_to_json(c.reg_study)}};
}

RunConfig run_config_from_json(const Json& j) {
  RunConfig c;
  Fields f(j, "config");
  f.integer("seed", c.seed);
  f.snr("mg_snr_db", c.mg_snr_db);
  if (const Json* v = f.find("mackey_glass")) c.pipeline.mg = mg_from_json(*v, f.path("mackey_glass"));
  if (const Json* v = f.find("grid")) c.pipeline.grid = grid_from_json(*v, f.path("grid"));
  if (const Json* v = f.find("reservoir")) {
    reservoir_template_from_json(*v, f.path("reservoir"), c.pipeline);
  }
  if (const Json* v = f.find("training")) training_from_json(*v, f.path("training"), c.pipeline);
  if (const Json* v = f.find("run")) c.run = run_from_json(*v, f.path("run"));
  if (const Json* v = f.find("sweep")) c.sweep = sweep_from_json(*v, f.path("sweep"));
  if (const Json* v = f.find("transfer_fn")) {
    Fields t(*v, f.path("transfer_fn"));
    if (const Json* a = t.array("steps")) {
      c.transfer.steps.clear();
      for (const Json& s : *a) {
        if (!s.is_number_unsigned()) fail(t.path("steps"), "expected non-negative integers");
        c.transfer.steps.push_back(s.get<std::size_t>());
      }
    }
    t.finish();
  }
  if (const Json* v = f.find("reg_study")) c.reg_study = reg_from_json(*v, f.path("reg_study"));
  f.finish();
  c.sweep.base_seed = c.seed;
  return c;
}

Json to_json(const esn::ReservoirConfig& r) {
  return {{"n_neurons", r.n_neurons},
          {"connectivity", r.connectivity},
          {"spectral_radius", r.spectral_radius},
          {"w_back_scale", r.w_back_scale},
          {"w_in_scale", r.w_in_scale},
          {"activation", esn::activation_name(r.activation)},
          {"sigmoid_shape", shape_name(r.sigmoid_shape)},
          {"sr", sr_to_json(r.sr, true, nullptr)},
          {"seed", r.seed}};
}

esn::ReservoirConfig reservoir_config_from_json(const Json& j) {
  esn::ReservoirConfig r;
  Fields f(j, "reservoir");
  f.integer("n_neurons", r.n_neurons);
  f.number("connectivity", r.connectivity);
  f.number("spectral_radius", r.spectral_radius);
  f.number("w_back_scale", r.w_back_scale);
  f.number("w_in_scale", r.w_in_scale);
  if (const std::string* s = f.string("activation")) {
    r.activation = parse_name(f.path("activation"), [&] { return esn::parse_activation(*s); });
  }
  if (const std::string* s = f.string("sigmoid_shape")) {
    r.sigmoid_shape = parse_shape(*s, f.path("sigmoid_shape"));
  }
  if (const Json* v = f.find("sr")) r.sr = sr_from_json(*v, f.path("sr"), true, nullptr);
  f.integer("seed", r.seed);
  f.finish();
  r.validate();
  return r;
}

namespace {
constexpr const char* kSnapshotFormat = "sresn-reservoir-snapshot";
constexpr int kSnapshotVersion = 1;
}  // namespace

Json snapshot_to_json(const esn::Reservoir& reservoir) {
  Json triplets = Json::array();
  for (const esn::Triplet& t : reservoir.w().triplets()) {
    triplets.push_back(Json::array({t.row, t.col, t.value}));
  }
  return {{"format", kSnapshotFormat},
          {"version", kSnapshotVersion},
          {"config", to_json(reservoir.config())},
          {"w", {{"rows", reservoir.w().rows()},
                 {"cols", reservoir.w().cols()},
                 {"triplets", std::move(triplets)}}},
          {"w_back", std::vector<double>(reservoir.w_back().begin(), reservoir.w_back().end())},
          {"w_in", std::vector<double>(reservoir.w_in().begin(), reservoir.w_in().end())},
          {"initial_state", reservoir.initial_state()}};
}

esn::Reservoir reservoir_from_snapshot(const Json& j) {
  Fields f(j, "snapshot");
  const std::string* format = f.string("format");
  if (!format || *format != kSnapshotFormat) fail("snapshot", "not a reservoir snapshot");
  int version = 0;
  f.integer("version", version);
  if (version != kSnapshotVersion) fail("snapshot", "unsupported version " + std::to_string(version));

  const Json* cfg = f.find("config");
  if (!cfg) fail("snapshot", "missing config");
  esn::ReservoirConfig config = reservoir_config_from_json(*cfg);

  const Json* wj = f.find("w");
  if (!wj) fail("snapshot", "missing w");
  Fields wf(*wj, "snapshot.w");
  std::size_t rows = 0, cols = 0;
  wf.integer("rows", rows);
  wf.integer("cols", cols);
  std::vector<esn::Triplet> entries;
  if (const Json* a = wf.array("triplets")) {
    entries.reserve(a->size());
    for (const Json& t : *a) {
      if (!t.is_array() || t.size() != 3 || !t[0].is_number_unsigned() ||
          !t[1].is_number_unsigned() || !t[2].is_number()) {
        fail("snapshot.w.triplets", "expected [row, col, value] entries");
      }
      entries.push_back({t[0].get<std::uint32_t>(), t[1].get<std::uint32_t>(), t[2].get<double>()});
    }
  }
  wf.finish();

  auto vec = [&](const char* key) {
    const Json* v = f.find(key);
    if (!v) fail("snapshot", std::string("missing ") + key);
    return double_array(*v, f.path(key));
  };
  std::vector<double> w_back = vec("w_back");
  std::vector<double> w_in = vec("w_in");
  std::vector<double> initial = vec("initial_state");
  f.finish();

  return esn::Reservoir(std::move(config), esn::SparseMatrix(rows, cols, std::move(entries)),
                        std::move(w_back), std::move(w_in), std::move(initial));
}

Json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return Json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace sresn::config
