#include "sresn/reservoir.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "sresn/error.hpp"
#include "sresn/kernels.hpp"

namespace sresn::esn {

std::string_view activation_name(ActivationKind kind) noexcept {
  return kind == ActivationKind::SR ? "sr" : "sigmoid";
}

ActivationKind parse_activation(std::string_view name) {
  if (name == "sr") return ActivationKind::SR;
  if (name == "sigmoid") return ActivationKind::Sigmoid;
  throw ConfigError("unknown activation '" + std::string(name) + "' (expected sr|sigmoid)");
}

void ReservoirConfig::validate() const {
  auto bad = [](const char* what) { throw ConfigError(std::string("reservoir: ") + what); };
  if (n_neurons < 1) bad("n_neurons must be >= 1");
  if (n_neurons > 65535) bad("n_neurons must be < 65536");
  if (!(connectivity > 0.0 && connectivity <= 1.0)) bad("connectivity must be in (0, 1]");
  if (!(spectral_radius > 0.0) || !std::isfinite(spectral_radius)) {
    bad("spectral_radius must be finite and > 0");
  }
  if (!std::isfinite(w_back_scale)) bad("w_back_scale must be finite");
  if (!std::isfinite(w_in_scale)) bad("w_in_scale must be finite");
  if (activation == ActivationKind::SR) sr.validate();
}

std::size_t ReservoirConfig::target_nnz() const {
  const double cells = static_cast<double>(n_neurons) * static_cast<double>(n_neurons);
  auto nnz = static_cast<std::size_t>(std::ceil(connectivity * cells - 1e-9));
  return std::clamp<std::size_t>(nnz, 1, static_cast<std::size_t>(cells));
}

void activation_tanh(std::span<const double> v, std::span<double> out) noexcept {
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::tanh(v[i]);
}

void activation_logistic(std::span<const double> v, std::span<double> out) noexcept {
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-v[i]));
}

namespace {

SparseMatrix draw_recurrent(std::size_t n, std::size_t nnz, RandomStream& stream) {
  const std::uint64_t cells = static_cast<std::uint64_t>(n) * n;
  // Floyd's sampling of distinct cells.
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(nnz * 2);
  for (std::uint64_t j = cells - nnz; j < cells; ++j) {
    const std::uint64_t candidate = stream.below(j + 1);
    if (!chosen.insert(candidate).second) chosen.insert(j);
  }
  std::vector<std::uint64_t> cells_sorted(chosen.begin(), chosen.end());
  std::sort(cells_sorted.begin(), cells_sorted.end());
  std::vector<Triplet> entries;
  entries.reserve(nnz);
  for (std::uint64_t c : cells_sorted) {
    entries.push_back({static_cast<std::uint32_t>(c / n), static_cast<std::uint32_t>(c % n),
                       stream.uniform(-1.0, 1.0)});
  }
  return SparseMatrix(n, n, std::move(entries));
}

std::vector<double> draw_uniform(std::size_t n, double scale, RandomStream stream) {
  std::vector<double> v(n);
  for (double& e : v) e = stream.uniform(-1.0, 1.0) * scale;
  return v;
}

}  // namespace

Reservoir Reservoir::build(const ReservoirConfig& config) {
  config.validate();
  const std::size_t n = config.n_neurons;
  const RandomStream w_stream(config.seed, "reservoir.w");
  for (int attempt = 0; attempt < kMaxBuildAttempts; ++attempt) {
    RandomStream stream = w_stream.substream(static_cast<std::uint64_t>(attempt));
    SparseMatrix w = draw_recurrent(n, config.target_nnz(), stream);
    const double radius = spectral_radius(w);
    if (!(radius > 0.0) || !std::isfinite(radius)) continue;
    w.scale(config.spectral_radius / radius);

    std::vector<double> initial(n, 0.0);
    if (config.activation == ActivationKind::SR) {
      RandomStream init(config.seed, "sr.init");
      for (double& v : initial) v = init.normal();
    }
    Reservoir r(config, std::move(w),
                draw_uniform(n, config.w_back_scale, RandomStream(config.seed, "reservoir.w_back")),
                draw_uniform(n, config.w_in_scale, RandomStream(config.seed, "reservoir.w_in")),
                std::move(initial));
    r.build_attempt_ = attempt;
    return r;
  }
  throw NumericalError("build_reservoir: recurrent matrix had zero spectral radius in " +
                       std::to_string(kMaxBuildAttempts) + " draws");
}

Reservoir::Reservoir(ReservoirConfig config, SparseMatrix w, std::vector<double> w_back,
                     std::vector<double> w_in, std::vector<double> initial_state)
    : config_(config),
      w_(std::move(w)),
      w_back_(std::move(w_back)),
      w_in_(std::move(w_in)),
      initial_state_(std::move(initial_state)),
      noise_(config.seed, "sr.noise") {
  config_.validate();
  const std::size_t n = config_.n_neurons;
  if (w_.rows() != n || w_.cols() != n || w_back_.size() != n || w_in_.size() != n ||
      initial_state_.size() != n) {
    throw ConfigError("reservoir: component sizes do not match n_neurons");
  }
  drive_.resize(n);
  if (config_.activation == ActivationKind::SR) {
    bank_.emplace(initial_state_, config_.sr);
    noise_buf_.resize(n);
  } else {
    x_ = initial_state_;
  }
}

std::span<const double> Reservoir::state() const noexcept {
  return bank_ ? bank_->xi() : std::span<const double>(x_);
}

void Reservoir::set_state(std::span<const double> x) {
  if (x.size() != size()) throw ConfigError("set_state: length does not match reservoir size");
  if (bank_) {
    sr::SRBank fresh(std::vector<double>(x.begin(), x.end()), config_.sr);
    bank_.emplace(std::move(fresh));
  } else {
    x_.assign(x.begin(), x.end());
  }
}

void Reservoir::compute_drive(double y_feedback, double u, std::span<double> drive) const noexcept {
  w_.multiply(state(), drive);
  kernels::axpy(y_feedback, w_back_, drive);
  if (u != 0.0) kernels::axpy(u, w_in_, drive);
}

void Reservoir::step(double y_feedback, double u) {
  compute_drive(y_feedback, u, drive_);
  const std::size_t next = step_index_ + 1;
  if (bank_) {
    std::span<const double> noise;
    if (config_.sr.noise_amp > 0.0) {
      for (double& v : noise_buf_) v = noise_.normal();
      noise = noise_buf_;
    }
    bank_->step(drive_, noise);
  } else {
    if (config_.sigmoid_shape == SigmoidShape::Tanh) {
      activation_tanh(drive_, x_);
    } else {
      activation_logistic(drive_, x_);
    }
    for (std::size_t i = 0; i < x_.size(); ++i) {
      if (!std::isfinite(x_[i])) {
        throw DivergenceError("reservoir: state of neuron " + std::to_string(i) +
                                  " non-finite at step " + std::to_string(next),
                              next, i);
      }
    }
  }
  step_index_ = next;
}

void Reservoir::record_transfer_steps(std::vector<std::size_t> steps) {
  if (!bank_) throw ConfigError("transfer probe requires the SR activation");
  bank_->record_steps(std::move(steps));
}

StateMatrix teacher_forced_run(Reservoir& reservoir, const mg::MGSeries& teacher,
                               std::size_t feed_len, std::size_t washout) {
  if (feed_len >= teacher.n_points()) {
    throw ConfigError("teacher_forced_run: feed_len must be < teacher length");
  }
  if (washout >= feed_len) throw ConfigError("teacher_forced_run: washout must be < feed_len");
  const std::size_t n = reservoir.size();
  const std::size_t rows = feed_len - washout;
  StateMatrix out;
  out.states.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(n));
  out.targets.resize(static_cast<Eigen::Index>(rows));
  out.first_index = washout + 1;
  for (std::size_t k = 1; k <= feed_len; ++k) {
    reservoir.step(teacher.values[k - 1]);
    if (k > washout) {
      const auto r = static_cast<Eigen::Index>(k - washout - 1);
      const auto x = reservoir.state();
      for (std::size_t j = 0; j < n; ++j) out.states(r, static_cast<Eigen::Index>(j)) = x[j];
      out.targets(r) = teacher.values[k];
    }
  }
  return out;
}

std::vector<double> free_run(Reservoir& reservoir, const readout::TrainedReadout& trained,
                             std::size_t n_steps) {
  const std::size_t n = reservoir.size();
  if (static_cast<std::size_t>(trained.w_out.size()) != n) {
    throw ConfigError("free_run: readout length does not match reservoir size");
  }
  const std::span<const double> w_out(trained.w_out.data(), n);
  std::vector<double> predictions;
  predictions.reserve(n_steps);
  double y = kernels::dot(w_out, reservoir.state());
  for (std::size_t j = 0; j < n_steps; ++j) {
    reservoir.step(y);
    y = kernels::dot(w_out, reservoir.state());
    if (!std::isfinite(y)) {
      throw DivergenceError("free_run: output non-finite at step " +
                                std::to_string(reservoir.step_index()),
                            reservoir.step_index(), 0);
    }
    predictions.push_back(y);
  }
  return predictions;
}

std::uint64_t complexity_formula(std::size_t n, ActivationKind activation) noexcept {
  const auto nn = static_cast<std::uint64_t>(n);
  return nn * nn + (activation == ActivationKind::SR ? 4 : 3) * nn;
}

namespace {

// Arithmetic layer for complexity accounting.
struct CountingArithmetic {
  std::uint64_t multiplications = 0;
  double mul(double a, double b) noexcept {
    ++multiplications;
    return a * b;
  }
};

}  // namespace

CountedStep counted_step(const Reservoir& reservoir, std::span<const double> state, double y,
                         double u, std::span<const double> w_out, std::span<const double> noise) {
  const std::size_t n = reservoir.size();
  if (state.size() != n || (!w_out.empty() && w_out.size() != n) ||
      (!noise.empty() && noise.size() != n)) {
    throw ConfigError("counted_step: vector lengths do not match reservoir size");
  }
  CountingArithmetic ar;
  const SparseMatrix& w = reservoir.w();
  std::vector<double> drive(n, 0.0);

  for (std::size_t i = 0; i < n; ++i) {
    // Dense-equivalent row: absent entries contribute an explicit 0 * x_j.
    double acc = 0.0;
    std::size_t k = w.row_ptr()[i];
    const std::size_t end = w.row_ptr()[i + 1];
    for (std::size_t j = 0; j < n; ++j) {
      double wij = 0.0;
      if (k < end && w.col_index()[k] == j) wij = w.values()[k++];
      acc += ar.mul(wij, state[j]);
    }
    drive[i] = acc;
  }
  for (std::size_t i = 0; i < n; ++i) drive[i] += ar.mul(y, reservoir.w_back()[i]);
  for (std::size_t i = 0; i < n; ++i) drive[i] += ar.mul(u, reservoir.w_in()[i]);

  CountedStep out;
  out.next_state.resize(n);
  const ReservoirConfig& cfg = reservoir.config();
  if (cfg.activation == ActivationKind::SR) {
    const auto c = cfg.sr.coefficients();
    for (std::size_t i = 0; i < n; ++i) {
      const double x = state[i];
      // Table-lookup terms: not counted.
      const double drift = (c.alpha * x - c.beta * (x * x * x)) * c.dt;
      const double kick = noise.empty() ? 0.0 : c.noise_amp * noise[i] * c.noise_dt;
      out.next_state[i] = x + drift + kick + ar.mul(drive[i], c.dt);
    }
  } else if (cfg.sigmoid_shape == SigmoidShape::Tanh) {
    activation_tanh(drive, out.next_state);
  } else {
    activation_logistic(drive, out.next_state);
  }

  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += ar.mul(w_out.empty() ? 0.0 : w_out[i], out.next_state[i]);
  }
  out.y_next = acc;
  out.counter.multiplications = ar.multiplications;
  return out;
}

}  // namespace sresn::esn
