#pragma once

// Echo state network with output feedback:
//
//   x_{n+1} = f(W x_n + W_back y_n [+ W_in u_{n+1}]),   y_{n+1} = W_out x_{n+1}
//
// f is either the static sigmoid (tanh by default) or the SR bank, whose
// internal states are the reservoir state.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "sresn/mackey_glass.hpp"
#include "sresn/readout.hpp"
#include "sresn/rng.hpp"
#include "sresn/sparse.hpp"
#include "sresn/sr_node.hpp"

namespace sresn::esn {

enum class ActivationKind { Sigmoid, SR };
enum class SigmoidShape { Tanh, Logistic };

std::string_view activation_name(ActivationKind kind) noexcept;
// "sigmoid" or "sr". Throws ConfigError.
ActivationKind parse_activation(std::string_view name);

struct ReservoirConfig {
  std::size_t n_neurons = 200;
  double connectivity = 0.01;
  double spectral_radius = 0.1;
  double w_back_scale = 1.0;
  double w_in_scale = 1.0;
  ActivationKind activation = ActivationKind::SR;
  SigmoidShape sigmoid_shape = SigmoidShape::Tanh;
  sr::SRParams sr;
  std::uint64_t seed = 1;

  // Throws ConfigError.
  void validate() const;
  // ceil(connectivity * N^2), at least 1.
  std::size_t target_nnz() const;
};

// Rebuild attempts when a draw has zero spectral radius.
inline constexpr int kMaxBuildAttempts = 10;

// Elementwise activations used by the classical reservoir.
void activation_tanh(std::span<const double> v, std::span<double> out) noexcept;
void activation_logistic(std::span<const double> v, std::span<double> out) noexcept;

class Reservoir {
 public:
  // W: target_nnz() entries at distinct uniform positions, values U(-1, 1),
  // rescaled to the configured spectral radius. W_back, W_in: U(-1, 1) times
  // their scales. SR states start at N(0, 1), sigmoid states at 0.
  // Throws ConfigError or NumericalError (after kMaxBuildAttempts degenerate draws).
  static Reservoir build(const ReservoirConfig& config);

  // Reassemble from stored parts (snapshot replay).
  Reservoir(ReservoirConfig config, SparseMatrix w, std::vector<double> w_back,
            std::vector<double> w_in, std::vector<double> initial_state);

  const ReservoirConfig& config() const noexcept { return config_; }
  std::size_t size() const noexcept { return config_.n_neurons; }
  const SparseMatrix& w() const noexcept { return w_; }
  std::span<const double> w_back() const noexcept { return w_back_; }
  std::span<const double> w_in() const noexcept { return w_in_; }
  // Retry index of the accepted draw during build.
  int build_attempt() const noexcept { return build_attempt_; }

  std::span<const double> state() const noexcept;
  const std::vector<double>& initial_state() const noexcept { return initial_state_; }
  void set_state(std::span<const double> x);
  std::size_t step_index() const noexcept { return step_index_; }

  // Drive of the next step: W x + W_back y (+ W_in u).
  void compute_drive(double y_feedback, double u, std::span<double> drive) const noexcept;

  // Advance one step with feedback y. Throws DivergenceError.
  void step(double y_feedback, double u = 0.0);

  // SR only: record transfer-function scatter at these step indices.
  void record_transfer_steps(std::vector<std::size_t> steps);
  const sr::SRBank* sr_bank() const noexcept { return bank_ ? &*bank_ : nullptr; }

 private:
  ReservoirConfig config_;
  SparseMatrix w_;
  std::vector<double> w_back_;
  std::vector<double> w_in_;
  std::vector<double> initial_state_;
  std::vector<double> x_;  // sigmoid state
  std::optional<sr::SRBank> bank_;
  RandomStream noise_;
  std::vector<double> drive_;
  std::vector<double> noise_buf_;
  std::size_t step_index_ = 0;
  int build_attempt_ = 0;
};

// Harvested teacher-forced states: row r is x_{first_index + r}, target is
// teacher[first_index + r].
struct StateMatrix {
  Eigen::MatrixXd states;
  Eigen::VectorXd targets;
  std::size_t first_index = 0;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(states.rows()); }
};

// Feeds teacher[0..feed_len) as y_n, so x_k = f(W x_{k-1} + W_back teacher[k-1])
// for k = 1..feed_len, and keeps x_k for k > washout with target teacher[k].
// Requires feed_len < teacher length (the target of x_feed_len must exist).
// Throws ConfigError, DivergenceError.
StateMatrix teacher_forced_run(Reservoir& reservoir, const mg::MGSeries& teacher,
                               std::size_t feed_len = 3000, std::size_t washout = 1000);

// Autonomous continuation from the current state: the first feedback is the
// readout of the current state, then y_{n+1} = W_out x_{n+1}.
// Throws DivergenceError.
std::vector<double> free_run(Reservoir& reservoir, const readout::TrainedReadout& trained,
                             std::size_t n_steps);

// Multiplications per evolution step: N^2 + 3N (sigmoid), N^2 + 4N (SR).
std::uint64_t complexity_formula(std::size_t n, ActivationKind activation) noexcept;

struct OpCounter {
  std::uint64_t multiplications = 0;
};

struct CountedStep {
  std::vector<double> next_state;
  double y_next = 0.0;
  OpCounter counter;
};

// One evolution step W_in u + W x + W_back y, f, W_out x through a counting
// arithmetic layer that treats W as dense. Activation lookups (tanh, the SR
// drift and noise terms) are not counted; s dt is. `noise` (SR only) may be
// empty; `w_out` empty means a zero readout.
CountedStep counted_step(const Reservoir& reservoir, std::span<const double> state, double y,
                         double u = 0.0, std::span<const double> w_out = {},
                         std::span<const double> noise = {});

}  // namespace sresn::esn
