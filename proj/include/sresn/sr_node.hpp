#pragma once

// Stochastic-resonance activation.
//
// Each neuron carries an internal state xi that follows the overdamped motion
// in the tilted bistable potential
//
//   U0(x)   = -alpha x^2 / 2 + beta x^4 / 4
//   U(x, s) = U0(x) - x s
//
// and is advanced by one explicit Euler step per reservoir step:
//
//   xi' = xi + (alpha xi - beta xi^3 + D sigma) dt + s dt,   sigma ~ N(0, 1).
//
// The new state is the neuron's output.

#include <cstddef>
#include <span>
#include <vector>

#include "sresn/kernels.hpp"

namespace sresn {
class RandomStream;
}

namespace sresn::sr {

// |xi| above this is treated as divergence.
inline constexpr double kDivergenceBound = 1e6;

struct SRParams {
  double alpha = 0.01;
  double beta = 0.01;
  double noise_amp = 0.0;
  double dt = 2950.0 / 3500.0;
  // Multiply the noise by sqrt(dt) instead of dt.
  bool sde_scaling = false;

  // Throws ConfigError.
  void validate() const;

  double stationary_point() const;  // +sqrt(alpha / beta)
  double barrier() const;           // alpha^2 / (4 beta)

  kernels::SrCoefficients coefficients() const;
};

double potential(double x, const SRParams& p) noexcept;
double tilted_potential(double x, double s, const SRParams& p) noexcept;

// Scatter data for one recorded step.
struct ProbePoint {
  std::size_t neuron;
  double drive;    // s
  double xi_prev;  // state before the update
  double xi_next;  // activation output
};

struct ProbeSnapshot {
  std::size_t step;
  std::vector<ProbePoint> points;
};

class SRBank {
 public:
  SRBank(std::vector<double> xi, SRParams params);
  // xi(t=0) ~ N(0, 1) drawn from `init`.
  SRBank(std::size_t n, SRParams params, RandomStream& init);

  std::size_t size() const noexcept { return xi_.size(); }
  std::span<const double> xi() const noexcept { return xi_; }
  const SRParams& params() const noexcept { return params_; }
  std::size_t step_index() const noexcept { return step_index_; }

  // One Euler step. drive and noise must have length size(); noise may be
  // empty (treated as zeros). Throws DivergenceError naming the neuron.
  void step(std::span<const double> drive, std::span<const double> noise);

  // Record (s, xi_prev, xi_next) for every neuron at the listed step indices.
  // Step k is the update that takes step_index from k-1 to k.
  void record_steps(std::vector<std::size_t> steps);
  const std::vector<ProbeSnapshot>& probes() const noexcept { return probes_; }

 private:
  std::vector<double> xi_;
  std::vector<double> scratch_;
  SRParams params_;
  std::size_t step_index_ = 0;
  std::vector<std::size_t> record_;
  std::vector<ProbeSnapshot> probes_;
};

// Snapshots at the requested steps, in request order. Throws DomainError when
// a step was not recorded or lies beyond the run.
std::vector<ProbeSnapshot> transfer_probe(const SRBank& bank, std::span<const std::size_t> steps);

}  // namespace sresn::sr
