#pragma once

// Mackey-Glass delay differential equation
//
//   dq/dt = a q(t - tau) / (1 + q(t - tau)^exponent) - b q(t),
//   q(t) = history_value for t <= 0,
//
// integrated with fixed-step RK4. Delayed values between stored samples come
// from cubic Hermite interpolation on (q, dq/dt) at the knots.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

namespace sresn::mg {

struct MGParams {
  double a = 0.2;
  double b = 0.1;
  double tau = 17.0;
  double exponent = 10.0;
  double history_value = 0.5;
  double t_end = 3000.0;
  double integrator_step = 0.01;

  // Throws ConfigError.
  void validate() const;
};

// Dense trajectory on the integrator grid t_k = k * step, k = 0..n-1.
struct Trajectory {
  double step = 0.0;
  std::vector<double> values;
  std::vector<double> derivatives;

  double t_end() const noexcept {
    return values.empty() ? 0.0 : static_cast<double>(values.size() - 1) * step;
  }
  // Cubic Hermite evaluation; knots return the stored sample exactly.
  // Throws DomainError outside [0, t_end()].
  double at(double t) const;
};

struct MGSeries {
  std::vector<double> values;
  double t_start = 0.0;
  double dt = 0.0;

  std::size_t n_points() const noexcept { return values.size(); }
  double time(std::size_t i) const noexcept { return t_start + static_cast<double>(i) * dt; }
};

// Canonical sampling grid: t = 50 + i * 2950/3500, i < 3500.
struct GridSpec {
  double t_start = 50.0;
  std::size_t n_points = 3500;
  double dt = 2950.0 / 3500.0;
};

struct NoisySpec {
  // +infinity disables corruption.
  double snr_db = std::numeric_limits<double>::infinity();
  std::uint64_t noise_seed = 0;

  bool disabled() const noexcept { return snr_db == std::numeric_limits<double>::infinity(); }
};

// Right-hand side of the equation for current value q and delayed value qd.
double mg_rhs(const MGParams& p, double q, double q_delayed) noexcept;

// Throws ConfigError on invalid params, DivergenceError on non-finite state.
Trajectory integrate_mg(const MGParams& params);

// Throws DomainError when the grid leaves the trajectory.
MGSeries resample_to_grid(const Trajectory& trajectory, double t_start, std::size_t n_points,
                          double dt);
MGSeries resample_to_grid(const Trajectory& trajectory, const GridSpec& grid);

MGSeries generate_series(const MGParams& params = {}, const GridSpec& grid = {});

// Mean of q^2 over the whole series; the reference power for SNR.
double signal_power(const MGSeries& series);
// eta^2 such that 10 log10(P / eta^2) = snr_db.
double noise_variance_for(const MGSeries& series, double snr_db);

MGSeries add_awgn(const MGSeries& series, const NoisySpec& spec);

// CSV with header `t,q` or `t,q,q_noisy`, 17 significant digits.
void write_csv(std::ostream& out, const MGSeries& clean, const MGSeries* noisy = nullptr);

}  // namespace sresn::mg
