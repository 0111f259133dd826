#include "sresn/mackey_glass.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "sresn/error.hpp"
#include "sresn/kernels.hpp"
#include "sresn/rng.hpp"

namespace sresn::mg {

namespace {

// Knot snapping tolerance, in units of the integrator step.
constexpr double kKnotTolerance = 1e-9;

double hermite(double y0, double y1, double d0, double d1, double h, double s) noexcept {
  if (s == 0.0) return y0;
  if (s == 1.0) return y1;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = s3 - 2.0 * s2 + s;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = s3 - s2;
  return h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
}

// Evaluate the stored solution at time t (0 <= t <= (count-1)*h), using only
// the first `count` knots. Knots within tolerance return exactly.
double interpolate(const std::vector<double>& values, const std::vector<double>& derivs,
                   std::size_t count, double h, double t) {
  const double u = t / h;
  const double nearest = std::round(u);
  if (std::abs(u - nearest) < kKnotTolerance) {
    return values[static_cast<std::size_t>(nearest)];
  }
  auto k = static_cast<std::size_t>(std::floor(u));
  if (k + 1 >= count) k = count - 2;
  const double s = u - static_cast<double>(k);
  return hermite(values[k], values[k + 1], derivs[k], derivs[k + 1], h, s);
}

}  // namespace

void MGParams::validate() const {
  auto bad = [](const char* what) { throw ConfigError(std::string("mackey_glass: ") + what); };
  if (!(a >= 0.0) || !std::isfinite(a)) bad("a must be finite and >= 0");
  if (!(b > 0.0) || !std::isfinite(b)) bad("b must be finite and > 0");
  if (!(tau > 0.0) || !std::isfinite(tau)) bad("tau must be finite and > 0");
  if (!std::isfinite(exponent)) bad("exponent must be finite");
  if (!std::isfinite(history_value)) bad("history_value must be finite");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) bad("t_end must be finite and > 0");
  if (!(integrator_step > 0.0)) bad("integrator_step must be > 0");
  if (integrator_step > tau) bad("integrator_step must not exceed tau");
}

double mg_rhs(const MGParams& p, double q, double q_delayed) noexcept {
  return p.a * q_delayed / (1.0 + std::pow(q_delayed, p.exponent)) - p.b * q;
}

double Trajectory::at(double t) const {
  if (values.size() < 2 || !(t >= 0.0) || t > t_end() * (1.0 + 1e-15)) {
    throw DomainError("trajectory: t=" + std::to_string(t) + " outside [0, " +
                      std::to_string(t_end()) + "]");
  }
  return interpolate(values, derivatives, values.size(), step, t);
}

Trajectory integrate_mg(const MGParams& p) {
  p.validate();
  const double h = p.integrator_step;
  const auto n_steps = static_cast<std::size_t>(std::ceil(p.t_end / h - 1e-9));

  Trajectory traj;
  traj.step = h;
  traj.values.reserve(n_steps + 1);
  traj.derivatives.reserve(n_steps + 1);

  // Delayed value with the history for t - tau <= 0. `count` knots are final.
  auto delayed = [&](double t, std::size_t count) {
    const double td = t - p.tau;
    if (td <= 0.0) return p.history_value;
    return interpolate(traj.values, traj.derivatives, count, h, td);
  };

  traj.values.push_back(p.history_value);
  traj.derivatives.push_back(mg_rhs(p, p.history_value, delayed(0.0, 1)));

  for (std::size_t n = 0; n < n_steps; ++n) {
    const double t = static_cast<double>(n) * h;
    const double q = traj.values[n];
    const std::size_t count = n + 1;
    // t + h - tau <= t because h <= tau, so every delayed time is covered.
    const double qd_half = delayed(t + 0.5 * h, count);
    const double qd_1 = delayed(t + h, count);

    const double k1 = traj.derivatives[n];
    const double k2 = mg_rhs(p, q + 0.5 * h * k1, qd_half);
    const double k3 = mg_rhs(p, q + 0.5 * h * k2, qd_half);
    const double k4 = mg_rhs(p, q + h * k3, qd_1);
    const double next = q + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(next)) {
      throw DivergenceError("mackey_glass: integration diverged at step " + std::to_string(n + 1),
                            n + 1, 0);
    }
    traj.values.push_back(next);
    traj.derivatives.push_back(mg_rhs(p, next, qd_1));
  }
  return traj;
}

MGSeries resample_to_grid(const Trajectory& trajectory, double t_start, std::size_t n_points,
                          double dt) {
  if (n_points == 0) throw DomainError("resample_to_grid: n_points must be > 0");
  if (!(dt > 0.0) && n_points > 1) throw DomainError("resample_to_grid: dt must be > 0");
  const double t_last = t_start + static_cast<double>(n_points - 1) * dt;
  if (trajectory.values.size() < 2 || !(t_start >= 0.0) ||
      t_last > trajectory.t_end() * (1.0 + 1e-15)) {
    throw DomainError("resample_to_grid: grid [" + std::to_string(t_start) + ", " +
                      std::to_string(t_last) + "] exceeds trajectory domain [0, " +
                      std::to_string(trajectory.t_end()) + "]");
  }
  MGSeries series;
  series.t_start = t_start;
  series.dt = dt;
  series.values.resize(n_points);
  for (std::size_t i = 0; i < n_points; ++i) series.values[i] = trajectory.at(series.time(i));
  return series;
}

MGSeries resample_to_grid(const Trajectory& trajectory, const GridSpec& grid) {
  return resample_to_grid(trajectory, grid.t_start, grid.n_points, grid.dt);
}

MGSeries generate_series(const MGParams& params, const GridSpec& grid) {
  return resample_to_grid(integrate_mg(params), grid);
}

double signal_power(const MGSeries& series) {
  if (series.values.empty()) throw DomainError("signal_power: empty series");
  // The reference kernel fixes the summation order, so the noise level does
  // not depend on which ISA the process selected.
  const auto& k = kernels::scalar_table();
  return k.sum_squares(series.values.data(), series.values.size()) /
         static_cast<double>(series.values.size());
}

double noise_variance_for(const MGSeries& series, double snr_db) {
  return signal_power(series) / std::pow(10.0, snr_db / 10.0);
}

MGSeries add_awgn(const MGSeries& series, const NoisySpec& spec) {
  if (series.values.empty()) throw DomainError("add_awgn: empty series");
  if (spec.disabled()) return series;
  if (!std::isfinite(spec.snr_db)) throw ConfigError("add_awgn: snr_db must be finite or +inf");
  const double sigma = std::sqrt(noise_variance_for(series, spec.snr_db));
  RandomStream stream(spec.noise_seed, "mg.awgn");
  MGSeries noisy = series;
  for (double& v : noisy.values) v += sigma * stream.normal();
  return noisy;
}

void write_csv(std::ostream& out, const MGSeries& clean, const MGSeries* noisy) {
  if (noisy && noisy->n_points() != clean.n_points()) {
    throw DomainError("write_csv: clean and noisy series differ in length");
  }
  out << (noisy ? "t,q,q_noisy\n" : "t,q\n");
  char buf[96];
  for (std::size_t i = 0; i < clean.n_points(); ++i) {
    int len;
    if (noisy) {
      len = std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", clean.time(i), clean.values[i],
                          noisy->values[i]);
    } else {
      len = std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", clean.time(i), clean.values[i]);
    }
    out.write(buf, len);
  }
}

}  // namespace sresn::mg
