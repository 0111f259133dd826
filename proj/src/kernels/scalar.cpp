#include "sresn/kernels.hpp"

namespace sresn::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_squares_scalar(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * a[i];
  return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void sr_update_scalar(const double* xi, const double* drive, const double* noise,
                      const SrCoefficients& c, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double x = xi[i];
    const double cube = x * x * x;
    const double drift = (c.alpha * x - c.beta * cube) * c.dt;
    const double kick = noise ? c.noise_amp * noise[i] * c.noise_dt : 0.0;
    out[i] = x + drift + kick + drive[i] * c.dt;
  }
}

}  // namespace

const KernelTable& scalar_table() noexcept {
  static const KernelTable table{Isa::Scalar, dot_scalar, sum_squares_scalar,
                                 axpy_scalar, sr_update_scalar};
  return table;
}

}  // namespace sresn::kernels
