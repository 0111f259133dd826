#pragma once

// Data-parallel inner loops used by the reservoir step, the readout and the
// noise/statistics code.
//
// Every kernel has a scalar reference implementation; an AVX2 variant is
// compiled when the toolchain targets x86-64 and picked at runtime when the
// CPU reports AVX2. Elementwise kernels are bit-identical across variants
// (same operation order, no FMA contraction). Reductions differ only in
// summation order.
//
// Set SRESN_ISA=scalar in the environment to force the reference kernels.

#include <cstddef>
#include <span>
#include <string_view>

namespace sresn::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa) noexcept;

// Coefficients of one explicit Euler step of the bistable SR equation.
struct SrCoefficients {
  double alpha;
  double beta;
  double noise_amp;
  double dt;
  // Multiplier applied to noise_amp * sigma: dt as written in the SR update,
  // or sqrt(dt) for the Euler-Maruyama scaling.
  double noise_dt;
};

struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum_squares)(const double* a, std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // out = xi + (alpha*xi - beta*xi^3)*dt + noise_amp*noise*noise_dt + drive*dt
  // noise may be null, meaning all zeros. out may alias xi.
  void (*sr_update)(const double* xi, const double* drive, const double* noise,
                    const SrCoefficients& c, double* out, std::size_t n);
};

const KernelTable& scalar_table() noexcept;
// nullptr when the variant was not compiled in or the CPU lacks it.
const KernelTable* avx2_table() noexcept;

// The table chosen for this process (first call decides).
const KernelTable& active() noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
  return active().dot(a.data(), b.data(), a.size());
}

inline double sum_squares(std::span<const double> a) noexcept {
  return active().sum_squares(a.data(), a.size());
}

inline void axpy(double a, std::span<const double> x, std::span<double> y) noexcept {
  active().axpy(a, x.data(), y.data(), y.size());
}

}  // namespace sresn::kernels
