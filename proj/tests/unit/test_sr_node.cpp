#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "sresn/error.hpp"
#include "sresn/rng.hpp"
#include "sresn/sr_node.hpp"

using namespace sresn::sr;

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

SRParams params(double alpha, double beta, double d = 0.0, double dt = 2950.0 / 3500.0) {
  SRParams p;
  p.alpha = alpha;
  p.beta = beta;
  p.noise_amp = d;
  p.dt = dt;
  return p;
}

// One deterministic step of a single neuron.
double step1(double xi, double s, const SRParams& p) {
  SRBank bank({xi}, p);
  const double drive[1] = {s};
  bank.step(drive, {});
  return bank.xi()[0];
}

}  // namespace

TEST_CASE("potential and tilt") {
  const SRParams unit = params(1.0, 1.0);
  CHECK(potential(0.0, unit) == 0.0);
  CHECK(potential(1.0, unit) == -0.25);
  CHECK(potential(-1.0, unit) == -0.25);
  CHECK(potential(0.0, unit) - potential(1.0, unit) == unit.barrier());
  CHECK(potential(1.0, params(0.01, 0.01)) == doctest::Approx(-0.0025).epsilon(1e-15));

  CHECK(tilted_potential(1.0, 0.5, unit) == -0.75);
  for (double x : {-1.7, -0.2, 0.0, 0.4, 2.5}) {
    CHECK(tilted_potential(x, 0.0, unit) == potential(x, unit));
    for (double s : {-0.9, 0.1, 0.6}) {
      CHECK(tilted_potential(x, s, unit) == tilted_potential(-x, -s, unit));
    }
  }
}

TEST_CASE("stationary points and barrier") {
  const SRParams p = params(0.01, 0.01);
  CHECK(p.stationary_point() == 1.0);
  CHECK(p.barrier() == doctest::Approx(0.0025).epsilon(1e-14));
  CHECK_THROWS_AS(params(0.0, 0.01).validate(), sresn::ConfigError);
  CHECK_THROWS_AS(params(0.01, -1.0).validate(), sresn::ConfigError);
  CHECK_THROWS_AS(params(0.01, 0.01, -1.0).validate(), sresn::ConfigError);
}

TEST_CASE("a single step matches the hand-evaluated update") {
  const double dt = 0.8428571;
  CHECK(step1(0.5, 0.0, params(0.01, 0.01, 0.0, dt)) == doctest::Approx(0.50316071).epsilon(2e-8));
  CHECK(step1(0.5, 0.0, params(0.01, 0.01, 0.0, dt)) ==
        doctest::Approx(0.5 + 0.01 * (0.5 - 0.125) * dt).epsilon(1e-15));
}

TEST_CASE("fixed points are preserved exactly without noise or drive") {
  const SRParams p = params(0.01, 0.01);
  CHECK(step1(0.0, 0.0, p) == 0.0);
  CHECK(step1(1.0, 0.0, p) == 1.0);
  CHECK(step1(-1.0, 0.0, p) == -1.0);
  // A power-of-two ratio keeps sqrt(alpha / beta) = 2 exact.
  const SRParams q = params(0.01, 0.01 * 0.25);
  CHECK(q.stationary_point() == 2.0);
  CHECK(step1(2.0, 0.0, q) == 2.0);
  CHECK(step1(-2.0, 0.0, q) == -2.0);
}

TEST_CASE("the update is affine in the drive with slope dt") {
  const SRParams p = params(0.01, 0.01);
  const double h = 0x1p-10;
  for (double xi : {-1.0, -0.3, 0.0, 0.7, 1.5}) {
    for (double s : {-0.4, 0.0, 0.25}) {
      const double up = step1(xi, s + h, p), down = step1(xi, s - h, p);
      const double fd = (up - down) / (2.0 * h);
      // Only the rounding of the two evaluations remains.
      const double bound = 4.0 * kEps * (std::abs(up) + std::abs(down)) / (2.0 * h);
      CHECK(std::abs(fd - p.dt) <= bound);
    }
  }
}

TEST_CASE("state derivative matches central differences") {
  const SRParams p = params(0.01, 0.01);
  const double h = 1e-5;
  for (double xi : {-1.0, -0.3, 0.0, 0.7, 1.5}) {
    const double analytic = 1.0 + (p.alpha - 3.0 * p.beta * xi * xi) * p.dt;
    const double fd = (step1(xi + h, 0.0, p) - step1(xi - h, 0.0, p)) / (2.0 * h);
    CHECK(std::abs(fd - analytic) <= 1e-8 * std::abs(analytic));
  }
}

TEST_CASE("noise increments have variance D^2 dt^2") {
  // At xi = 0 with no drive the deterministic part of the update vanishes.
  const double d = 0.3;
  const SRParams p = params(0.01, 0.01, d);
  const std::size_t n = 100000;
  SRBank bank(std::vector<double>(n, 0.0), p);
  sresn::RandomStream rs(11, "sr.noise.test");
  std::vector<double> noise(n), drive(n, 0.0);
  for (double& z : noise) z = rs.normal();
  bank.step(drive, noise);

  double mean = 0.0;
  for (double v : bank.xi()) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : bank.xi()) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n - 1);
  const double expected = d * d * p.dt * p.dt;
  const double sigma = expected * std::sqrt(2.0 / static_cast<double>(n - 1));
  CHECK(std::abs(var - expected) <= 3.0 * sigma);

  SRParams sde = p;
  sde.sde_scaling = true;
  CHECK(sde.coefficients().noise_dt == doctest::Approx(std::sqrt(p.dt)));
}

TEST_CASE("positive states relax monotonically to +1, negative to -1") {
  const SRParams p = params(0.01, 0.01);
  for (double x0 : {1e-3, 0.2, 0.9, 1.0, 1.3, 2.0}) {
    for (double sign : {1.0, -1.0}) {
      double x = sign * x0;
      double prev_gap = std::abs(x - sign);
      bool monotone = true;
      for (int k = 0; k < 10000; ++k) {
        x = step1(x, 0.0, p);
        const double gap = std::abs(x - sign);
        monotone = monotone && gap <= prev_gap;
        prev_gap = gap;
      }
      CAPTURE(x0);
      CHECK(monotone);
      CHECK(std::abs(x - sign) < 1e-9);
    }
  }
}

TEST_CASE("divergence is reported with the neuron index") {
  SRBank bank({0.0, 0.0, 0.0}, params(0.01, 0.01));
  const std::vector<double> drive{0.0, 2e6, 0.0};
  try {
    bank.step(drive, {});
    FAIL("expected divergence");
  } catch (const sresn::DivergenceError& e) {
    CHECK(e.index() == 1);
    CHECK(e.step() == 1);
  }
  SRBank nan_bank({0.0}, params(0.01, 0.01));
  const std::vector<double> bad{std::numeric_limits<double>::quiet_NaN()};
  CHECK_THROWS_AS(nan_bank.step(bad, {}), sresn::DivergenceError);
  CHECK_THROWS_AS(nan_bank.step(std::vector<double>{0.0, 0.0}, {}), sresn::ConfigError);
}

TEST_CASE("transfer probes record one pair per neuron") {
  const std::size_t n = 400;
  sresn::RandomStream init(3, "sr.init");
  SRBank bank(n, params(0.01, 0.01), init);
  bank.record_steps({1, 10, 3});
  sresn::RandomStream drive_rng(4, "drive");
  std::vector<double> drive(n);
  for (int k = 0; k < 12; ++k) {
    for (double& s : drive) s = drive_rng.uniform(-1.0, 1.0);
    bank.step(drive, {});
  }
  const std::size_t want[] = {1, 10};
  const auto snaps = transfer_probe(bank, want);
  REQUIRE(snaps.size() == 2);
  CHECK(snaps[0].step == 1);
  CHECK(snaps[1].step == 10);
  for (const auto& snap : snaps) {
    CHECK(snap.points.size() == n);
    for (const auto& pt : snap.points) {
      const double x = pt.xi_prev;
      const double expected = x + 0.01 * (x - x * x * x) * bank.params().dt + pt.drive * bank.params().dt;
      CHECK(pt.xi_next == doctest::Approx(expected).epsilon(1e-14));
    }
  }
  // Step 1 sees the N(0, 1) initial states.
  double mean = 0.0;
  for (const auto& pt : snaps[0].points) mean += pt.xi_prev;
  mean /= static_cast<double>(n);
  CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));

  const std::size_t beyond[] = {13};
  CHECK_THROWS_AS(transfer_probe(bank, beyond), sresn::DomainError);
  const std::size_t unrecorded[] = {5};
  CHECK_THROWS_AS(transfer_probe(bank, unrecorded), sresn::DomainError);
}
