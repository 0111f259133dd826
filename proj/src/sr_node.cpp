#include "sresn/sr_node.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sresn/error.hpp"
#include "sresn/rng.hpp"

namespace sresn::sr {

void SRParams::validate() const {
  auto bad = [](const char* what) { throw ConfigError(std::string("sr: ") + what); };
  if (!(alpha > 0.0) || !std::isfinite(alpha)) bad("alpha must be finite and > 0");
  if (!(beta > 0.0) || !std::isfinite(beta)) bad("beta must be finite and > 0");
  if (!(noise_amp >= 0.0) || !std::isfinite(noise_amp)) bad("noise_amp must be finite and >= 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) bad("dt must be finite and > 0");
}

double SRParams::stationary_point() const { return std::sqrt(alpha / beta); }

double SRParams::barrier() const { return alpha * alpha / (4.0 * beta); }

kernels::SrCoefficients SRParams::coefficients() const {
  return {alpha, beta, noise_amp, dt, sde_scaling ? std::sqrt(dt) : dt};
}

double potential(double x, const SRParams& p) noexcept {
  const double x2 = x * x;
  return -p.alpha * x2 / 2.0 + p.beta * x2 * x2 / 4.0;
}

double tilted_potential(double x, double s, const SRParams& p) noexcept {
  return potential(x, p) - x * s;
}

SRBank::SRBank(std::vector<double> xi, SRParams params)
    : xi_(std::move(xi)), scratch_(xi_.size()), params_(params) {
  params_.validate();
}

SRBank::SRBank(std::size_t n, SRParams params, RandomStream& init)
    : xi_(n), scratch_(n), params_(params) {
  params_.validate();
  for (double& v : xi_) v = init.normal();
}

void SRBank::step(std::span<const double> drive, std::span<const double> noise) {
  if (drive.size() != xi_.size() || (!noise.empty() && noise.size() != xi_.size())) {
    throw ConfigError("sr_step: drive/noise length does not match bank size");
  }
  const auto coeffs = params_.coefficients();
  const double* noise_ptr = noise.empty() ? nullptr : noise.data();
  kernels::active().sr_update(xi_.data(), drive.data(), noise_ptr, coeffs, scratch_.data(),
                              xi_.size());
  const std::size_t next_step = step_index_ + 1;
  for (std::size_t i = 0; i < scratch_.size(); ++i) {
    if (!(std::abs(scratch_[i]) <= kDivergenceBound)) {
      throw DivergenceError("sr_step: state of neuron " + std::to_string(i) +
                                " diverged at step " + std::to_string(next_step),
                            next_step, i);
    }
  }
  if (std::binary_search(record_.begin(), record_.end(), next_step)) {
    ProbeSnapshot snap{next_step, {}};
    snap.points.reserve(xi_.size());
    for (std::size_t i = 0; i < xi_.size(); ++i) {
      snap.points.push_back({i, drive[i], xi_[i], scratch_[i]});
    }
    probes_.push_back(std::move(snap));
  }
  xi_.swap(scratch_);
  step_index_ = next_step;
}

void SRBank::record_steps(std::vector<std::size_t> steps) {
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
  record_ = std::move(steps);
}

std::vector<ProbeSnapshot> transfer_probe(const SRBank& bank, std::span<const std::size_t> steps) {
  std::vector<ProbeSnapshot> out;
  out.reserve(steps.size());
  for (std::size_t step : steps) {
    if (step == 0 || step > bank.step_index()) {
      throw DomainError("transfer_probe: step " + std::to_string(step) +
                        " beyond run length " + std::to_string(bank.step_index()));
    }
    auto it = std::find_if(bank.probes().begin(), bank.probes().end(),
                           [&](const ProbeSnapshot& s) { return s.step == step; });
    if (it == bank.probes().end()) {
      throw DomainError("transfer_probe: step " + std::to_string(step) + " was not recorded");
    }
    out.push_back(*it);
  }
  return out;
}

}  // namespace sresn::sr
