#pragma once

// Counter-based random streams.
//
// Every stream is a Philox4x64-10 generator keyed by (seed, label). Streams
// are addressed by name rather than consumed from a shared sequence, so the
// numbers a task sees do not depend on which thread runs it or in which
// order tasks complete.

#include <array>
#include <cstdint>
#include <string_view>

namespace sresn {

struct Philox4x64 {
  using Counter = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  static constexpr int kRounds = 10;

  static Counter block(Counter counter, Key key) noexcept;
};

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

// FNV-1a, 64-bit.
std::uint64_t hash_label(std::string_view label) noexcept;

// Derive a child seed from a parent seed and an ordered list of words.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label,
                          std::uint64_t a = 0, std::uint64_t b = 0) noexcept;

class RandomStream {
 public:
  static constexpr std::string_view kAlgorithm = "philox4x64-10";

  RandomStream(std::uint64_t seed, std::string_view label) noexcept;

  // Independent child stream, e.g. per-retry or per-neuron.
  RandomStream substream(std::uint64_t index) const noexcept;

  std::uint64_t next_u64() noexcept;
  // 53-bit uniform in [0, 1).
  double uniform01() noexcept;
  double uniform(double lo, double hi) noexcept;
  // Unbiased integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;
  // Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal() noexcept;

  const Philox4x64::Key& key() const noexcept { return key_; }

 private:
  RandomStream(Philox4x64::Key key) noexcept : key_(key) {}

  Philox4x64::Key key_;
  Philox4x64::Counter counter_{};
  Philox4x64::Counter buffer_{};
  int buffer_pos_ = 4;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace sresn
