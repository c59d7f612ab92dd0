#pragma once

// Counter-based, splittable 64-bit generator. Each stream is a (key, counter)
// pair; the n-th output is a bijective mix of key + n * golden-gamma, so any
// stream can be re-derived from its key alone and sub-streams are obtained by
// hashing (key, tag). Normals use Box-Muller on pairs of uniforms.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace relugd {

// Fixed tags for named sub-streams.
namespace stream_tag {
inline constexpr std::uint64_t kHiddenWeights = 0x01;
inline constexpr std::uint64_t kOutputWeights = 0x02;
inline constexpr std::uint64_t kTrial = 0x03;
inline constexpr std::uint64_t kDataInputs = 0x04;
inline constexpr std::uint64_t kDataTargets = 0x05;
inline constexpr std::uint64_t kDataNorms = 0x06;
inline constexpr std::uint64_t kGramMonteCarlo = 0x07;
inline constexpr std::uint64_t kProbe = 0x08;
inline constexpr std::uint64_t kEvents = 0x09;
}  // namespace stream_tag

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class CounterRng {
 public:
  using result_type = std::uint64_t;

  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGamma);
  }

  // Independent stream for (tag, index); does not advance this stream.
  CounterRng derive(std::uint64_t tag, std::uint64_t index = 0) const noexcept {
    return CounterRng(mix64(mix64(key_ ^ mix64(tag * kGamma + 0x632BE59BD9B4E019ULL)) + index * kGamma));
  }

  // Uniform on (0, 1], 53-bit resolution.
  double uniform_open0() noexcept { return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53; }

  // Uniform on [0, 1).
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open0();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace relugd
