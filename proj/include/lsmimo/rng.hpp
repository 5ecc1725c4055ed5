#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string_view>

namespace lsmimo {

/// Derives the state of an independent substream from (master seed, domain tag, index).
///
/// Scheme: FNV-1a 64 over the tag bytes, a 0x00 separator, the index as 8 little-endian
/// bytes and the master seed as 8 little-endian bytes; the digest is then passed through
/// the SplitMix64 finalizer. Other implementations can reproduce the 64-bit state exactly;
/// the Gaussian draws built on top of it are specific to this library.
std::uint64_t seed_substream(std::uint64_t master, std::string_view domain_tag, std::uint64_t index);

/// Deterministic random source for one substream.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t state) : engine_(state) {}
  RandomStream(std::uint64_t master, std::string_view tag, std::uint64_t index)
      : engine_(seed_substream(master, tag, index)) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double gaussian() { return normal_(engine_); }

  /// Circularly symmetric complex Gaussian with E|x|^2 = variance.
  template <typename Scalar = double>
  std::complex<Scalar> complex_gaussian(Scalar variance) {
    const double s = std::sqrt(static_cast<double>(variance) / 2.0);
    const double re = s * normal_(engine_);
    const double im = s * normal_(engine_);
    return {static_cast<Scalar>(re), static_cast<Scalar>(im)};
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace lsmimo
