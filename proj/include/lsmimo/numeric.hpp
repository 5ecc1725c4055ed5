#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <span>
#include <string>

#include "lsmimo/errors.hpp"

namespace lsmimo {

template <std::floating_point Scalar>
Scalar to_db(Scalar linear) {
  return Scalar(10) * std::log10(linear);
}

template <std::floating_point Scalar>
Scalar from_db(Scalar db) {
  return std::pow(Scalar(10), db / Scalar(10));
}

/// Pairwise (cascade) summation. The result depends only on the order of `values`,
/// never on how a caller might split the work.
template <typename T>
T pairwise_sum(std::span<const T> values) {
  constexpr std::size_t kBlock = 8;
  if (values.empty()) return T{};
  if (values.size() <= kBlock) {
    T acc = values[0];
    for (std::size_t i = 1; i < values.size(); ++i) acc = acc + values[i];
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

struct FixedPointOptions {
  double damping = 0.5;
  double tolerance = 1e-12;
  int max_iterations = 10000;
};

template <std::floating_point Scalar>
struct FixedPointResult {
  Scalar value;
  Scalar residual;  // |F(x) - x| / |x| at the returned x
  int iterations;
};

/// Damped Picard iteration x <- (1 - lambda) x + lambda F(x) on a scalar map.
/// Stops once the relative residual |F(x) - x| / |x| falls below the tolerance.
template <std::floating_point Scalar, typename Map>
FixedPointResult<Scalar> damped_fixed_point(Map&& map, Scalar x0, const FixedPointOptions& opts,
                                            const char* what) {
  const auto lambda = static_cast<Scalar>(opts.damping);
  Scalar x = x0;
  Scalar residual = std::numeric_limits<Scalar>::infinity();
  for (int it = 1; it <= opts.max_iterations; ++it) {
    const Scalar fx = map(x);
    if (!std::isfinite(fx)) {
      throw ConvergenceError(std::string(what) + ": map produced a non-finite value",
                             static_cast<double>(residual), it);
    }
    residual = std::abs(fx - x) / std::abs(x);
    if (residual <= static_cast<Scalar>(opts.tolerance)) return {x, residual, it};
    x = (Scalar(1) - lambda) * x + lambda * fx;
  }
  throw ConvergenceError(std::string(what) + ": no convergence", static_cast<double>(residual),
                         opts.max_iterations);
}

}  // namespace lsmimo
