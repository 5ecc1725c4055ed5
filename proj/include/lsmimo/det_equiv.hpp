#pragma once

// Large-system (deterministic-equivalent) SINR of uplink linear receivers under pilot
// contamination. Everything here is a pure function of a FadingDistribution and the
// scalars (alpha = K/M, noise variance).

#include <Eigen/Core>
#include <cmath>
#include <concepts>

#include "lsmimo/errors.hpp"
#include "lsmimo/fading.hpp"
#include "lsmimo/numeric.hpp"

namespace lsmimo {

namespace detail {

template <std::floating_point Scalar>
void check_load_and_noise(Scalar alpha, Scalar noise_var) {
  if (!(alpha >= Scalar(0)) || !std::isfinite(alpha)) throw InvalidInput("alpha must be >= 0");
  if (!(noise_var > Scalar(0)) || !std::isfinite(noise_var))
    throw InvalidInput("noise variance must be > 0");
}

}  // namespace detail

/// Right-hand side of the eta1 fixed point,
///   F(x) = 1 / (sigma^2 + alpha E[B] - alpha E[p^2 x / (1 + p x)]),  p = B_1^2 / B.
template <std::floating_point Scalar>
Scalar eta1_map(const FadingDistribution<Scalar>& dist, Scalar alpha, Scalar noise_var, Scalar x) {
  const auto& p = dist.effective_power();
  const Scalar mean_total = dist.expect([&](Index i) { return dist.total()(i); });
  const Scalar captured = dist.expect([&](Index i) { return p(i) * p(i) * x / (Scalar(1) + p(i) * x); });
  return Scalar(1) / (noise_var + alpha * mean_total - alpha * captured);
}

/// eta1 = lim (1/M) tr S^-1 for the pilot-estimate MMSE matrix S. Lies in (0, 1/sigma^2].
template <std::floating_point Scalar>
Scalar solve_eta1(const FadingDistribution<Scalar>& dist, Scalar alpha, Scalar noise_var,
                  const FixedPointOptions& opts = {}) {
  detail::check_load_and_noise(alpha, noise_var);
  const Scalar mean_total = expect_total_gain(dist).total;
  const Scalar x0 = Scalar(1) / (noise_var + alpha * mean_total);
  return damped_fixed_point<Scalar>(
             [&](Scalar x) { return eta1_map(dist, alpha, noise_var, x); }, x0, opts, "eta1")
      .value;
}

/// eta2 = lim (1/M) tr S^-2, from eta1. Throws DegenerateRegime if the denominator
/// eta1^-2 - alpha E[(p / (1 + p eta1))^2] is not positive.
template <std::floating_point Scalar>
Scalar solve_eta2(const FadingDistribution<Scalar>& dist, Scalar alpha, Scalar eta1) {
  if (!(eta1 > Scalar(0))) throw InvalidInput("eta2: eta1 must be > 0");
  const auto& p = dist.effective_power();
  const Scalar sub = dist.expect([&](Index i) {
    const Scalar r = p(i) / (Scalar(1) + p(i) * eta1);
    return r * r;
  });
  const Scalar denom = Scalar(1) / (eta1 * eta1) - alpha * sub;
  if (!(denom > Scalar(0)))
    throw DegenerateRegime("eta2: denominator " + std::to_string(static_cast<double>(denom)) +
                           " is not positive");
  return Scalar(1) / denom;
}

/// Interference suppression C of the pilot-estimate MMSE filter relative to the matched
/// filter. The three expectation terms are accumulated in a single pass over the samples.
template <std::floating_point Scalar>
Scalar interference_suppression(const FadingDistribution<Scalar>& dist, Scalar eta1, Scalar eta2) {
  using Terms = Eigen::Array<Scalar, 3, 1>;
  const auto& p = dist.effective_power();
  const auto& q = dist.cross_power();
  const Terms t = dist.expect([&](Index i) {
    const Scalar d = Scalar(1) + p(i) * eta1;
    Terms v;
    v << p(i) * p(i) * eta1 / d, p(i) * q(i) / d, p(i) * q(i) / (d * d);
    return v;
  });
  return t(0) + (eta2 / eta1) * (t(1) + t(2));
}

template <std::floating_point Scalar>
struct ThetaBar {
  Scalar unestimated;  // alpha sum_{j>=2} E[B_j]
  Scalar estimation;   // alpha sum_{j>=2} E[B_j B_1 / B]
};

/// Large-system limits of the effective-noise terms theta1, theta2 of the MMSE filter.
template <std::floating_point Scalar>
ThetaBar<Scalar> theta_bar(const FadingDistribution<Scalar>& dist, Scalar alpha) {
  const auto& other = dist.other_cell();
  ThetaBar<Scalar> t;
  t.unestimated = alpha * dist.expect([&](Index i) { return other(i); });
  t.estimation = alpha * dist.expect([&](Index i) { return other(i) * dist.own()(i) / dist.total()(i); });
  return t;
}

/// Right-hand side of the Stieltjes fixed point of the limiting eigenvalue law of
/// S1 D1 S1^H: m -> 1 / (-z + alpha E[p / (1 + p m)]).
template <std::floating_point Scalar>
Scalar stieltjes_map(Scalar z, const FadingDistribution<Scalar>& dist, Scalar alpha, Scalar m) {
  const auto& p = dist.effective_power();
  const Scalar avg = dist.expect([&](Index i) { return p(i) / (Scalar(1) + p(i) * m); });
  return Scalar(1) / (-z + alpha * avg);
}

/// Stieltjes transform m(z) on the negative real axis.
template <std::floating_point Scalar>
Scalar stieltjes_m(Scalar z, const FadingDistribution<Scalar>& dist, Scalar alpha,
                   const FixedPointOptions& opts = {}) {
  if (!(z < Scalar(0))) throw InvalidInput("stieltjes_m: z must be negative");
  if (!(alpha >= Scalar(0))) throw InvalidInput("alpha must be >= 0");
  return damped_fixed_point<Scalar>([&](Scalar m) { return stieltjes_map(z, dist, alpha, m); },
                                    Scalar(-1) / z, opts, "stieltjes")
      .value;
}

/// dm/dz at m = m(z), from differentiating the fixed point.
template <std::floating_point Scalar>
Scalar stieltjes_m_derivative(const FadingDistribution<Scalar>& dist, Scalar alpha, Scalar m) {
  return solve_eta2(dist, alpha, m);
}

/// Right-hand side of the perfect-estimate fixed point
///   x -> 1 / (sigma^2 + alpha sum_{j>=2} E[B_j] + alpha E[B_1 / (1 + B_1 x)]).
template <std::floating_point Scalar>
Scalar eta1_star_map(const FadingDistribution<Scalar>& dist, Scalar alpha, Scalar noise_var, Scalar x) {
  const auto& own = dist.own();
  const Scalar other = dist.expect([&](Index i) { return dist.other_cell()(i); });
  const Scalar in_cell = dist.expect([&](Index i) { return own(i) / (Scalar(1) + own(i) * x); });
  return Scalar(1) / (noise_var + alpha * other + alpha * in_cell);
}

template <std::floating_point Scalar>
Scalar solve_eta1_star(const FadingDistribution<Scalar>& dist, Scalar alpha, Scalar noise_var,
                       const FixedPointOptions& opts = {}) {
  detail::check_load_and_noise(alpha, noise_var);
  const Scalar x0 = Scalar(1) / (noise_var + alpha * expect_total_gain(dist).total);
  return damped_fixed_point<Scalar>(
             [&](Scalar x) { return eta1_star_map(dist, alpha, noise_var, x); }, x0, opts, "eta1*")
      .value;
}

/// Suppression achieved by the perfect-estimate MMSE filter: E[B_1^2 eta* / (1 + B_1 eta*)].
template <std::floating_point Scalar>
Scalar perfect_suppression(const FadingDistribution<Scalar>& dist, Scalar eta1_star) {
  const auto& own = dist.own();
  return dist.expect(
      [&](Index i) { return own(i) * own(i) * eta1_star / (Scalar(1) + own(i) * eta1_star); });
}

template <std::floating_point Scalar>
struct DetEqSolution {
  Scalar eta1;
  Scalar eta2;
  Scalar suppression;  // C
  Scalar theta1_bar;
  Scalar theta2_bar;
  Scalar mean_total_gain;  // E[B]
  Scalar alpha;
  Scalar noise_var;
  Scalar eta1_star;
  Scalar perfect_suppression;
};

template <std::floating_point Scalar>
DetEqSolution<Scalar> solve_det_equiv(const FadingDistribution<Scalar>& dist, Scalar alpha,
                                      Scalar noise_var, const FixedPointOptions& opts = {}) {
  DetEqSolution<Scalar> s;
  s.alpha = alpha;
  s.noise_var = noise_var;
  s.mean_total_gain = expect_total_gain(dist).total;
  s.eta1 = solve_eta1(dist, alpha, noise_var, opts);
  s.eta2 = solve_eta2(dist, alpha, s.eta1);
  s.suppression = interference_suppression(dist, s.eta1, s.eta2);
  const auto tb = theta_bar(dist, alpha);
  s.theta1_bar = tb.unestimated;
  s.theta2_bar = tb.estimation;
  s.eta1_star = solve_eta1_star(dist, alpha, noise_var, opts);
  s.perfect_suppression = perfect_suppression(dist, s.eta1_star);
  return s;
}

/// SINR(c) = S / (sigma^2 + P + alpha I(c)).
template <std::floating_point Scalar>
Scalar generalized_sinr(Scalar signal_bar, Scalar pilot_bar, Scalar inter_bar, Scalar alpha,
                        Scalar noise_var) {
  return signal_bar / (noise_var + pilot_bar + alpha * inter_bar);
}

template <std::floating_point Scalar>
Scalar sinr_mmse_pilot(const UserGainProfile<Scalar>& profile, const DetEqSolution<Scalar>& det) {
  return generalized_sinr(profile.signal_bar(), profile.pilot_bar(),
                          det.mean_total_gain - det.suppression, det.alpha, det.noise_var);
}

template <std::floating_point Scalar>
Scalar sinr_mf_pilot(const UserGainProfile<Scalar>& profile, const FadingDistribution<Scalar>& dist,
                     Scalar alpha, Scalar noise_var) {
  return generalized_sinr(profile.signal_bar(), profile.pilot_bar(), expect_total_gain(dist).total,
                          alpha, noise_var);
}

template <std::floating_point Scalar>
Scalar sinr_mf_pilot(const UserGainProfile<Scalar>& profile, const DetEqSolution<Scalar>& det) {
  return generalized_sinr(profile.signal_bar(), profile.pilot_bar(), det.mean_total_gain, det.alpha,
                          det.noise_var);
}

template <std::floating_point Scalar>
Scalar sinr_mmse_perfect(const UserGainProfile<Scalar>& profile,
                         const FadingDistribution<Scalar>& dist, Scalar alpha, Scalar noise_var) {
  return profile.own_gain * solve_eta1_star(dist, alpha, noise_var);
}

template <std::floating_point Scalar>
Scalar sinr_mmse_perfect(const UserGainProfile<Scalar>& profile, const DetEqSolution<Scalar>& det) {
  return profile.own_gain * det.eta1_star;
}

template <std::floating_point Scalar>
struct AsymptoticSinrReport {
  Scalar mf_pilot;
  Scalar mmse_pilot;
  Scalar mmse_perfect;
  Scalar signal_bar;
  Scalar pilot_bar;
  Scalar inter_mf;    // E[B]
  Scalar inter_mmse;  // E[B] - C

  Scalar mf_pilot_db() const { return to_db(mf_pilot); }
  Scalar mmse_pilot_db() const { return to_db(mmse_pilot); }
  Scalar mmse_perfect_db() const { return to_db(mmse_perfect); }
};

template <std::floating_point Scalar>
AsymptoticSinrReport<Scalar> asymptotic_report(const UserGainProfile<Scalar>& profile,
                                               const DetEqSolution<Scalar>& det) {
  AsymptoticSinrReport<Scalar> r;
  r.signal_bar = profile.signal_bar();
  r.pilot_bar = profile.pilot_bar();
  r.inter_mf = det.mean_total_gain;
  r.inter_mmse = det.mean_total_gain - det.suppression;
  r.mf_pilot = sinr_mf_pilot(profile, det);
  r.mmse_pilot = sinr_mmse_pilot(profile, det);
  r.mmse_perfect = sinr_mmse_perfect(profile, det);
  return r;
}

}  // namespace lsmimo
