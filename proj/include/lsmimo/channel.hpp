#pragma once

// Finite-dimension multi-cell uplink: channel draws, the three channel-estimate variants,
// the linear receivers and the conditional power decomposition of their output SINR.
//
// Conventions: the receiving base station is cell 0; user 0 of cell 0 is the user under
// study. small_scale[j].col(k) is h_jk in C^M with i.i.d. CN(0, 1/M) entries and
// gains(j, k) is the linear large-scale gain beta_jk.

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>
#include <complex>
#include <concepts>
#include <vector>

#include "lsmimo/errors.hpp"
#include "lsmimo/rng.hpp"

namespace lsmimo {

template <std::floating_point Scalar>
using CxMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;
template <std::floating_point Scalar>
using CxVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;
template <std::floating_point Scalar>
using RealMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <std::floating_point Scalar>
using RealArray = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

/// K = round(alpha M); throws if that leaves no users.
inline Eigen::Index users_for_load(double alpha, Eigen::Index antennas) {
  if (antennas < 1) throw InvalidInput("antenna count must be >= 1");
  const auto k = static_cast<Eigen::Index>(std::llround(alpha * static_cast<double>(antennas)));
  if (k < 1) throw InvalidInput("K = round(alpha M) is zero");
  return k;
}

template <std::floating_point Scalar>
struct ChannelRealization {
  std::vector<CxMatrix<Scalar>> small_scale;  // one M x K block per cell
  RealMatrix<Scalar> gains;                   // B x K
  Scalar noise_var;

  Eigen::Index antennas() const { return small_scale.front().rows(); }
  Eigen::Index users() const { return gains.cols(); }
  Eigen::Index cells() const { return gains.rows(); }
  auto h(Eigen::Index cell, Eigen::Index user) const { return small_scale[cell].col(user); }
  /// beta^(k) = sum_j beta_jk.
  Scalar pilot_group_gain(Eigen::Index user) const { return gains.col(user).sum(); }
};

template <std::floating_point Scalar>
ChannelRealization<Scalar> draw_channels(const RealMatrix<Scalar>& gains, Eigen::Index antennas,
                                         Scalar noise_var, RandomStream& rng) {
  if (antennas < 1) throw InvalidInput("antenna count must be >= 1");
  if (gains.rows() < 1 || gains.cols() < 1) throw InvalidInput("gain matrix is empty");
  if (!(gains.array() > Scalar(0)).all()) throw InvalidInput("large-scale gains must be > 0");
  if (!(noise_var > Scalar(0))) throw InvalidInput("noise variance must be > 0");

  ChannelRealization<Scalar> real;
  real.gains = gains;
  real.noise_var = noise_var;
  const Scalar var = Scalar(1) / static_cast<Scalar>(antennas);
  real.small_scale.reserve(static_cast<std::size_t>(gains.rows()));
  for (Eigen::Index j = 0; j < gains.rows(); ++j) {
    CxMatrix<Scalar> block(antennas, gains.cols());
    for (Eigen::Index k = 0; k < block.cols(); ++k)
      for (Eigen::Index m = 0; m < antennas; ++m) block(m, k) = rng.complex_gaussian(var);
    real.small_scale.push_back(std::move(block));
  }
  return real;
}

enum class PilotMode { noiseless_repeated, noisy_repeated, independent_training };

template <std::floating_point Scalar>
struct PilotConfig {
  PilotMode mode = PilotMode::noiseless_repeated;
  Scalar pilot_snr = Scalar(630.957344480193);  // 28 dB
  // independent_training only: sequences[j].col(k) is the unit-norm pilot of user k in cell j.
  std::vector<CxMatrix<Scalar>> sequences;
};

/// Per cell, a Haar-distributed K x K unitary whose columns are the in-cell pilots.
template <std::floating_point Scalar>
PilotConfig<Scalar> generate_pilot_sequences(Eigen::Index users, Eigen::Index cells,
                                             RandomStream& rng) {
  if (users < 1 || cells < 1) throw InvalidInput("pilot sequences need K >= 1 and B >= 1");
  PilotConfig<Scalar> cfg;
  cfg.mode = PilotMode::independent_training;
  for (Eigen::Index j = 0; j < cells; ++j) {
    CxMatrix<Scalar> z(users, users);
    for (Eigen::Index c = 0; c < users; ++c)
      for (Eigen::Index r = 0; r < users; ++r) z(r, c) = rng.complex_gaussian(Scalar(1));
    Eigen::HouseholderQR<CxMatrix<Scalar>> qr(z);
    CxMatrix<Scalar> q = qr.householderQ();
    const auto& packed = qr.matrixQR();
    for (Eigen::Index c = 0; c < users; ++c) {
      const std::complex<Scalar> d = packed(c, c);
      const Scalar mag = std::abs(d);
      // Fix the column phases so the distribution is exactly Haar.
      if (mag > Scalar(0)) q.col(c) *= d / mag;
    }
    cfg.sequences.push_back(std::move(q));
  }
  return cfg;
}

template <std::floating_point Scalar>
struct EstimateSet {
  CxMatrix<Scalar> estimates;     // M x K; column k is h-hat_1k
  RealArray<Scalar> error_scale;  // M E[h~ h~^H] = error_scale(k) I
};

/// Estimate with repeated pilots and rho_p -> infinity:
///   h-hat_1k = sqrt(beta_1k) / beta^(k) * sum_j sqrt(beta_jk) h_jk.
template <std::floating_point Scalar>
EstimateSet<Scalar> pilot_estimate_noiseless(const ChannelRealization<Scalar>& real) {
  const Eigen::Index M = real.antennas(), K = real.users(), B = real.cells();
  EstimateSet<Scalar> est{CxMatrix<Scalar>::Zero(M, K), RealArray<Scalar>(K)};
  for (Eigen::Index k = 0; k < K; ++k) {
    const Scalar group = real.pilot_group_gain(k);
    // sqrt(beta_1k beta_jk) keeps the j = 1 coefficient exactly beta_1k / beta^(k).
    for (Eigen::Index j = 0; j < B; ++j)
      est.estimates.col(k) += (std::sqrt(real.gains(0, k) * real.gains(j, k)) / group) * real.h(j, k);
    est.error_scale(k) = (group - real.gains(0, k)) / group;
  }
  return est;
}

namespace detail {

/// M x K pilot-noise matrix N with CN(0, 1/M) entries, drawn column by column.
template <std::floating_point Scalar>
CxMatrix<Scalar> draw_pilot_noise(Eigen::Index antennas, Eigen::Index users, RandomStream& rng) {
  const Scalar var = Scalar(1) / static_cast<Scalar>(antennas);
  CxMatrix<Scalar> n(antennas, users);
  for (Eigen::Index k = 0; k < users; ++k)
    for (Eigen::Index m = 0; m < antennas; ++m) n(m, k) = rng.complex_gaussian(var);
  return n;
}

}  // namespace detail

/// Repeated-pilot MMSE estimate with finite pilot SNR:
///   h-hat_1k = sqrt(beta_1k) / (beta^(k) + 1/rho_p) * (sum_j sqrt(beta_jk) h_jk + N psi_1k / sqrt(rho_p)).
/// With orthonormal pilots N psi_1k is column k of an i.i.d. noise matrix.
template <std::floating_point Scalar>
EstimateSet<Scalar> pilot_estimate_noisy(const ChannelRealization<Scalar>& real, Scalar rho_p,
                                         RandomStream& noise_rng) {
  if (!(rho_p > Scalar(0))) throw InvalidInput("pilot SNR must be > 0");
  const Eigen::Index M = real.antennas(), K = real.users(), B = real.cells();
  const CxMatrix<Scalar> noise = detail::draw_pilot_noise<Scalar>(M, K, noise_rng);
  const Scalar inv_rho = Scalar(1) / rho_p;
  EstimateSet<Scalar> est{CxMatrix<Scalar>::Zero(M, K), RealArray<Scalar>(K)};
  for (Eigen::Index k = 0; k < K; ++k) {
    const Scalar group = real.pilot_group_gain(k);
    for (Eigen::Index j = 0; j < B; ++j) est.estimates.col(k) += std::sqrt(real.gains(j, k)) * real.h(j, k);
    est.estimates.col(k) += std::sqrt(inv_rho) * noise.col(k);
    est.estimates.col(k) *= std::sqrt(real.gains(0, k)) / (group + inv_rho);
    est.error_scale(k) = (group - real.gains(0, k) + inv_rho) / (group + inv_rho);
  }
  return est;
}

/// MMSE estimate from the K-symbol pilot observation
///   Y = sum_j sum_k sqrt(beta_jk) h_jk psi_jk^H + N / sqrt(rho_p),
///   h-hat_1k = Y (I / rho_p + sum_jk beta_jk psi_jk psi_jk^H)^-1 psi_1k sqrt(beta_1k).
template <std::floating_point Scalar>
EstimateSet<Scalar> training_based_estimate(const ChannelRealization<Scalar>& real,
                                            const PilotConfig<Scalar>& pilots,
                                            RandomStream& noise_rng) {
  const Eigen::Index M = real.antennas(), K = real.users(), B = real.cells();
  if (pilots.mode != PilotMode::independent_training)
    throw InvalidInput("training estimate needs explicit pilot sequences");
  if (static_cast<Eigen::Index>(pilots.sequences.size()) != B)
    throw InvalidInput("one pilot basis per cell is required");
  if (!(pilots.pilot_snr > Scalar(0))) throw InvalidInput("pilot SNR must be > 0");
  const auto identity = CxMatrix<Scalar>::Identity(K, K);
  for (const auto& psi : pilots.sequences) {
    if (psi.rows() != K || psi.cols() != K) throw InvalidInput("pilot basis must be K x K");
    if (((psi.adjoint() * psi) - identity).cwiseAbs().maxCoeff() > Scalar(1e-10))
      throw InvalidInput("in-cell pilots are not orthonormal");
  }

  const Scalar inv_rho = Scalar(1) / pilots.pilot_snr;
  CxMatrix<Scalar> y = std::sqrt(inv_rho) * detail::draw_pilot_noise<Scalar>(M, K, noise_rng);
  CxMatrix<Scalar> inner = inv_rho * identity;
  for (Eigen::Index j = 0; j < B; ++j) {
    const auto& psi = pilots.sequences[static_cast<std::size_t>(j)];
    const RealArray<Scalar> beta = real.gains.row(j).transpose().array();
    y += real.small_scale[static_cast<std::size_t>(j)] * beta.sqrt().matrix().asDiagonal() * psi.adjoint();
    inner += psi * beta.matrix().asDiagonal() * psi.adjoint();
  }

  Eigen::SelfAdjointEigenSolver<CxMatrix<Scalar>> eig(inner, Eigen::EigenvaluesOnly);
  const Scalar lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
  if (!(lo > Scalar(0)) || hi / lo > Scalar(1e12))
    throw NumericalError("training matrix condition number exceeds 1e12");

  const auto& psi1 = pilots.sequences.front();
  const RealArray<Scalar> beta1 = real.gains.row(0).transpose().array();
  Eigen::LLT<CxMatrix<Scalar>> llt(inner);
  const CxMatrix<Scalar> w = llt.solve(psi1);  // A^-1 psi_1k, column k

  EstimateSet<Scalar> est;
  est.estimates = y * w * beta1.sqrt().matrix().asDiagonal();
  est.error_scale.resize(K);
  for (Eigen::Index k = 0; k < K; ++k)
    est.error_scale(k) = Scalar(1) - beta1(k) * std::real(psi1.col(k).dot(w.col(k)));
  return est;
}

template <std::floating_point Scalar>
struct Theta {
  Scalar unestimated;  // theta1: other-cell interference left out of S
  Scalar estimation;   // theta2: in-cell estimation error
};

/// theta1 = (1/M) sum_{j>=2} sum_k beta_jk,
/// theta2 = (1/M) sum_{j>=2} sum_k beta_jk beta_1k / beta^(k).
template <std::floating_point Scalar>
Theta<Scalar> theta_effective(const ChannelRealization<Scalar>& real) {
  const auto M = static_cast<Scalar>(real.antennas());
  Theta<Scalar> t{Scalar(0), Scalar(0)};
  for (Eigen::Index k = 0; k < real.users(); ++k) {
    const Scalar group = real.pilot_group_gain(k);
    const Scalar other = group - real.gains(0, k);
    t.unestimated += other;
    t.estimation += other * real.gains(0, k) / group;
  }
  t.unestimated /= M;
  t.estimation /= M;
  return t;
}

/// (1/M) sum_k beta_1k e_k, the estimation-error term for any EstimateSet. Equals
/// theta_effective().estimation for the noiseless repeated-pilot estimate.
template <std::floating_point Scalar>
Scalar estimation_error_power(const EstimateSet<Scalar>& est, const RealMatrix<Scalar>& gains) {
  return (gains.row(0).transpose().array() * est.error_scale).sum() /
         static_cast<Scalar>(est.estimates.rows());
}

enum class FilterKind { matched, mmse_pilot, mmse_perfect };

template <std::floating_point Scalar>
struct LinearFilter {
  CxVector<Scalar> weights;
  FilterKind kind;
  Scalar residual = Scalar(0);  // ||S c - b|| / ||b|| for the MMSE kinds
};

enum class SolvePath { automatic, dense, low_rank };

/// Solves (G G^H + rho I) c = b. The low-rank route works in the G.cols()-dimensional
/// column space via the matrix inversion lemma; the dense route factors the M x M matrix.
/// One step of iterative refinement follows either route.
template <std::floating_point Scalar>
CxVector<Scalar> solve_regularized_gram(const CxMatrix<Scalar>& g, Scalar rho,
                                        const CxVector<Scalar>& b, SolvePath path,
                                        Scalar* relative_residual = nullptr) {
  if (!(rho > Scalar(0))) throw InvalidInput("MMSE regularizer must be > 0");
  const Eigen::Index M = b.size(), r = g.cols();
  const bool low_rank = path == SolvePath::low_rank || (path == SolvePath::automatic && 2 * r < M);

  auto apply = [&](const CxVector<Scalar>& x) -> CxVector<Scalar> {
    CxVector<Scalar> out = rho * x;
    if (r > 0) out.noalias() += g * (g.adjoint() * x);
    return out;
  };

  CxVector<Scalar> c;
  if (r == 0) {
    c = b / rho;
  } else if (low_rank) {
    CxMatrix<Scalar> core = g.adjoint() * g;
    core.diagonal().array() += rho;
    const Eigen::LLT<CxMatrix<Scalar>> llt(core);
    auto solve = [&](const CxVector<Scalar>& rhs) -> CxVector<Scalar> {
      return (rhs - g * llt.solve(g.adjoint() * rhs)) / rho;
    };
    c = solve(b);
    c += solve(b - apply(c));
  } else {
    CxMatrix<Scalar> s = g * g.adjoint();
    s.diagonal().array() += rho;
    const Eigen::LLT<CxMatrix<Scalar>> llt(s);
    if (llt.info() != Eigen::Success) throw NumericalError("MMSE matrix is not positive definite");
    c = llt.solve(b);
    c += llt.solve(b - apply(c));
  }

  const Scalar res = (apply(c) - b).norm() / b.norm();
  if (relative_residual) *relative_residual = res;
  if (!(res <= Scalar(1e-10))) throw NumericalError("MMSE solve residual above 1e-10");
  return c;
}

/// c = S^-1 sqrt(beta_11) h-hat_11 with S = sum_{k>=2} beta_1k h-hat_1k h-hat_1k^H
/// + (theta1 + theta2 + sigma^2) I. User 1's own estimate is not part of S.
template <std::floating_point Scalar>
LinearFilter<Scalar> mmse_filter_pilot(const EstimateSet<Scalar>& est, const RealMatrix<Scalar>& gains,
                                       Scalar theta1, Scalar theta2, Scalar noise_var,
                                       SolvePath path = SolvePath::automatic) {
  const Scalar rho = theta1 + theta2 + noise_var;
  if (!(rho > Scalar(0))) throw InvalidInput("theta1 + theta2 + sigma^2 must be > 0");
  const Eigen::Index K = est.estimates.cols();
  const RealArray<Scalar> beta1 = gains.row(0).transpose().array();
  const CxMatrix<Scalar> g =
      est.estimates.rightCols(K - 1) * beta1.tail(K - 1).sqrt().matrix().asDiagonal();
  const CxVector<Scalar> b = std::sqrt(beta1(0)) * est.estimates.col(0);
  LinearFilter<Scalar> f{CxVector<Scalar>(), FilterKind::mmse_pilot};
  f.weights = solve_regularized_gram(g, rho, b, path, &f.residual);
  return f;
}

/// Benchmark filter with true in-cell channels:
/// c = (sum_k beta_1k h_1k h_1k^H + (theta1 + sigma^2) I)^-1 sqrt(beta_11) h_11.
template <std::floating_point Scalar>
LinearFilter<Scalar> mmse_filter_perfect(const ChannelRealization<Scalar>& real, Scalar theta1,
                                         Scalar noise_var, SolvePath path = SolvePath::automatic) {
  const Scalar rho = theta1 + noise_var;
  if (!(rho > Scalar(0))) throw InvalidInput("theta1 + sigma^2 must be > 0");
  const RealArray<Scalar> beta1 = real.gains.row(0).transpose().array();
  const CxMatrix<Scalar> g = real.small_scale.front() * beta1.sqrt().matrix().asDiagonal();
  const CxVector<Scalar> b = std::sqrt(beta1(0)) * real.h(0, 0);
  LinearFilter<Scalar> f{CxVector<Scalar>(), FilterKind::mmse_perfect};
  f.weights = solve_regularized_gram(g, rho, b, path, &f.residual);
  return f;
}

template <std::floating_point Scalar>
LinearFilter<Scalar> matched_filter(const EstimateSet<Scalar>& est) {
  return LinearFilter<Scalar>{est.estimates.col(0), FilterKind::matched};
}

template <std::floating_point Scalar>
struct SinrBreakdown {
  Scalar p_signal;
  Scalar p_noise;
  Scalar p_contam;  // same-pilot users of the other cells
  Scalar p_inter;   // all users k >= 2 of every cell
  Scalar sinr;
};

/// Conditional output powers of filter c for user (0, 0) given all channels.
template <std::floating_point Scalar>
SinrBreakdown<Scalar> empirical_sinr(const LinearFilter<Scalar>& filter,
                                     const ChannelRealization<Scalar>& real) {
  const auto& c = filter.weights;
  if (c.size() != real.antennas()) throw InvalidInput("filter length does not match M");
  SinrBreakdown<Scalar> out{Scalar(0), Scalar(0), Scalar(0), Scalar(0), Scalar(0)};
  for (Eigen::Index j = 0; j < real.cells(); ++j) {
    const RealArray<Scalar> proj =
        (real.small_scale[static_cast<std::size_t>(j)].adjoint() * c).cwiseAbs2().array();
    const RealArray<Scalar> beta = real.gains.row(j).transpose().array();
    if (j == 0)
      out.p_signal = beta(0) * proj(0);
    else
      out.p_contam += beta(0) * proj(0);
    out.p_inter += (beta.tail(beta.size() - 1) * proj.tail(proj.size() - 1)).sum();
  }
  out.p_noise = real.noise_var * c.squaredNorm();
  out.sinr = out.p_signal / (out.p_noise + out.p_contam + out.p_inter);
  return out;
}

}  // namespace lsmimo
