#pragma once

#include <Eigen/Core>
#include <concepts>
#include <type_traits>
#include <utility>
#include <vector>

#include "lsmimo/errors.hpp"
#include "lsmimo/numeric.hpp"

namespace lsmimo {

using Eigen::Index;

enum class DistributionKind { point_mass, empirical };

/// Joint law of the large-scale gains (B_1, ..., B_B) seen by the receiving base station,
/// one weighted sample per row. Column 0 is the in-cell gain B_1.
///
/// All expectations in the deterministic-equivalent formulas go through `expect`, which
/// sums w_i f(i) in sample order with pairwise summation.
template <std::floating_point Scalar>
class FadingDistribution {
 public:
  using Samples = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  static FadingDistribution point_mass(const Eigen::Ref<const Vector>& gains) {
    Samples s = gains.transpose();
    return FadingDistribution(std::move(s), Array::Ones(1), DistributionKind::point_mass);
  }

  /// Equal-weight empirical distribution.
  static FadingDistribution empirical(Samples samples) {
    const Index n = samples.rows();
    if (n == 0) throw InvalidInput("fading distribution: no samples");
    Array w = Array::Constant(n, Scalar(1) / static_cast<Scalar>(n));
    return FadingDistribution(std::move(samples), std::move(w), DistributionKind::empirical);
  }

  /// Weighted empirical distribution; weights are normalized to sum to one.
  static FadingDistribution empirical(Samples samples, Array weights) {
    return FadingDistribution(std::move(samples), std::move(weights), DistributionKind::empirical);
  }

  Index size() const { return samples_.rows(); }
  Index cells() const { return samples_.cols(); }
  DistributionKind kind() const { return kind_; }
  const Samples& samples() const { return samples_; }
  const Array& weights() const { return weights_; }

  /// Per-sample B = sum_j B_j.
  const Array& total() const { return total_; }
  /// Per-sample B_1.
  const Array& own() const { return own_; }
  /// Per-sample B_1^2 / B: the nonzero eigenvalue each in-cell user contributes to the
  /// estimated-channel Gram matrix.
  const Array& effective_power() const { return effective_; }
  /// Per-sample sum_{j>=2} B_j^2 / B.
  const Array& cross_power() const { return cross_; }
  /// Per-sample sum_{j>=2} B_j.
  const Array& other_cell() const { return other_; }

  /// E[f] where f(i) evaluates sample i. f may return a scalar or a fixed-size Eigen array.
  template <typename F>
  auto expect(F&& f) const {
    using R = std::decay_t<std::invoke_result_t<F&, Index>>;
    if (size() == 1) return R(f(Index{0}));
    std::vector<R> terms;
    terms.reserve(static_cast<std::size_t>(size()));
    for (Index i = 0; i < size(); ++i) terms.push_back(R(weights_(i) * f(i)));
    return pairwise_sum(std::span<const R>(terms));
  }

 private:
  FadingDistribution(Samples samples, Array weights, DistributionKind kind)
      : samples_(std::move(samples)), weights_(std::move(weights)), kind_(kind) {
    if (samples_.rows() == 0 || samples_.cols() == 0)
      throw InvalidInput("fading distribution: no samples");
    if (weights_.size() != samples_.rows())
      throw InvalidInput("fading distribution: weight count does not match sample count");
    if (!(samples_.array() > Scalar(0)).all() || !samples_.allFinite())
      throw InvalidInput("fading distribution: every gain must be finite and > 0");
    if ((weights_ < Scalar(0)).any()) throw InvalidInput("fading distribution: negative weight");
    const Scalar wsum = weights_.sum();
    if (!(wsum > Scalar(0))) throw InvalidInput("fading distribution: weights sum to zero");
    weights_ /= wsum;

    total_ = samples_.rowwise().sum().array();
    own_ = samples_.col(0).array();
    effective_ = own_.square() / total_;
    other_ = total_ - own_;
    cross_ = Array::Zero(size());
    if (cells() > 1) {
      cross_ = samples_.rightCols(cells() - 1).array().square().rowwise().sum() / total_;
      other_ = samples_.rightCols(cells() - 1).rowwise().sum().array();
    }
  }

  Samples samples_;
  Array weights_;
  DistributionKind kind_;
  Array total_, own_, effective_, cross_, other_;
};

/// Large-scale gains of the user under study: beta_11 and the gains beta_j1 (j >= 2) of the
/// users sharing its pilot in the other cells.
template <std::floating_point Scalar>
struct UserGainProfile {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Scalar own_gain;
  Vector contaminator_gains;

  UserGainProfile(Scalar own, Vector contaminators)
      : own_gain(own), contaminator_gains(std::move(contaminators)) {
    if (!(own_gain > Scalar(0)) || (contaminator_gains.array() <= Scalar(0)).any())
      throw InvalidInput("user gain profile: gains must be > 0");
  }

  /// Row `i` of a distribution read as a profile.
  static UserGainProfile from_sample(const FadingDistribution<Scalar>& dist, Index i) {
    const auto row = dist.samples().row(i);
    return UserGainProfile(row(0), row.tail(dist.cells() - 1).transpose());
  }

  /// beta^(1) = beta_11 + sum_j beta_j1.
  Scalar total() const { return own_gain + contaminator_gains.sum(); }
  /// Effective signal power beta_11^2 / beta^(1).
  Scalar signal_bar() const { return own_gain * own_gain / total(); }
  /// Pilot-interference power sum_j beta_j1^2 / beta^(1).
  Scalar pilot_bar() const { return contaminator_gains.squaredNorm() / total(); }
};

template <std::floating_point Scalar>
struct TotalGainMoments {
  Scalar total;                                   // E[B]
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> cell;  // E[B_j], j = 1..B
};

template <std::floating_point Scalar>
TotalGainMoments<Scalar> expect_total_gain(const FadingDistribution<Scalar>& dist) {
  TotalGainMoments<Scalar> m;
  m.total = dist.expect([&](Index i) { return dist.total()(i); });
  m.cell.resize(dist.cells());
  for (Index j = 0; j < dist.cells(); ++j)
    m.cell(j) = dist.expect([&](Index i) { return dist.samples()(i, j); });
  return m;
}

}  // namespace lsmimo
