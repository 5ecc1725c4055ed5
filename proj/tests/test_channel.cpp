#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <vector>

#include "lsmimo/channel.hpp"
#include "lsmimo/det_equiv.hpp"
#include "lsmimo/experiments.hpp"
#include "lsmimo/geometry.hpp"

using namespace lsmimo;
using Cx = CxMatrix<double>;
using Real = ChannelRealization<double>;

namespace {

Real realization(const Eigen::MatrixXd& gains, Eigen::Index M, std::uint64_t seed, double noise = 0.01) {
  RandomStream rng(seed, "channel", 0);
  return draw_channels<double>(gains, M, noise, rng);
}

double rel(const CxVector<double>& a, const CxVector<double>& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST_CASE("users_for_load rounds and rejects K = 0") {
  CHECK(users_for_load(0.5, 50) == 25);
  CHECK(users_for_load(0.25, 10) == 3);
  CHECK_THROWS_AS(users_for_load(0.04, 10), InvalidInput);
  CHECK_THROWS_AS(users_for_load(0.5, 0), InvalidInput);
}

TEST_CASE("draw_channels is deterministic and normalized") {
  const Eigen::MatrixXd g = Eigen::MatrixXd::Ones(1, 2);
  const Real a = realization(g, 4, 3), b = realization(g, 4, 3), c = realization(g, 4, 4);
  CHECK(a.small_scale[0] == b.small_scale[0]);
  CHECK(a.small_scale[0] != c.small_scale[0]);

  const Real big = realization(idealized_gain_matrix(2, 40, 0.1), 1000, 5);
  double norm2 = 0.0, var_dev = 0.0;
  for (Eigen::Index j = 0; j < 2; ++j)
    for (Eigen::Index k = 0; k < 40; ++k) {
      norm2 += big.h(j, k).squaredNorm();
      var_dev += std::abs(big.h(j, k).squaredNorm() / 1000.0 - 1.0 / 1000.0);
    }
  CHECK(std::abs(norm2 / 80.0 - 1.0) < 0.1);
  CHECK(var_dev / 80.0 < 5.0 / std::sqrt(1000.0) / 1000.0);

  std::vector<double> inner;
  for (Eigen::Index k = 0; k < 40; ++k)
    for (Eigen::Index l = k + 1; l < 40; ++l) inner.push_back(std::abs(big.h(0, k).dot(big.h(1, l))));
  CHECK(quantile_type7(inner, 0.95) < 0.07);

  RandomStream rng(1);
  CHECK_THROWS_AS(draw_channels<double>(Eigen::MatrixXd::Zero(1, 1), 4, 0.01, rng), InvalidInput);
}

TEST_CASE("noiseless repeated-pilot estimate") {
  SUBCASE("single cell returns the channel") {
    const Real r = realization(Eigen::MatrixXd::Constant(1, 3, 0.4), 8, 1);
    CHECK(pilot_estimate_noiseless(r).estimates == r.small_scale[0]);
  }
  SUBCASE("two equal cells average the channels") {
    const Real r = realization(Eigen::MatrixXd::Ones(2, 2), 6, 2);
    const auto est = pilot_estimate_noiseless(r);
    CHECK(rel(est.estimates.col(1), (r.h(0, 1) + r.h(1, 1)) / 2.0) < 1e-15);
    CHECK(est.error_scale(0) == doctest::Approx(0.5));
  }
  SUBCASE("normalized energy at M = 500") {
    const Eigen::MatrixXd g = idealized_gain_matrix(7, 100, 0.1);
    const Real r = realization(g, 500, 3);
    const auto est = pilot_estimate_noiseless(r);
    double acc = 0.0;
    for (Eigen::Index k = 0; k < 100; ++k) acc += est.estimates.col(k).squaredNorm() * r.pilot_group_gain(k) / g(0, k);
    CHECK(std::abs(acc / 100.0 - 1.0) < 0.03);
  }
}

TEST_CASE("noisy repeated-pilot estimate") {
  const Eigen::MatrixXd g = idealized_gain_matrix(7, 5, 0.1);
  const Real r = realization(g, 32, 4);
  SUBCASE("continuity as the pilot SNR grows") {
    RandomStream n(1, "pilot-noise", 0);
    const auto noisy = pilot_estimate_noisy(r, 1e12, n);
    CHECK((noisy.estimates - pilot_estimate_noiseless(r).estimates).norm() < 1e-4);
  }
  SUBCASE("single-cell shrinkage prefactor") {
    const Real s = realization(Eigen::MatrixXd::Ones(1, 2), 16, 5);
    RandomStream n1(2, "pilot-noise", 0), n2(2, "pilot-noise", 0);
    const double rho = 10.0;
    const auto est = pilot_estimate_noisy(s, rho, n1);
    const double var = 1.0 / 16.0;
    Cx noise(16, 2);
    for (Eigen::Index k = 0; k < 2; ++k)
      for (Eigen::Index m = 0; m < 16; ++m) noise(m, k) = n2.complex_gaussian(var);
    const CxVector<double> expect = (s.h(0, 0) + noise.col(0) / std::sqrt(rho)) / (1.0 + 1.0 / rho);
    CHECK(rel(est.estimates.col(0), expect) < 1e-14);
  }
  SUBCASE("error covariance matches the stated scalar") {
    const double rho = 20.0;
    const Eigen::MatrixXd g2 = idealized_gain_matrix(3, 4, 0.2);
    double acc = 0.0;
    for (int t = 0; t < 100; ++t) {
      const Real s = realization(g2, 500, 100 + t);
      RandomStream n(7, "pilot-noise", static_cast<std::uint64_t>(t));
      const auto est = pilot_estimate_noisy(s, rho, n);
      acc += (s.h(0, 0) - est.estimates.col(0)).squaredNorm();
    }
    const double stated = (0.4 + 1.0 / rho) / (1.4 + 1.0 / rho);
    CHECK(std::abs(acc / 100.0 - stated) / stated < 0.05);
  }
  RandomStream n(3);
  CHECK_THROWS_AS(pilot_estimate_noisy(r, 0.0, n), InvalidInput);
}

TEST_CASE("pilot sequences") {
  RandomStream rng(1, "pilot-seq", 0);
  const auto cfg = generate_pilot_sequences<double>(64, 7, rng);
  CHECK(cfg.sequences.size() == 7);
  for (const auto& psi : cfg.sequences)
    CHECK((psi.adjoint() * psi - Cx::Identity(64, 64)).cwiseAbs().maxCoeff() < 1e-12);
  std::vector<double> coh;
  for (Eigen::Index k = 0; k < 64; ++k) coh.push_back(std::abs(cfg.sequences[0].col(k).dot(cfg.sequences[1].col(k))));
  const double med = median(coh);
  CHECK(med > 0.06);
  CHECK(med < 0.20);
}

TEST_CASE("training-based estimate") {
  SUBCASE("identity pilots reproduce the repeated-pilot noisy estimate") {
    const Eigen::MatrixXd g = idealized_gain_matrix(7, 6, 0.05);
    const Real r = realization(g, 20, 6);
    PilotConfig<double> cfg;
    cfg.mode = PilotMode::independent_training;
    cfg.pilot_snr = 50.0;
    cfg.sequences.assign(7, Cx::Identity(6, 6));
    RandomStream n1(4, "pilot-noise", 1), n2(4, "pilot-noise", 1);
    const auto a = training_based_estimate(r, cfg, n1);
    const auto b = pilot_estimate_noisy(r, 50.0, n2);
    CHECK((a.estimates - b.estimates).norm() / b.estimates.norm() < 1e-10);
    CHECK((a.error_scale - b.error_scale).abs().maxCoeff() < 1e-12);
  }
  SUBCASE("single cell with random orthonormal pilots is per-user scalar shrinkage") {
    const Eigen::MatrixXd g = (Eigen::MatrixXd(1, 3) << 1.0, 0.3, 0.6).finished();
    const Real r = realization(g, 12, 9);
    RandomStream seq(5, "pilot-seq", 0);
    auto cfg = generate_pilot_sequences<double>(3, 1, seq);
    cfg.pilot_snr = 8.0;
    RandomStream n1(5, "pilot-noise", 0), n2(5, "pilot-noise", 0);
    const auto est = training_based_estimate(r, cfg, n1);
    Cx noise(12, 3);
    for (Eigen::Index k = 0; k < 3; ++k)
      for (Eigen::Index m = 0; m < 12; ++m) noise(m, k) = n2.complex_gaussian(1.0 / 12.0);
    for (Eigen::Index k = 0; k < 3; ++k) {
      const double b = g(0, k);
      const CxVector<double> nk = noise * cfg.sequences[0].col(k);
      const CxVector<double> expect =
          (b / (b + 1.0 / 8.0)) * (r.h(0, k) + nk / std::sqrt(8.0 * b));
      CHECK(rel(est.estimates.col(k), expect) < 1e-12);
      CHECK(est.error_scale(k) == doctest::Approx(1.0 - b / (b + 1.0 / 8.0)));
    }
  }
  SUBCASE("ill-conditioned training matrix is rejected") {
    const Eigen::MatrixXd g = (Eigen::MatrixXd(1, 2) << 1.0, 1e-13).finished();
    const Real r = realization(g, 4, 1);
    PilotConfig<double> cfg;
    cfg.mode = PilotMode::independent_training;
    cfg.pilot_snr = 1e15;
    cfg.sequences.assign(1, Cx::Identity(2, 2));
    RandomStream n(1);
    CHECK_THROWS_AS(training_based_estimate(r, cfg, n), NumericalError);
  }
}

TEST_CASE("theta_effective") {
  CHECK(theta_effective(realization(Eigen::MatrixXd::Ones(1, 4), 4, 1)).unestimated == 0.0);
  const auto t2 = theta_effective(realization(Eigen::MatrixXd::Ones(2, 8), 8, 1));
  CHECK(t2.unestimated == doctest::Approx(1.0));
  CHECK(t2.estimation == doctest::Approx(0.5));
  const Real r7 = realization(idealized_gain_matrix(7, 16, 0.01), 16, 1);
  const auto t7 = theta_effective(r7);
  CHECK(t7.unestimated == doctest::Approx(0.06).epsilon(1e-14));
  CHECK(t7.estimation == doctest::Approx(0.05660377358490566).epsilon(1e-14));
  CHECK(estimation_error_power(pilot_estimate_noiseless(r7), r7.gains) == doctest::Approx(t7.estimation).epsilon(1e-14));
}

TEST_CASE("MMSE filters") {
  SUBCASE("K = 1 degenerates to the matched filter") {
    const Real r = realization(idealized_gain_matrix(3, 1, 0.1), 10, 2);
    const auto est = pilot_estimate_noiseless(r);
    const auto c = mmse_filter_pilot(est, r.gains, 0.1, 0.05, 0.01);
    const auto mf = matched_filter(est);
    const std::complex<double> ratio = c.weights(0) / mf.weights(0);
    CHECK(rel(c.weights, ratio * mf.weights) < 1e-14);
    const auto p = mmse_filter_perfect(realization(Eigen::MatrixXd::Ones(1, 1), 5, 3), 0.0, 0.01);
    CHECK(p.kind == FilterKind::mmse_perfect);
  }
  SUBCASE("low-rank and dense paths agree") {
    const Real r = realization(idealized_gain_matrix(7, 20, 0.05), 64, 4);
    const auto est = pilot_estimate_noiseless(r);
    const auto th = theta_effective(r);
    const auto a = mmse_filter_pilot(est, r.gains, th.unestimated, th.estimation, 0.01, SolvePath::low_rank);
    const auto b = mmse_filter_pilot(est, r.gains, th.unestimated, th.estimation, 0.01, SolvePath::dense);
    CHECK(rel(a.weights, b.weights) < 1e-10);
    CHECK(a.residual <= 1e-10);
    const auto pa = mmse_filter_perfect(r, th.unestimated, 0.01, SolvePath::low_rank);
    const auto pb = mmse_filter_perfect(r, th.unestimated, 0.01, SolvePath::dense);
    CHECK(rel(pa.weights, pb.weights) < 1e-10);
  }
  SUBCASE("M = 3 dense-inverse oracle") {
    const Eigen::MatrixXd g = (Eigen::MatrixXd(2, 2) << 1.0, 0.5, 0.1, 0.3).finished();
    const Real r = realization(g, 3, 8);
    const auto est = pilot_estimate_noiseless(r);
    Cx s = g(0, 1) * est.estimates.col(1) * est.estimates.col(1).adjoint();
    s.diagonal().array() += 0.2;
    const CxVector<double> oracle = s.inverse() * est.estimates.col(0);
    for (SolvePath path : {SolvePath::dense, SolvePath::low_rank, SolvePath::automatic})
      CHECK(rel(mmse_filter_pilot(est, g, 0.1, 0.09, 0.01, path).weights, oracle) < 1e-12);
  }
  SUBCASE("non-positive regularizer") {
    const Real r = realization(idealized_gain_matrix(2, 2, 0.1), 4, 1);
    const auto est = pilot_estimate_noiseless(r);
    CHECK_THROWS_AS(mmse_filter_pilot(est, r.gains, 0.0, 0.0, -0.1), InvalidInput);
    CHECK_THROWS_AS(mmse_filter_perfect(r, -1.0, 0.01), InvalidInput);
  }
}

TEST_CASE("empirical SINR decomposition") {
  SUBCASE("single user reduction") {
    const Real r = realization(Eigen::MatrixXd::Constant(1, 1, 0.7), 20, 5);
    const auto b = empirical_sinr(matched_filter(pilot_estimate_noiseless(r)), r);
    CHECK(b.sinr == doctest::Approx(0.7 * r.h(0, 0).squaredNorm() / 0.01).epsilon(1e-13));
    CHECK(b.p_contam == 0.0);
    CHECK(b.p_inter == 0.0);
  }
  SUBCASE("filter orthogonal to the desired channel") {
    const Real r = realization(idealized_gain_matrix(2, 3, 0.1), 6, 6);
    CxVector<double> c = r.h(1, 1);
    c -= r.h(0, 0) * (r.h(0, 0).dot(c) / r.h(0, 0).squaredNorm());
    const auto b = empirical_sinr(LinearFilter<double>{c, FilterKind::matched}, r);
    CHECK(b.p_signal < 1e-30);
    CHECK(b.sinr < 1e-28);
  }
  SUBCASE("completeness and exact ratio") {
    const Real r = realization(idealized_gain_matrix(4, 6, 0.2), 12, 7);
    const auto est = pilot_estimate_noiseless(r);
    const auto th = theta_effective(r);
    Cx cov = 0.01 * Cx::Identity(12, 12);
    for (Eigen::Index j = 0; j < 4; ++j)
      for (Eigen::Index k = 0; k < 6; ++k) cov += r.gains(j, k) * r.h(j, k) * r.h(j, k).adjoint();
    for (const auto& f : {matched_filter(est), mmse_filter_pilot(est, r.gains, th.unestimated, th.estimation, 0.01),
                          mmse_filter_perfect(r, th.unestimated, 0.01)}) {
      const auto b = empirical_sinr(f, r);
      const double total = std::real(f.weights.dot(cov * f.weights));
      CHECK(std::abs(b.p_signal + b.p_noise + b.p_contam + b.p_inter - total) / total < 1e-10);
      CHECK(b.sinr == b.p_signal / (b.p_noise + b.p_contam + b.p_inter));
    }
  }
  CHECK_THROWS_AS(empirical_sinr(LinearFilter<double>{CxVector<double>::Ones(3), FilterKind::matched},
                                 realization(Eigen::MatrixXd::Ones(1, 1), 4, 1)),
                  InvalidInput);
}

TEST_CASE("estimate is orthogonal to its error") {
  const Real r = realization(idealized_gain_matrix(7, 50, 0.1), 500, 11);
  const auto est = pilot_estimate_noiseless(r);
  double acc = 0.0;
  for (Eigen::Index k = 0; k < 50; ++k) acc += std::abs(est.estimates.col(k).dot(r.h(0, k) - est.estimates.col(k)));
  CHECK(acc / 50.0 < 3.0 / std::sqrt(500.0));
}

TEST_CASE("MMSE dominates the matched filter on average") {
  const Eigen::MatrixXd g = idealized_gain_matrix(7, 25, 0.01);  // alpha = 0.5 at M = 50
  double mmse = 0.0, mf = 0.0;
  for (int t = 0; t < 200; ++t) {
    const Real r = realization(g, 50, 1000 + t);
    const auto est = pilot_estimate_noiseless(r);
    const auto th = theta_effective(r);
    mmse += empirical_sinr(mmse_filter_pilot(est, g, th.unestimated, th.estimation, 0.01), r).sinr;
    mf += empirical_sinr(matched_filter(est), r).sinr;
  }
  CHECK(mmse > mf);
}

TEST_CASE("perfect-estimate MMSE is within 1 dB of its deterministic equivalent") {
  const auto ideal = idealized_gains(7, 0.01);
  const double target = sinr_mmse_perfect(ideal.profile, ideal.distribution, 0.5, 0.01);
  const Eigen::MatrixXd g = idealized_gain_matrix(7, 25, 0.01);
  std::vector<double> s;
  for (int t = 0; t < 500; ++t) {
    const Real r = realization(g, 50, 5000 + t);
    s.push_back(empirical_sinr(mmse_filter_perfect(r, theta_effective(r).unestimated, 0.01), r).sinr);
  }
  CHECK(std::abs(to_db(median(s)) - to_db(target)) < 1.0);
}

TEST_CASE("quadratic forms concentrate as M grows") {
  // Mean relative deviation |h^H S h - tr(S)/M| / (tr(S)/M) scales like M^-1/2.
  auto mean_dev = [](Eigen::Index M, int trials) {
    double acc = 0.0;
    for (int t = 0; t < trials; ++t) {
      const Real r = realization(Eigen::MatrixXd::Ones(1, M / 4), M, 300 + t);
      const Cx g = r.small_scale[0].rightCols(M / 4 - 1);
      const CxVector<double> h = r.h(0, 0);
      const double quad = std::real(h.dot(solve_regularized_gram(g, 0.1, h, SolvePath::low_rank)));
      Eigen::SelfAdjointEigenSolver<Cx> eig(g.adjoint() * g, Eigen::EigenvaluesOnly);
      const double tr = (static_cast<double>(M - g.cols()) / 0.1 + (eig.eigenvalues().array() + 0.1).inverse().sum()) /
                        static_cast<double>(M);
      acc += std::abs(quad - tr) / tr;
    }
    return acc / trials;
  };
  const double small = mean_dev(128, 60), large = mean_dev(1024, 30);
  CHECK(large < small);
  CHECK(large < 0.05);
  CHECK(large * std::sqrt(1024.0) == doctest::Approx(small * std::sqrt(128.0)).epsilon(0.35));
}

TEST_CASE("H^H H concentrates on the identity") {
  for (int t = 0; t < 5; ++t) {
    const Real r = realization(Eigen::MatrixXd::Ones(1, 128), 2048, 700 + t);
    Cx gram = r.small_scale[0].adjoint() * r.small_scale[0];
    gram.diagonal().array() -= 1.0;
    CHECK(gram.cwiseAbs().maxCoeff() < 0.1);
  }
}
