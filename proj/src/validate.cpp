#include "lsmimo/validate.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "lsmimo/channel.hpp"
#include "lsmimo/csv.hpp"
#include "lsmimo/det_equiv.hpp"
#include "lsmimo/experiments.hpp"
#include "lsmimo/geometry.hpp"

namespace lsmimo {

namespace {

using Dist = FadingDistribution<double>;

struct NamedDist {
  std::string name;
  Dist dist;
};

std::vector<NamedDist> test_distributions(std::uint64_t seed) {
  std::vector<NamedDist> out;
  for (double b : {0.001, 0.01, 0.1}) {
    std::ostringstream n;
    n << "idealized(7," << b << ")";
    out.push_back({n.str(), idealized_gains(7, b).distribution});
  }
  out.push_back({"single-cell", idealized_gains(1, 0.5).distribution});

  RandomStream rng(seed, "validate-dist", 0);
  Dist::Samples s(400, 7);
  for (Index i = 0; i < s.rows(); ++i) {
    s(i, 0) = rng.uniform(0.05, 1.0);
    for (Index j = 1; j < 7; ++j) s(i, j) = rng.uniform(1e-4, 0.2);
  }
  out.push_back({"random-empirical", Dist::empirical(std::move(s))});

  Cost231Params params;
  RandomStream cost_rng(seed, "validate-dist", 1);
  Dist cost = sample_gain_distribution(hex_layout(7, params.cell_radius_m), params, 2000, cost_rng);
  out.push_back({"cost231", std::move(cost)});
  return out;
}

double noise_for(const std::string& name) {
  return name == "cost231" ? cost231_noise_var(Cost231Params{}) : 0.01;
}

std::string fmt(double v) { return format_double(v); }

CheckResult check_all(const std::string& name, const std::vector<std::pair<std::string, double>>& worst,
                      bool ok) {
  std::ostringstream d;
  for (std::size_t i = 0; i < worst.size(); ++i) d << (i ? " " : "") << worst[i].first << "=" << fmt(worst[i].second);
  return {name, ok, d.str()};
}

const std::vector<double> kAlphas{0.05, 0.2, 0.5, 1.0, 1.5};

CheckResult fixed_point_residuals(const std::vector<NamedDist>& dists) {
  double worst = 0.0;
  for (const auto& [name, d] : dists) {
    const double s2 = noise_for(name);
    for (double a : kAlphas) {
      const double e1 = solve_eta1(d, a, s2);
      worst = std::max(worst, std::abs(eta1_map(d, a, s2, e1) - e1) / e1);
      const double es = solve_eta1_star(d, a, s2);
      worst = std::max(worst, std::abs(eta1_star_map(d, a, s2, es) - es) / es);
      const double z = -(s2 + 1.0);
      const double m = stieltjes_m(z, d, a);
      worst = std::max(worst, std::abs(stieltjes_map(z, d, a, m) - m) / m);
    }
  }
  return check_all("fixed-point residuals <= 1e-10", {{"max_residual", worst}}, worst <= 1e-10);
}

CheckResult eta2_dominates(const std::vector<NamedDist>& dists) {
  double worst = 1e300;
  for (const auto& [name, d] : dists)
    for (double a : kAlphas) {
      const auto det = solve_det_equiv(d, a, noise_for(name));
      worst = std::min(worst, det.eta2 / (det.eta1 * det.eta1));
    }
  return check_all("eta2 >= eta1^2", {{"min_ratio", worst}}, worst >= 1.0);
}

CheckResult suppression_bounded(const std::vector<NamedDist>& dists) {
  bool ok = true;
  double lo = 1e300, hi = -1e300;
  for (const auto& [name, d] : dists)
    for (double a : kAlphas) {
      const auto det = solve_det_equiv(d, a, noise_for(name));
      const double r = det.suppression / det.mean_total_gain;
      lo = std::min(lo, r);
      hi = std::max(hi, r);
      ok = ok && det.suppression >= 0.0 && det.suppression <= det.mean_total_gain;
    }
  return check_all("0 <= C <= E[B]", {{"min_C_over_EB", lo}, {"max_C_over_EB", hi}}, ok);
}

CheckResult zero_load_collapse(const std::vector<NamedDist>& dists) {
  double worst = 0.0;
  for (const auto& [name, d] : dists) {
    const auto det = solve_det_equiv(d, 0.0, noise_for(name));
    for (Index i = 0; i < std::min<Index>(d.size(), 50); ++i) {
      const auto p = UserGainProfile<double>::from_sample(d, i);
      const double mf = sinr_mf_pilot(p, det), mmse = sinr_mmse_pilot(p, det);
      worst = std::max(worst, std::abs(mf - mmse) / mf);
    }
  }
  return check_all("alpha = 0: MF == MMSE-pilot", {{"max_rel_diff", worst}},
                   worst <= 4 * std::numeric_limits<double>::epsilon());
}

CheckResult single_cell_equality() {
  double worst = 0.0;
  RandomStream rng(7, "validate-single", 0);
  Dist::Samples s(300, 1);
  for (Index i = 0; i < s.rows(); ++i) s(i, 0) = rng.uniform(0.01, 1.0);
  const std::vector<Dist> dists{idealized_gains(1, 0.5).distribution, Dist::empirical(s)};
  for (const auto& d : dists)
    for (double a : kAlphas) {
      const auto det = solve_det_equiv(d, a, 0.01);
      for (Index i = 0; i < d.size(); ++i) {
        const auto p = UserGainProfile<double>::from_sample(d, i);
        const double x = sinr_mmse_pilot(p, det), y = sinr_mmse_perfect(p, det);
        worst = std::max(worst, std::abs(x - y) / y);
      }
    }
  return check_all("single cell: MMSE-pilot == MMSE-perfect", {{"max_rel_diff", worst}}, worst <= 1e-10);
}

CheckResult stieltjes_route(const std::vector<NamedDist>& dists) {
  double worst = 0.0;
  for (const auto& [name, d] : dists)
    for (double a : kAlphas) {
      const double s2 = noise_for(name);
      const auto tb = theta_bar(d, a);
      const double m = stieltjes_m(-(s2 + tb.unestimated + tb.estimation), d, a);
      const double e1 = solve_eta1(d, a, s2);
      worst = std::max(worst, std::abs(m - e1) / e1);
      const double dm = stieltjes_m_derivative(d, a, m), e2 = solve_eta2(d, a, e1);
      worst = std::max(worst, std::abs(dm - e2) / e2);
    }
  return check_all("Stieltjes route == eta1 route (1e-8)", {{"max_rel_diff", worst}}, worst <= 1e-8);
}

CheckResult ordering(const std::vector<NamedDist>& dists) {
  bool ok = true;
  for (const auto& [name, d] : dists)
    for (double a : kAlphas) {
      const auto det = solve_det_equiv(d, a, noise_for(name));
      for (Index i = 0; i < std::min<Index>(d.size(), 200); ++i) {
        const auto p = UserGainProfile<double>::from_sample(d, i);
        const double mf = sinr_mf_pilot(p, det), mm = sinr_mmse_pilot(p, det), pe = sinr_mmse_perfect(p, det);
        ok = ok && mf <= mm * (1 + 1e-12) && mm <= pe * (1 + 1e-12);
      }
    }
  return {"MF <= MMSE-pilot <= MMSE-perfect", ok, ""};
}

CxMatrix<double> gaussian_matrix(Index rows, Index cols, RandomStream& rng) {
  const double var = 1.0 / static_cast<double>(rows);
  CxMatrix<double> h(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) h(r, c) = rng.complex_gaussian(var);
  return h;
}

CheckResult trace_lemma(std::uint64_t seed) {
  constexpr Index M = 1024, K = 256;
  constexpr int trials = 60;
  constexpr double rho = 0.1;
  int inside = 0;
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    RandomStream rng(seed, "validate-trace", static_cast<std::uint64_t>(t));
    const CxMatrix<double> g = gaussian_matrix(M, K - 1, rng);
    const CxVector<double> h = gaussian_matrix(M, 1, rng).col(0);
    const CxVector<double> sh = solve_regularized_gram(g, rho, h, SolvePath::low_rank);
    const double quad = std::real(h.dot(sh));
    Eigen::SelfAdjointEigenSolver<CxMatrix<double>> eig(g.adjoint() * g, Eigen::EigenvaluesOnly);
    const double tr = (static_cast<double>(M - (K - 1)) / rho + (eig.eigenvalues().array() + rho).inverse().sum()) /
                      static_cast<double>(M);
    const double rel = std::abs(quad - tr) / tr;
    worst = std::max(worst, rel);
    if (rel < 0.05) ++inside;
  }
  const double frac = static_cast<double>(inside) / trials;
  return check_all("trace lemma at M = 1024 (>= 95% within 5%)", {{"fraction", frac}, {"max_rel_dev", worst}},
                   frac >= 0.95);
}

CheckResult gram_identity(std::uint64_t seed) {
  constexpr Index M = 2048, K = 128;
  constexpr int trials = 20;
  int inside = 0;
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    RandomStream rng(seed, "validate-gram", static_cast<std::uint64_t>(t));
    const CxMatrix<double> h = gaussian_matrix(M, K, rng);
    CxMatrix<double> gram = h.adjoint() * h;
    gram.diagonal().array() -= 1.0;
    const double dev = gram.cwiseAbs().maxCoeff();
    worst = std::max(worst, dev);
    if (dev < 0.1) ++inside;
  }
  const double frac = static_cast<double>(inside) / trials;
  return check_all("H^H H -> I at M = 2048 (>= 95% within 0.1)", {{"fraction", frac}, {"max_dev", worst}},
                   frac >= 0.95);
}

CheckResult small_solve_oracle(std::uint64_t seed) {
  RandomStream rng(seed, "validate-solve", 0);
  const Eigen::MatrixXd gains = (Eigen::MatrixXd(2, 2) << 1.0, 0.7, 0.05, 0.02).finished();
  const auto real = draw_channels<double>(gains, 3, 0.01, rng);
  const auto est = pilot_estimate_noiseless(real);
  const auto th = theta_effective(real);
  const double t2 = estimation_error_power(est, gains);
  double worst = 0.0;

  CxMatrix<double> s = gains(0, 1) * est.estimates.col(1) * est.estimates.col(1).adjoint();
  s.diagonal().array() += th.unestimated + t2 + 0.01;
  const CxVector<double> oracle = s.inverse() * (std::sqrt(gains(0, 0)) * est.estimates.col(0));
  for (SolvePath path : {SolvePath::dense, SolvePath::low_rank}) {
    const auto f = mmse_filter_pilot(est, gains, th.unestimated, t2, 0.01, path);
    worst = std::max(worst, (f.weights - oracle).norm() / oracle.norm());
  }

  CxMatrix<double> sp = CxMatrix<double>::Zero(3, 3);
  for (Index k = 0; k < 2; ++k) sp += gains(0, k) * real.h(0, k) * real.h(0, k).adjoint();
  sp.diagonal().array() += th.unestimated + 0.01;
  const CxVector<double> oracle_p = sp.inverse() * (std::sqrt(gains(0, 0)) * real.h(0, 0));
  for (SolvePath path : {SolvePath::dense, SolvePath::low_rank}) {
    const auto f = mmse_filter_perfect(real, th.unestimated, 0.01, path);
    worst = std::max(worst, (f.weights - oracle_p).norm() / oracle_p.norm());
  }
  return check_all("dense inverse == structured solve at M = 3 (1e-12)", {{"max_rel_diff", worst}}, worst <= 1e-12);
}

CheckResult power_completeness(std::uint64_t seed) {
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    RandomStream rng(seed, "validate-power", static_cast<std::uint64_t>(t));
    const Eigen::MatrixXd gains = idealized_gain_matrix(7, 12, 0.05);
    const auto real = draw_channels<double>(gains, 24, 0.01, rng);
    const auto est = pilot_estimate_noiseless(real);
    const auto th = theta_effective(real);
    const std::vector<LinearFilter<double>> filters{
        matched_filter(est), mmse_filter_pilot(est, gains, th.unestimated, th.estimation, 0.01),
        mmse_filter_perfect(real, th.unestimated, 0.01)};
    CxMatrix<double> cov = 0.01 * CxMatrix<double>::Identity(24, 24);
    for (Index j = 0; j < real.cells(); ++j)
      for (Index k = 0; k < real.users(); ++k) cov += gains(j, k) * real.h(j, k) * real.h(j, k).adjoint();
    for (const auto& f : filters) {
      const auto b = empirical_sinr(f, real);
      const double total = std::real(f.weights.dot(cov * f.weights));
      worst = std::max(worst, std::abs(b.p_signal + b.p_noise + b.p_contam + b.p_inter - total) / total);
    }
  }
  return check_all("power decomposition completeness (1e-10)", {{"max_rel_diff", worst}}, worst <= 1e-10);
}

CheckResult determinism(std::uint64_t seed) {
  Scenario s;
  s.name = "determinism";
  s.noise_var = 0.01;
  s.alphas = {0.2, 0.5};
  const std::vector<double> alphas{0.2, 0.5};
  bool same = true;
  for (PilotMode mode : {PilotMode::noiseless_repeated, PilotMode::noisy_repeated, PilotMode::independent_training}) {
    MonteCarloOptions o;
    o.antennas = 16;
    o.trials = 12;
    o.estimate = mode;
    o.threads = 1;
    const auto a = monte_carlo_sweep(s, alphas, o, seed);
    const auto b = monte_carlo_sweep(s, alphas, o, seed);
    o.threads = 4;
    const auto c = monte_carlo_sweep(s, alphas, o, seed);
    for (std::size_t i = 0; i < a.size(); ++i) same = same && a[i].sinr == b[i].sinr && a[i].sinr == c[i].sinr;
  }
  return {"determinism across reruns and thread counts", same, ""};
}

}  // namespace

std::vector<CheckResult> run_property_suite(std::uint64_t seed) {
  const auto dists = test_distributions(seed);
  std::vector<CheckResult> out;
  out.push_back(fixed_point_residuals(dists));
  out.push_back(eta2_dominates(dists));
  out.push_back(suppression_bounded(dists));
  out.push_back(zero_load_collapse(dists));
  out.push_back(single_cell_equality());
  out.push_back(stieltjes_route(dists));
  out.push_back(ordering(dists));
  out.push_back(trace_lemma(seed));
  out.push_back(gram_identity(seed));
  out.push_back(small_solve_oracle(seed));
  out.push_back(power_completeness(seed));
  out.push_back(determinism(seed));
  return out;
}

}  // namespace lsmimo
