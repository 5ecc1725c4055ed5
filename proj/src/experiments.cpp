#include "lsmimo/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <thread>

#include "lsmimo/errors.hpp"
#include "lsmimo/geometry.hpp"
#include "lsmimo/rng.hpp"

namespace lsmimo {

namespace {

std::uint64_t trial_index(std::size_t point, int trial) {
  return (static_cast<std::uint64_t>(point) << 32) | static_cast<std::uint32_t>(trial);
}

double db(double x) { return 10.0 * std::log10(x); }

void check_alpha_grid(std::span<const double> alphas) {
  if (alphas.empty()) throw InvalidInput("alpha grid is empty");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0 && alphas[i] <= 1.5)) throw InvalidInput("alpha must lie in (0, 1.5]");
    if (i > 0 && !(alphas[i] > alphas[i - 1])) throw InvalidInput("alpha grid must be strictly increasing");
  }
}

/// Runs body(t) for t in [0, n) on `threads` workers; each t writes only its own slot.
template <typename Body>
void parallel_for(int n, unsigned threads, Body&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max(n, 1)));
  if (threads <= 1) {
    for (int t = 0; t < n; ++t) body(t);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (int t = next++; t < n && !failed; t = next++) {
        try {
          body(t);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

UserGainProfile<double> profile_of(const Eigen::MatrixXd& gains) {
  return UserGainProfile<double>(gains(0, 0), gains.col(0).tail(gains.rows() - 1));
}

}  // namespace

int GainSource::profiles() const { return fixed_profile ? 1 : static_cast<int>(distribution.size()); }

UserGainProfile<double> GainSource::profile(int i) const {
  if (fixed_profile) return *fixed_profile;
  return UserGainProfile<double>::from_sample(distribution, i);
}

GainSource make_gain_source(const Scenario& scenario, std::uint64_t seed) {
  scenario.validate();
  if (scenario.gain_model == GainModel::idealized) {
    auto ideal = idealized_gains(scenario.cells, scenario.beta_other);
    return {std::move(ideal.distribution), std::move(ideal.profile), scenario.effective_noise_var()};
  }
  RandomStream rng(seed, "gain-dist", 0);
  const CellLayout layout = hex_layout(scenario.cells, scenario.cost231.cell_radius_m);
  return {sample_gain_distribution(layout, scenario.cost231, scenario.gain_samples, rng), std::nullopt,
          scenario.effective_noise_var()};
}

ProfileSinrs profile_sinrs(const GainSource& source, const DetEqSolution<double>& det) {
  ProfileSinrs out;
  const int n = source.profiles();
  out.mf.reserve(n);
  out.mmse.reserve(n);
  out.perfect.reserve(n);
  for (int i = 0; i < n; ++i) {
    const auto p = source.profile(i);
    out.mf.push_back(sinr_mf_pilot(p, det));
    out.mmse.push_back(sinr_mmse_pilot(p, det));
    out.perfect.push_back(sinr_mmse_perfect(p, det));
  }
  return out;
}

std::vector<AsymptoticRow> asymptotic_sweep(const Scenario& scenario, std::span<const double> alphas,
                                            std::uint64_t seed) {
  check_alpha_grid(alphas);
  const GainSource source = make_gain_source(scenario, seed);
  std::vector<AsymptoticRow> rows;
  for (double alpha : alphas) {
    const auto det = solve_det_equiv(source.distribution, alpha, source.noise_var);
    const ProfileSinrs s = profile_sinrs(source, det);
    rows.push_back({alpha, db(median(s.mf)), db(median(s.mmse)), db(median(s.perfect)), det.eta1, det.eta2,
                    det.suppression, db((det.mean_total_gain - det.suppression) / source.noise_var),
                    db((det.mean_total_gain - det.perfect_suppression) / source.noise_var)});
  }
  return rows;
}

std::vector<MonteCarloPoint> monte_carlo_sweep(const Scenario& scenario, std::span<const double> alphas,
                                               const MonteCarloOptions& options, std::uint64_t seed) {
  check_alpha_grid(alphas);
  if (options.trials < 1) throw InvalidInput("trials must be >= 1");
  if (options.filters.empty()) throw InvalidInput("no filters requested");
  const GainSource source = make_gain_source(scenario, seed);
  const bool idealized = scenario.gain_model == GainModel::idealized;
  const CellLayout layout = hex_layout(idealized ? 1 : scenario.cells, scenario.cost231.cell_radius_m);
  const double noise_var = source.noise_var;
  const Eigen::Index M = options.antennas;

  std::vector<MonteCarloPoint> points;
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    const double alpha = alphas[a];
    const int K = static_cast<int>(users_for_load(alpha, M));
    const auto det = solve_det_equiv(source.distribution, alpha, noise_var);
    const std::size_t F = options.filters.size();

    MonteCarloPoint point{alpha, K, options.filters,
                          std::vector<std::vector<double>>(F, std::vector<double>(options.trials)),
                          std::vector<std::vector<double>>(F, std::vector<double>(options.trials))};

    parallel_for(options.trials, options.threads, [&](int t) {
      const std::uint64_t idx = trial_index(a, t);
      RandomStream drop_rng(seed, "drop", idx), channel_rng(seed, "channel", idx);
      RandomStream noise_rng(seed, "pilot-noise", idx), seq_rng(seed, "pilot-seq", idx);

      Eigen::MatrixXd gains;
      if (idealized) {
        gains = idealized_gain_matrix(scenario.cells, K, scenario.beta_other);
      } else {
        const UserDrop drop = drop_users(layout, K, scenario.cost231.exclusion_radius_m, drop_rng);
        gains = large_scale_gains(drop, scenario.cost231, drop_rng).gains;
      }
      const auto real = draw_channels<double>(gains, M, noise_var, channel_rng);

      EstimateSet<double> est;
      switch (options.estimate) {
        case PilotMode::noiseless_repeated: est = pilot_estimate_noiseless(real); break;
        case PilotMode::noisy_repeated: est = pilot_estimate_noisy(real, options.pilot_snr, noise_rng); break;
        case PilotMode::independent_training: {
          auto pilots = generate_pilot_sequences<double>(K, scenario.cells, seq_rng);
          pilots.pilot_snr = options.pilot_snr;
          est = training_based_estimate(real, pilots, noise_rng);
          break;
        }
      }
      const double theta1 = theta_effective(real).unestimated;
      const double theta2 = estimation_error_power(est, real.gains);
      const auto profile = profile_of(gains);

      for (std::size_t f = 0; f < F; ++f) {
        LinearFilter<double> filter;
        double theory = 0.0;
        switch (options.filters[f]) {
          case FilterKind::matched:
            filter = matched_filter(est);
            theory = sinr_mf_pilot(profile, det);
            break;
          case FilterKind::mmse_pilot:
            filter = mmse_filter_pilot(est, real.gains, theta1, theta2, noise_var);
            theory = sinr_mmse_pilot(profile, det);
            break;
          case FilterKind::mmse_perfect:
            filter = mmse_filter_perfect(real, theta1, noise_var);
            theory = sinr_mmse_perfect(profile, det);
            break;
        }
        point.sinr[f][static_cast<std::size_t>(t)] = empirical_sinr(filter, real).sinr;
        point.theory[f][static_cast<std::size_t>(t)] = theory;
      }
    });
    points.push_back(std::move(point));
  }
  return points;
}

double quantile_type7(std::span<const double> samples, double p) {
  if (samples.empty()) throw InvalidInput("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("quantile level must lie in [0, 1]");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const double h = (static_cast<double>(s.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

double median(std::span<const double> samples) { return quantile_type7(samples, 0.5); }

double five_percentile(std::span<const double> samples) {
  if (samples.size() < 20) throw InvalidInput("five-percentile needs at least 20 samples");
  return quantile_type7(samples, 0.05);
}

double achievable_rate(std::span<const double> sinr) {
  if (sinr.empty()) throw InvalidInput("achievable rate of an empty sample");
  std::vector<double> terms;
  terms.reserve(sinr.size());
  for (double s : sinr) terms.push_back(std::log2(1.0 + s));
  return pairwise_sum(std::span<const double>(terms)) / static_cast<double>(terms.size());
}

double sum_rate(double alpha, int antennas, double sinr) {
  if (!(alpha > 0.0) || antennas < 1) throw InvalidInput("sum rate needs alpha > 0 and M >= 1");
  return alpha * antennas * std::log2(1.0 + sinr);
}

namespace {

std::vector<double> column(const MonteCarloPoint& p, FilterKind kind) {
  for (std::size_t f = 0; f < p.filters.size(); ++f)
    if (p.filters[f] == kind) return p.sinr[f];
  throw InvalidInput(std::string("filter not simulated: ") + filter_name(kind));
}

}  // namespace

std::vector<RateRow> rate_table(const Scenario& scenario, std::span<const double> alphas, int antennas,
                                std::uint64_t seed, const std::optional<MonteCarloOptions>& mc) {
  check_alpha_grid(alphas);
  if (antennas < 1) throw InvalidInput("antenna count must be >= 1");
  const GainSource source = make_gain_source(scenario, seed);
  std::vector<RateRow> rows;
  for (double alpha : alphas) {
    const auto det = solve_det_equiv(source.distribution, alpha, source.noise_var);
    const ProfileSinrs s = profile_sinrs(source, det);
    const int K = static_cast<int>(users_for_load(alpha, antennas));
    const double pre = scenario.rate_prelog(K);
    RateRow row{alpha, pre * achievable_rate(s.mmse), pre * achievable_rate(s.perfect), 0.0, 0.0,
                std::nullopt, std::nullopt};
    row.sum_rate_pilot = alpha * antennas * row.rate_pilot;
    row.sum_rate_perfect = alpha * antennas * row.rate_perfect;
    rows.push_back(row);
  }
  if (mc) {
    MonteCarloOptions opts = *mc;
    opts.antennas = antennas;
    opts.filters = {FilterKind::mmse_pilot, FilterKind::mmse_perfect};
    for (double alpha : alphas)
      if (users_for_load(alpha, antennas) < 3)
        throw InvalidInput("Monte Carlo rates refuse K = round(alpha M) < 3 (alpha " + std::to_string(alpha) + ")");
    const auto points = monte_carlo_sweep(scenario, alphas, opts, seed);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double pre = scenario.rate_prelog(points[i].users);
      rows[i].mc_rate_pilot = pre * achievable_rate(column(points[i], FilterKind::mmse_pilot));
      rows[i].mc_rate_perfect = pre * achievable_rate(column(points[i], FilterKind::mmse_perfect));
    }
  }
  return rows;
}

std::vector<RateGapRow> rate_gap_sweep(const Scenario& scenario, std::span<const double> alphas,
                                       std::span<const double> beta_others) {
  check_alpha_grid(alphas);
  if (scenario.gain_model != GainModel::idealized) throw InvalidInput("rate gap sweep needs an idealized scenario");
  std::vector<RateGapRow> rows;
  for (double alpha : alphas) {
    for (double b : beta_others) {
      if (!(b > 0.0 && b <= 0.1)) throw InvalidInput("beta_other must lie in (0, 0.1]");
      const auto ideal = idealized_gains(scenario.cells, b);
      const auto det = solve_det_equiv(ideal.distribution, alpha, scenario.effective_noise_var());
      const double r_pilot = std::log2(1.0 + sinr_mmse_pilot(ideal.profile, det));
      const double r_perfect = std::log2(1.0 + sinr_mmse_perfect(ideal.profile, det));
      rows.push_back({alpha, b, r_perfect, r_pilot, r_perfect - r_pilot});
    }
  }
  return rows;
}

std::vector<PercentileRow> percentile_sweep(const Scenario& scenario, std::span<const double> alphas,
                                            std::uint64_t seed, const std::optional<MonteCarloOptions>& mc) {
  check_alpha_grid(alphas);
  const GainSource source = make_gain_source(scenario, seed);
  std::vector<PercentileRow> rows;
  for (double alpha : alphas) {
    const auto det = solve_det_equiv(source.distribution, alpha, source.noise_var);
    const ProfileSinrs s = profile_sinrs(source, det);
    auto p5 = [&](const std::vector<double>& v) { return db(v.size() == 1 ? v.front() : five_percentile(v)); };
    rows.push_back({alpha, p5(s.mmse), p5(s.perfect), p5(s.mf), std::nullopt, std::nullopt, std::nullopt});
  }
  if (mc) {
    MonteCarloOptions opts = *mc;
    opts.filters = {FilterKind::matched, FilterKind::mmse_pilot, FilterKind::mmse_perfect};
    const auto points = monte_carlo_sweep(scenario, alphas, opts, seed);
    for (std::size_t i = 0; i < points.size(); ++i) {
      rows[i].mc_mf_db = db(five_percentile(column(points[i], FilterKind::matched)));
      rows[i].mc_pilot_db = db(five_percentile(column(points[i], FilterKind::mmse_pilot)));
      rows[i].mc_perfect_db = db(five_percentile(column(points[i], FilterKind::mmse_perfect)));
    }
  }
  return rows;
}

const char* filter_name(FilterKind kind) {
  switch (kind) {
    case FilterKind::matched: return "mf";
    case FilterKind::mmse_pilot: return "mmse";
    case FilterKind::mmse_perfect: return "mmse-perfect";
  }
  return "?";
}

const char* estimate_name(PilotMode mode) {
  switch (mode) {
    case PilotMode::noiseless_repeated: return "noiseless";
    case PilotMode::noisy_repeated: return "noisy";
    case PilotMode::independent_training: return "training";
  }
  return "?";
}

}  // namespace lsmimo
