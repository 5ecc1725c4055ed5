#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lsmimo/channel.hpp"
#include "lsmimo/det_equiv.hpp"
#include "lsmimo/fading.hpp"
#include "lsmimo/scenario.hpp"

namespace lsmimo {

/// Large-scale inputs of a scenario for the deterministic equivalents. Idealized scenarios
/// have a single user profile; cost231 scenarios evaluate every sampled row as a profile.
struct GainSource {
  FadingDistribution<double> distribution;
  std::optional<UserGainProfile<double>> fixed_profile;
  double noise_var;

  int profiles() const;
  UserGainProfile<double> profile(int i) const;
};

/// cost231 rows are drawn from substream ("gain-dist", 0).
GainSource make_gain_source(const Scenario& scenario, std::uint64_t seed);

/// Linear SINR of all three receivers for every profile of the source.
struct ProfileSinrs {
  std::vector<double> mf, mmse, perfect;
};

ProfileSinrs profile_sinrs(const GainSource& source, const DetEqSolution<double>& det);

struct AsymptoticRow {
  double alpha;
  double sinr_mf_db, sinr_mmse_db, sinr_perfect_db;  // medians over profiles
  double eta1, eta2, suppression;
  double inter_mmse_db;     // 10 log10((E[B] - C) / sigma^2)
  double inter_perfect_db;  // same for the perfect-estimate filter
};

std::vector<AsymptoticRow> asymptotic_sweep(const Scenario& scenario, std::span<const double> alphas,
                                            std::uint64_t seed);

struct MonteCarloOptions {
  int antennas = 50;
  int trials = 500;
  std::vector<FilterKind> filters{FilterKind::matched, FilterKind::mmse_pilot, FilterKind::mmse_perfect};
  PilotMode estimate = PilotMode::noiseless_repeated;
  double pilot_snr = 630.957344480193;
  unsigned threads = 0;  // 0 picks hardware concurrency
};

struct MonteCarloPoint {
  double alpha;
  int users;
  std::vector<FilterKind> filters;
  std::vector<std::vector<double>> sinr;    // [filter][trial], linear
  std::vector<std::vector<double>> theory;  // deterministic equivalent for the same user gains
};

/// Trial t at grid point a runs on substreams ("drop" | "channel" | "pilot-noise" | "pilot-seq",
/// a * 2^32 + t), so results do not depend on the thread count.
std::vector<MonteCarloPoint> monte_carlo_sweep(const Scenario& scenario, std::span<const double> alphas,
                                               const MonteCarloOptions& options, std::uint64_t seed);

double quantile_type7(std::span<const double> samples, double p);
double median(std::span<const double> samples);
/// Needs at least 20 samples.
double five_percentile(std::span<const double> samples);
/// Mean of log2(1 + sinr), bits/symbol.
double achievable_rate(std::span<const double> sinr);
double sum_rate(double alpha, int antennas, double sinr);

struct RateRow {
  double alpha;
  double rate_pilot, rate_perfect;          // deterministic equivalent, bits/symbol
  double sum_rate_pilot, sum_rate_perfect;  // alpha M R
  std::optional<double> mc_rate_pilot, mc_rate_perfect;
};

/// Monte Carlo columns are filled when `mc` is given; they refuse K = round(alpha M) < 3.
std::vector<RateRow> rate_table(const Scenario& scenario, std::span<const double> alphas, int antennas,
                                std::uint64_t seed, const std::optional<MonteCarloOptions>& mc);

struct RateGapRow {
  double alpha, beta_other;
  double rate_perfect, rate_pilot, gap;
};

std::vector<RateGapRow> rate_gap_sweep(const Scenario& scenario, std::span<const double> alphas,
                                       std::span<const double> beta_others);

struct PercentileRow {
  double alpha;
  double de_pilot_db, de_perfect_db, de_mf_db;
  std::optional<double> mc_pilot_db, mc_perfect_db, mc_mf_db;
};

std::vector<PercentileRow> percentile_sweep(const Scenario& scenario, std::span<const double> alphas,
                                            std::uint64_t seed, const std::optional<MonteCarloOptions>& mc);

const char* filter_name(FilterKind kind);
const char* estimate_name(PilotMode mode);

}  // namespace lsmimo
