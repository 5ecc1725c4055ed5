#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lsmimo/channel.hpp"
#include "lsmimo/geometry.hpp"

namespace lsmimo {

enum class GainModel { idealized, cost231 };

struct Scenario {
  std::string name;
  int cells = 7;
  GainModel gain_model = GainModel::idealized;
  double beta_other = 0.01;              // idealized only
  std::optional<double> noise_var;       // idealized only; derived for cost231
  Cost231Params cost231;                 // cost231 only
  std::vector<double> alphas{0.5};
  int antennas = 50;
  int trials = 500;
  PilotMode estimate = PilotMode::noiseless_repeated;
  double pilot_snr_db = 28.0;
  int coherence_time = 1;      // T_c, symbols
  int coherence_bandwidth = 1; // N_c, subcarriers
  bool training_overhead = false;
  int gain_samples = 10000;    // drops behind the cost231 gain distribution

  /// Throws ConfigError naming the offending field.
  void validate() const;
  double effective_noise_var() const;
  double pilot_snr() const;
  /// (1 - K / (T_c N_c)) when training overhead is enabled, 1 otherwise.
  double rate_prelog(int users) const;
};

}  // namespace lsmimo
