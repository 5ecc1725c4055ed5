#pragma once

// Large-scale fading inputs: constant-gain (idealized) scenarios and the hexagonal
// seven-cell layout with COST231-Hata path loss. All gains are seen from base station 0.

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "lsmimo/fading.hpp"
#include "lsmimo/rng.hpp"

namespace lsmimo {

/// Flat-topped hexagons: vertices at 0, 60, ..., 300 degrees, circumradius R. The first
/// ring of neighbours sits at distance sqrt(3) R in the directions 30 + 60k degrees.
struct CellLayout {
  double radius_m = 1000.0;
  std::vector<Eigen::Vector2d> centers;

  int cells() const { return static_cast<int>(centers.size()); }
  double apothem() const;
  /// Closed hexagon test; points on a shared edge belong to both cells.
  bool contains(int cell, const Eigen::Vector2d& p) const;
};

CellLayout hex_layout(int cells = 7, double radius_m = 1000.0);

struct Cost231Params {
  double cell_radius_m = 1000.0;
  double tx_power_dbm = 23.0;
  double noise_power_dbm = -174.0;
  double carrier_freq_mhz = 1900.0;
  double bs_height_m = 30.0;
  double ms_height_m = 1.5;
  double area_correction_db = 3.0;  // C_m, metropolitan centre
  double exclusion_radius_m = 35.0;
  double shadowing_sigma_db = 0.0;  // 0 disables shadowing
  double bandwidth_multiplier = 1.0;

  /// Throws InvalidInput outside the COST231-Hata validity ranges.
  void validate() const;
};

/// 46.3 + 33.9 log f - 13.82 log hb - a(hm) + (44.9 - 6.55 log hb) log d_km + C_m,
/// with the large-city mobile correction a(hm) = 3.2 (log 11.75 hm)^2 - 4.97.
double cost231_pathloss_db(double distance_m, const Cost231Params& params);

/// Received power at the exclusion radius; every gain is expressed relative to it.
double reference_rx_power_dbm(const Cost231Params& params);

/// sigma^2 = N * bandwidth_multiplier / P_ref, linear.
double cost231_noise_var(const Cost231Params& params);

struct UserDrop {
  std::vector<Eigen::Matrix2Xd> positions;  // per cell, 2 x K absolute coordinates in metres
  int users() const { return positions.empty() ? 0 : static_cast<int>(positions.front().cols()); }
  int cells() const { return static_cast<int>(positions.size()); }
};

/// K users per cell, uniform over each hexagon minus the exclusion disk around its base
/// station (rejection sampling from the bounding box).
UserDrop drop_users(const CellLayout& layout, int users, double exclusion_radius_m, RandomStream& rng);

struct GainMatrix {
  Eigen::MatrixXd gains;  // B x K, beta_jk towards base station 0
  int clamped = 0;        // entries clipped to 1 (only possible with shadowing)
};

GainMatrix large_scale_gains(const UserDrop& drop, const Cost231Params& params, RandomStream& rng);

/// n independent rows (B_1, ..., B_B): one user per cell per row, as seen by base station 0.
FadingDistribution<double> sample_gain_distribution(const CellLayout& layout,
                                                   const Cost231Params& params, int samples,
                                                   RandomStream& rng, int* clamped = nullptr);

struct IdealizedGains {
  FadingDistribution<double> distribution;
  UserGainProfile<double> profile;
};

/// beta_1k = 1 and beta_jk = beta_other for j >= 2.
IdealizedGains idealized_gains(int cells, double beta_other);

/// The same constants as a B x K gain matrix.
Eigen::MatrixXd idealized_gain_matrix(int cells, int users, double beta_other);

}  // namespace lsmimo
