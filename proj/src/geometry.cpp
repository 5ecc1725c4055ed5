#include "lsmimo/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "lsmimo/errors.hpp"

namespace lsmimo {

namespace {

const double kSqrt3 = std::sqrt(3.0);

Eigen::Vector2d edge_normal(int k) {
  const double t = std::numbers::pi / 6.0 + k * std::numbers::pi / 3.0;
  return {std::cos(t), std::sin(t)};
}

}  // namespace

double CellLayout::apothem() const { return radius_m * kSqrt3 / 2.0; }

bool CellLayout::contains(int cell, const Eigen::Vector2d& p) const {
  const Eigen::Vector2d local = p - centers.at(static_cast<std::size_t>(cell));
  const double a = apothem();
  for (int k = 0; k < 6; ++k)
    if (edge_normal(k).dot(local) > a) return false;
  return true;
}

CellLayout hex_layout(int cells, double radius_m) {
  if (cells != 1 && cells != 7) throw InvalidInput("hex layout supports B = 1 or B = 7 only");
  if (!(radius_m > 0.0)) throw InvalidInput("cell radius must be > 0");
  CellLayout layout;
  layout.radius_m = radius_m;
  layout.centers.emplace_back(0.0, 0.0);
  if (cells == 7)
    for (int k = 0; k < 6; ++k) layout.centers.push_back(kSqrt3 * radius_m * edge_normal(k));
  return layout;
}

void Cost231Params::validate() const {
  if (!(cell_radius_m > 0.0)) throw InvalidInput("cost231: cell_radius_m must be > 0");
  if (!(carrier_freq_mhz >= 1500.0 && carrier_freq_mhz <= 2000.0))
    throw InvalidInput("cost231: carrier_freq_mhz outside [1500, 2000]");
  if (!(bs_height_m >= 30.0 && bs_height_m <= 200.0))
    throw InvalidInput("cost231: bs_height_m outside [30, 200]");
  if (!(ms_height_m >= 1.0 && ms_height_m <= 10.0))
    throw InvalidInput("cost231: ms_height_m outside [1, 10]");
  if (!(area_correction_db == 0.0 || area_correction_db == 3.0))
    throw InvalidInput("cost231: area_correction_db must be 0 or 3");
  if (!(exclusion_radius_m > 0.0 && exclusion_radius_m < cell_radius_m * kSqrt3 / 2.0))
    throw InvalidInput("cost231: exclusion_radius_m must lie inside the cell");
  if (!(shadowing_sigma_db >= 0.0)) throw InvalidInput("cost231: shadowing_sigma_db must be >= 0");
  if (!(bandwidth_multiplier > 0.0)) throw InvalidInput("cost231: bandwidth_multiplier must be > 0");
  if (!std::isfinite(tx_power_dbm) || !std::isfinite(noise_power_dbm))
    throw InvalidInput("cost231: powers must be finite");
}

double cost231_pathloss_db(double distance_m, const Cost231Params& params) {
  if (!(distance_m >= params.exclusion_radius_m))
    throw InvalidInput("cost231: distance " + std::to_string(distance_m) +
                       " m is inside the exclusion radius");
  const double lf = std::log10(params.carrier_freq_mhz);
  const double lhb = std::log10(params.bs_height_m);
  const double lm = std::log10(11.75 * params.ms_height_m);
  const double a_hm = 3.2 * lm * lm - 4.97;
  return 46.3 + 33.9 * lf - 13.82 * lhb - a_hm + (44.9 - 6.55 * lhb) * std::log10(distance_m / 1000.0) +
         params.area_correction_db;
}

double reference_rx_power_dbm(const Cost231Params& params) {
  return params.tx_power_dbm - cost231_pathloss_db(params.exclusion_radius_m, params);
}

double cost231_noise_var(const Cost231Params& params) {
  params.validate();
  return params.bandwidth_multiplier * from_db(params.noise_power_dbm - reference_rx_power_dbm(params));
}

UserDrop drop_users(const CellLayout& layout, int users, double exclusion_radius_m, RandomStream& rng) {
  if (users < 1) throw InvalidInput("drop_users: K must be >= 1");
  const double r = layout.radius_m, h = layout.apothem();
  UserDrop drop;
  for (int j = 0; j < layout.cells(); ++j) {
    Eigen::Matrix2Xd pos(2, users);
    for (int k = 0; k < users; ++k) {
      Eigen::Vector2d p;
      do {
        p = {rng.uniform(-r, r), rng.uniform(-h, h)};
      } while (!layout.contains(0, p) || p.norm() < exclusion_radius_m);
      pos.col(k) = p + layout.centers[static_cast<std::size_t>(j)];
    }
    drop.positions.push_back(std::move(pos));
  }
  return drop;
}

GainMatrix large_scale_gains(const UserDrop& drop, const Cost231Params& params, RandomStream& rng) {
  params.validate();
  const double ref_pl = cost231_pathloss_db(params.exclusion_radius_m, params);
  GainMatrix out;
  out.gains.resize(drop.cells(), drop.users());
  for (int j = 0; j < drop.cells(); ++j) {
    for (int k = 0; k < drop.users(); ++k) {
      const double d = drop.positions[static_cast<std::size_t>(j)].col(k).norm();
      double g_db = ref_pl - cost231_pathloss_db(d, params);
      if (params.shadowing_sigma_db > 0.0) g_db += params.shadowing_sigma_db * rng.gaussian();
      double g = from_db(g_db);
      if (g > 1.0) {
        g = 1.0;
        ++out.clamped;
      }
      out.gains(j, k) = g;
    }
  }
  return out;
}

FadingDistribution<double> sample_gain_distribution(const CellLayout& layout,
                                                   const Cost231Params& params, int samples,
                                                   RandomStream& rng, int* clamped) {
  if (samples < 1) throw InvalidInput("gain distribution needs at least one sample");
  FadingDistribution<double>::Samples rows(samples, layout.cells());
  int clipped = 0;
  for (int i = 0; i < samples; ++i) {
    const UserDrop drop = drop_users(layout, 1, params.exclusion_radius_m, rng);
    const GainMatrix g = large_scale_gains(drop, params, rng);
    rows.row(i) = g.gains.col(0).transpose();
    clipped += g.clamped;
  }
  if (clamped) *clamped = clipped;
  return FadingDistribution<double>::empirical(std::move(rows));
}

IdealizedGains idealized_gains(int cells, double beta_other) {
  if (cells < 1) throw InvalidInput("idealized gains: B must be >= 1");
  if (!(beta_other > 0.0 && beta_other < 1.0)) throw InvalidInput("idealized gains: beta_other must be in (0, 1)");
  Eigen::VectorXd row = Eigen::VectorXd::Constant(cells, beta_other);
  row(0) = 1.0;
  return {FadingDistribution<double>::point_mass(row),
          UserGainProfile<double>(1.0, row.tail(cells - 1))};
}

Eigen::MatrixXd idealized_gain_matrix(int cells, int users, double beta_other) {
  if (cells < 1 || users < 1) throw InvalidInput("idealized gains: B and K must be >= 1");
  if (!(beta_other > 0.0 && beta_other < 1.0)) throw InvalidInput("idealized gains: beta_other must be in (0, 1)");
  Eigen::MatrixXd g = Eigen::MatrixXd::Constant(cells, users, beta_other);
  g.row(0).setOnes();
  return g;
}

}  // namespace lsmimo
