// One PASS/FAIL line per acceptance criterion. Exit status is nonzero if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "lsmimo/experiments.hpp"
#include "lsmimo/scenario_io.hpp"
#include "lsmimo/validate.hpp"

using namespace lsmimo;

namespace {

const std::filesystem::path kScenarios = std::filesystem::path(LSMIMO_SOURCE_DIR) / "scenarios";
constexpr std::uint64_t kSeed = 1;

Scenario load(const char* file) { return parse_scenario(kScenarios / file); }

bool in(double v, double lo, double hi) { return v >= lo && v <= hi; }

std::string fmt(double v, int digits = 3) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

int failures = 0;

void report(int id, bool ok, const std::string& detail, std::chrono::steady_clock::time_point start) {
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%s #%d  %s  (%.1f s)\n", ok ? "PASS" : "FAIL", id, detail.c_str(), secs);
  std::fflush(stdout);
  failures += !ok;
}

AsymptoticRow asym_at(const Scenario& s, double alpha) {
  const std::vector<double> a{alpha};
  return asymptotic_sweep(s, a, kSeed).front();
}

void criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = asym_at(load("idealized-01.json"), 0.5);
  const double gain = r.sinr_mmse_db - r.sinr_mf_db;
  report(1, in(gain, 6.0, 8.0), "MMSE-pilot minus MF-pilot = " + fmt(gain) + " dB, want [6, 8]", t0);
}

void criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = asym_at(load("idealized-01.json"), 0.5);
  const double loss = r.sinr_perfect_db - r.sinr_mmse_db;
  report(2, in(loss, 2.0, 4.0), "MMSE-perfect minus MMSE-pilot = " + fmt(loss) + " dB, want [2, 4]", t0);
}

void criterion3() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = asym_at(load("idealized-1.json"), 0.5);
  const double loss = r.sinr_perfect_db - r.sinr_mmse_db;
  const double near_mf = r.sinr_mmse_db - r.sinr_mf_db;
  report(3, in(loss, 3.0, 5.0) && std::abs(near_mf) <= 1.5,
         "perfect minus pilot = " + fmt(loss) + " dB, want [3, 5]; pilot minus MF = " + fmt(near_mf) +
             " dB, want |.| <= 1.5",
         t0);
}

void criterion4() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> alphas;
  for (int i = 1; i <= 120; ++i) alphas.push_back(0.01 * i);
  const auto rows = rate_table(load("idealized-01.json"), alphas, 50, kSeed, std::nullopt);
  std::size_t best = 0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].sum_rate_pilot > rows[best].sum_rate_pilot) best = i;
  const double at08 = rows[79].sum_rate_pilot;
  const bool interior = best > 0 && best + 1 < rows.size();
  report(4, in(at08, 83.0, 93.0) && interior,
         "sum rate at alpha 0.8 = " + fmt(at08, 2) + " bits/symbol, want [83, 93]; argmax alpha = " +
             fmt(rows[best].alpha, 2) + (interior ? " (interior)" : " (on the boundary)"),
         t0);
}

void criterion5() {
  const auto t0 = std::chrono::steady_clock::now();
  const Scenario s = load("idealized-01.json");
  const std::vector<double> alphas{0.2, 0.5, 1.0};
  double worst = 0.0;
  std::string where;
  for (PilotMode mode : {PilotMode::noiseless_repeated, PilotMode::noisy_repeated, PilotMode::independent_training}) {
    MonteCarloOptions o;
    o.antennas = 50;
    o.trials = 500;
    o.estimate = mode;
    o.pilot_snr = s.pilot_snr();
    for (const auto& p : monte_carlo_sweep(s, alphas, o, kSeed)) {
      for (std::size_t f = 0; f < p.filters.size(); ++f) {
        const double dev = std::abs(to_db(median(p.sinr[f])) - to_db(p.theory[f].front()));
        if (dev > worst) {
          worst = dev;
          where = std::string(estimate_name(mode)) + "/" + filter_name(p.filters[f]) + " at alpha " + fmt(p.alpha, 1);
        }
      }
    }
  }
  report(5, worst <= 0.5, "max |median MC - DE| = " + fmt(worst) + " dB (" + where + "), want <= 0.5", t0);
}

void criterion6() {
  const auto t0 = std::chrono::steady_clock::now();
  const Scenario s = load("cost231-7cell.json");
  const std::vector<double> alphas{0.1, 0.5, 1.0};
  const double want_pilot[] = {4.7, 2.7, 1.9}, want_perfect[] = {6.0, 3.4, 2.2};
  MonteCarloOptions o;
  o.antennas = 50;
  o.trials = s.trials;
  const auto rows = rate_table(s, alphas, 50, kSeed, o);
  bool ok = true;
  std::string detail;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const bool de = std::abs(r.rate_pilot - want_pilot[i]) <= 0.5 && std::abs(r.rate_perfect - want_perfect[i]) <= 0.5 &&
                    r.rate_perfect > r.rate_pilot;
    const bool mc = std::abs(*r.mc_rate_pilot - want_pilot[i]) <= 0.5 &&
                    std::abs(*r.mc_rate_perfect - want_perfect[i]) <= 0.5 && *r.mc_rate_perfect > *r.mc_rate_pilot;
    ok = ok && de && mc;
    detail += "alpha " + fmt(r.alpha, 1) + ": DE (" + fmt(r.rate_pilot, 2) + ", " + fmt(r.rate_perfect, 2) + ") MC (" +
              fmt(*r.mc_rate_pilot, 2) + ", " + fmt(*r.mc_rate_perfect, 2) + ") want (" + fmt(want_pilot[i], 1) +
              ", " + fmt(want_perfect[i], 1) + ") +-0.5; ";
  }
  report(6, ok, detail, t0);
}

void criterion7() {
  const auto t0 = std::chrono::steady_clock::now();
  const Scenario s = load("cost231-7cell.json");
  const std::vector<double> alphas{0.2, 0.5, 1.0};
  MonteCarloOptions o;
  o.antennas = 50;
  o.trials = s.trials;
  const auto rows = percentile_sweep(s, alphas, kSeed, o);
  const auto& last = rows.back();
  bool ok = in(last.de_pilot_db, -11.0, -7.0) && in(*last.mc_pilot_db, -11.0, -7.0);
  std::string detail = "alpha 1 pilot p5: DE " + fmt(last.de_pilot_db, 2) + " MC " + fmt(*last.mc_pilot_db, 2) +
                       " dB, want [-11, -7]; perfect-minus-pilot p5 gap (want <= 6):";
  for (const auto& r : rows) {
    const double de = r.de_perfect_db - r.de_pilot_db, mc = *r.mc_perfect_db - *r.mc_pilot_db;
    ok = ok && de <= 6.0 && mc <= 6.0;
    detail += " alpha " + fmt(r.alpha, 1) + " DE " + fmt(de, 2) + " MC " + fmt(mc, 2) + ";";
  }
  report(7, ok, detail, t0);
}

void criterion8() {
  const auto t0 = std::chrono::steady_clock::now();
  const Scenario s = load("cost231-7cell.json");
  const std::vector<double> alphas{0.1, 0.5, 1.0};
  const auto rows = asymptotic_sweep(s, alphas, kSeed);
  const auto& r = rows[1];
  const bool ok = in(r.inter_mmse_db, 35.0, 41.0) && in(r.inter_perfect_db, 33.0, 39.0) &&
                  r.inter_mmse_db >= r.inter_perfect_db - 3.0;
  std::string detail = "alpha 0.5 over " + std::to_string(s.gain_samples) + " drops: 10log10(E[B]-C) = " +
                       fmt(r.inter_mmse_db, 2) + " dB want [35, 41], perfect = " + fmt(r.inter_perfect_db, 2) +
                       " dB want [33, 39]; other alphas:";
  for (const auto& o : rows) detail += " " + fmt(o.alpha, 1) + " (" + fmt(o.inter_mmse_db, 2) + ", " + fmt(o.inter_perfect_db, 2) + ")";
  report(8, ok, detail, t0);
}

void criterion9() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto checks = run_property_suite(kSeed);
  std::string failed;
  for (const auto& c : checks)
    if (!c.passed) failed += " " + c.name + " [" + c.detail + "]";
  report(9, failed.empty(),
         std::to_string(checks.size()) + " property checks" + (failed.empty() ? ", all pass" : "; failing:" + failed), t0);
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
