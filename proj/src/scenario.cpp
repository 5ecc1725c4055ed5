#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lsmimo/errors.hpp"
#include "lsmimo/numeric.hpp"
#include "lsmimo/scenario_io.hpp"

namespace lsmimo {

using nlohmann::json;

void Scenario::validate() const {
  if (cells < 1) throw ConfigError("cells must be >= 1", "cells");
  if (alphas.empty()) throw ConfigError("alphas must not be empty", "alphas");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0 && alphas[i] <= 1.5)) throw ConfigError("alpha must lie in (0, 1.5]", "alphas");
    if (i > 0 && !(alphas[i] > alphas[i - 1])) throw ConfigError("alphas must be strictly increasing", "alphas");
  }
  if (antennas < 1) throw ConfigError("antennas must be >= 1", "antennas");
  if (trials < 1) throw ConfigError("trials must be >= 1", "trials");
  if (!std::isfinite(pilot_snr_db)) throw ConfigError("pilot_snr_db must be finite", "pilot.pilot_snr_db");
  if (coherence_time < 1) throw ConfigError("coherence_time must be >= 1", "pilot.coherence_time");
  if (coherence_bandwidth < 1) throw ConfigError("coherence_bandwidth must be >= 1", "pilot.coherence_bandwidth");
  if (gain_samples < 1) throw ConfigError("gain_samples must be >= 1", "gain_samples");
  if (gain_model == GainModel::idealized) {
    if (!(beta_other > 0.0 && beta_other < 1.0))
      throw ConfigError("beta_other must lie in (0, 1)", "gain_model.beta_other");
    if (!noise_var) throw ConfigError("idealized scenarios need noise_var", "noise_var");
    if (!(*noise_var > 0.0) || !std::isfinite(*noise_var)) throw ConfigError("noise_var must be > 0", "noise_var");
  } else {
    if (noise_var) throw ConfigError("cost231 scenarios derive noise_var; remove the key", "noise_var");
    if (cells != 1 && cells != 7) throw ConfigError("cost231 layouts support 1 or 7 cells", "cells");
    try {
      cost231.validate();
    } catch (const InvalidInput& e) {
      throw ConfigError(e.what(), "gain_model");
    }
  }
}

double Scenario::effective_noise_var() const {
  return gain_model == GainModel::idealized ? *noise_var : cost231_noise_var(cost231);
}

double Scenario::pilot_snr() const { return from_db(pilot_snr_db); }

double Scenario::rate_prelog(int users) const {
  if (!training_overhead) return 1.0;
  return std::max(0.0, 1.0 - static_cast<double>(users) / (static_cast<double>(coherence_time) * coherence_bandwidth));
}

namespace {

const char* estimate_key(PilotMode m) {
  switch (m) {
    case PilotMode::noiseless_repeated: return "noiseless";
    case PilotMode::noisy_repeated: return "noisy";
    case PilotMode::independent_training: return "training";
  }
  return "noiseless";
}

PilotMode parse_estimate(const std::string& s) {
  if (s == "noiseless") return PilotMode::noiseless_repeated;
  if (s == "noisy") return PilotMode::noisy_repeated;
  if (s == "training") return PilotMode::independent_training;
  throw ConfigError("estimate must be noiseless, noisy or training", "pilot.estimate");
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object", where);
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "'", where.empty() ? key : where + "." + key);
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  const std::string field = where.empty() ? key : where + "." + key;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("wrong type for '" + field + "'", field);
  }
}

std::string line_context(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

Scenario parse_scenario_text(std::string_view text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": parse error at " + line_context(text, e.byte == 0 ? 0 : e.byte - 1));
  }
  reject_unknown(doc, {"name", "cells", "gain_model", "noise_var", "alphas", "antennas", "trials", "pilot",
                       "gain_samples"},
                 "");
  Scenario s;
  read(doc, "name", s.name, "");
  if (!doc.contains("cells")) throw ConfigError("missing key 'cells'", "cells");
  read(doc, "cells", s.cells, "");
  read(doc, "alphas", s.alphas, "");
  read(doc, "antennas", s.antennas, "");
  read(doc, "trials", s.trials, "");
  read(doc, "gain_samples", s.gain_samples, "");
  if (doc.contains("noise_var")) {
    double v = 0.0;
    read(doc, "noise_var", v, "");
    s.noise_var = v;
  }

  if (!doc.contains("gain_model")) throw ConfigError("missing key 'gain_model'", "gain_model");
  const json& gm = doc.at("gain_model");
  if (!gm.is_object() || !gm.contains("kind")) throw ConfigError("gain_model needs a kind", "gain_model.kind");
  std::string kind;
  read(gm, "kind", kind, "gain_model");
  if (kind == "idealized") {
    reject_unknown(gm, {"kind", "beta_other"}, "gain_model");
    s.gain_model = GainModel::idealized;
    if (!gm.contains("beta_other")) throw ConfigError("missing key 'beta_other'", "gain_model.beta_other");
    read(gm, "beta_other", s.beta_other, "gain_model");
  } else if (kind == "cost231") {
    reject_unknown(gm, {"kind", "cell_radius_m", "tx_power_dbm", "noise_power_dbm", "carrier_freq_mhz",
                        "bs_height_m", "ms_height_m", "area_correction_db", "exclusion_radius_m",
                        "shadowing_sigma_db", "bandwidth_multiplier"},
                   "gain_model");
    s.gain_model = GainModel::cost231;
    auto& c = s.cost231;
    read(gm, "cell_radius_m", c.cell_radius_m, "gain_model");
    read(gm, "tx_power_dbm", c.tx_power_dbm, "gain_model");
    read(gm, "noise_power_dbm", c.noise_power_dbm, "gain_model");
    read(gm, "carrier_freq_mhz", c.carrier_freq_mhz, "gain_model");
    read(gm, "bs_height_m", c.bs_height_m, "gain_model");
    read(gm, "ms_height_m", c.ms_height_m, "gain_model");
    read(gm, "area_correction_db", c.area_correction_db, "gain_model");
    read(gm, "exclusion_radius_m", c.exclusion_radius_m, "gain_model");
    read(gm, "shadowing_sigma_db", c.shadowing_sigma_db, "gain_model");
    read(gm, "bandwidth_multiplier", c.bandwidth_multiplier, "gain_model");
  } else {
    throw ConfigError("gain_model.kind must be idealized or cost231", "gain_model.kind");
  }

  if (doc.contains("pilot")) {
    const json& p = doc.at("pilot");
    reject_unknown(p, {"estimate", "pilot_snr_db", "coherence_time", "coherence_bandwidth", "training_overhead"},
                   "pilot");
    std::string est = estimate_key(s.estimate);
    read(p, "estimate", est, "pilot");
    s.estimate = parse_estimate(est);
    read(p, "pilot_snr_db", s.pilot_snr_db, "pilot");
    read(p, "coherence_time", s.coherence_time, "pilot");
    read(p, "coherence_bandwidth", s.coherence_bandwidth, "pilot");
    read(p, "training_overhead", s.training_overhead, "pilot");
  }
  s.validate();
  return s;
}

Scenario parse_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open scenario file " + path.string(), "scenario");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str(), path.string());
}

std::string serialize_scenario(const Scenario& s) {
  json doc;
  doc["name"] = s.name;
  doc["cells"] = s.cells;
  doc["alphas"] = s.alphas;
  doc["antennas"] = s.antennas;
  doc["trials"] = s.trials;
  doc["gain_samples"] = s.gain_samples;
  if (s.noise_var) doc["noise_var"] = *s.noise_var;
  if (s.gain_model == GainModel::idealized) {
    doc["gain_model"] = {{"kind", "idealized"}, {"beta_other", s.beta_other}};
  } else {
    const auto& c = s.cost231;
    doc["gain_model"] = {{"kind", "cost231"},
                         {"cell_radius_m", c.cell_radius_m},
                         {"tx_power_dbm", c.tx_power_dbm},
                         {"noise_power_dbm", c.noise_power_dbm},
                         {"carrier_freq_mhz", c.carrier_freq_mhz},
                         {"bs_height_m", c.bs_height_m},
                         {"ms_height_m", c.ms_height_m},
                         {"area_correction_db", c.area_correction_db},
                         {"exclusion_radius_m", c.exclusion_radius_m},
                         {"shadowing_sigma_db", c.shadowing_sigma_db},
                         {"bandwidth_multiplier", c.bandwidth_multiplier}};
  }
  doc["pilot"] = {{"estimate", estimate_key(s.estimate)},
                  {"pilot_snr_db", s.pilot_snr_db},
                  {"coherence_time", s.coherence_time},
                  {"coherence_bandwidth", s.coherence_bandwidth},
                  {"training_overhead", s.training_overhead}};
  return doc.dump(2) + "\n";
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

std::string scenario_hash(const Scenario& scenario) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(serialize_scenario(scenario))));
  return buf;
}

}  // namespace lsmimo
