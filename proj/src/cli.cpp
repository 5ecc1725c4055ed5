#include "lsmimo/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lsmimo/csv.hpp"
#include "lsmimo/errors.hpp"
#include "lsmimo/experiments.hpp"
#include "lsmimo/scenario_io.hpp"
#include "lsmimo/validate.hpp"

namespace lsmimo {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string command;
  std::string scenario_path;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::vector<double> alphas;
  std::optional<int> antennas;
  std::optional<int> trials;
  std::optional<std::string> estimate;
  std::vector<std::string> filters;
  std::vector<double> beta_others{0.001, 0.01, 0.02, 0.05, 0.1};
  std::optional<unsigned> threads;
};

double db(double x) { return 10.0 * std::log10(x); }

PilotMode parse_mode(const std::string& s) {
  if (s == "noiseless") return PilotMode::noiseless_repeated;
  if (s == "noisy") return PilotMode::noisy_repeated;
  if (s == "training") return PilotMode::independent_training;
  throw ConfigError("--estimate must be noiseless, noisy or training", "estimate");
}

FilterKind parse_filter(const std::string& s) {
  if (s == "mf") return FilterKind::matched;
  if (s == "mmse") return FilterKind::mmse_pilot;
  if (s == "mmse-perfect") return FilterKind::mmse_perfect;
  throw ConfigError("--filters entries must be mf, mmse or mmse-perfect", "filters");
}

class Runner {
 public:
  Runner(Options opts, std::ostream& out) : opts_(std::move(opts)), out_(out) {}

  int run() {
    if (opts_.command == "validate") return validate();
    if (opts_.scenario_path.empty()) throw ConfigError("--scenario is required", "scenario");
    scenario_ = parse_scenario(opts_.scenario_path);
    apply_overrides();
    fs::create_directories(opts_.out_dir);
    if (opts_.command == "asymptotic") asymptotic();
    else if (opts_.command == "montecarlo") montecarlo();
    else if (opts_.command == "percentile") percentile();
    else if (opts_.command == "rates") rates();
    else if (opts_.command == "rategap") rategap();
    write_manifest();
    return kExitOk;
  }

 private:
  void apply_overrides() {
    if (!opts_.alphas.empty()) {
      scenario_.alphas = opts_.alphas;
      overrides_["alpha"] = opts_.alphas;
    }
    if (opts_.antennas) {
      scenario_.antennas = *opts_.antennas;
      overrides_["antennas"] = *opts_.antennas;
    }
    if (opts_.trials) {
      scenario_.trials = *opts_.trials;
      overrides_["trials"] = *opts_.trials;
    }
    if (opts_.estimate) {
      scenario_.estimate = parse_mode(*opts_.estimate);
      overrides_["estimate"] = *opts_.estimate;
    }
    if (!opts_.filters.empty()) overrides_["filters"] = opts_.filters;
    if (opts_.command == "rategap") overrides_["beta_other"] = opts_.beta_others;
    scenario_.validate();
  }

  MonteCarloOptions mc_options() const {
    MonteCarloOptions o;
    o.antennas = scenario_.antennas;
    o.trials = scenario_.trials;
    o.estimate = scenario_.estimate;
    o.pilot_snr = scenario_.pilot_snr();
    if (opts_.threads) o.threads = *opts_.threads;
    if (!opts_.filters.empty()) {
      o.filters.clear();
      for (const auto& f : opts_.filters) o.filters.push_back(parse_filter(f));
    }
    return o;
  }

  CsvMetadata meta(int trials) const {
    return {opts_.command, scenario_.name, scenario_hash(scenario_), opts_.seed, trials};
  }

  void emit(const std::string& file, const CsvTable& table) {
    const fs::path path = fs::path(opts_.out_dir) / file;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path.string(), "out");
    table.write(f);
    outputs_.push_back(file);
    out_ << "wrote " << path.string() << " (" << table.rows() << " rows)\n";
  }

  void asymptotic() {
    const auto rows = asymptotic_sweep(scenario_, scenario_.alphas, opts_.seed);
    CsvTable t(meta(0), {{"alpha", "ratio"},
                         {"sinr_mf_pilot_db", "dB"},
                         {"sinr_mmse_pilot_db", "dB"},
                         {"sinr_mmse_perfect_db", "dB"},
                         {"eta1", "linear"},
                         {"eta2", "linear"},
                         {"suppression", "linear"},
                         {"inter_mmse_over_noise_db", "dB"},
                         {"inter_perfect_over_noise_db", "dB"}});
    for (const auto& r : rows)
      t.add_row({r.alpha, r.sinr_mf_db, r.sinr_mmse_db, r.sinr_perfect_db, r.eta1, r.eta2, r.suppression,
                 r.inter_mmse_db, r.inter_perfect_db});
    emit("asymptotic.csv", t);
  }

  void montecarlo() {
    const auto opts = mc_options();
    const auto points = monte_carlo_sweep(scenario_, scenario_.alphas, opts, opts_.seed);
    std::vector<CsvColumn> cols{{"alpha", "ratio"}, {"users", "count"}};
    for (FilterKind f : opts.filters) {
      const std::string n = filter_name(f);
      cols.push_back({n + "_median_db", "dB"});
      cols.push_back({n + "_theory_median_db", "dB"});
      cols.push_back({n + "_p5_db", "dB"});
    }
    CsvTable summary(meta(opts.trials), cols);
    std::vector<CsvColumn> scols{{"alpha", "ratio"}, {"trial", "index"}};
    for (FilterKind f : opts.filters) scols.push_back({std::string(filter_name(f)) + "_sinr_db", "dB"});
    CsvTable samples(meta(opts.trials), scols);
    for (const auto& p : points) {
      std::vector<std::optional<double>> row{p.alpha, static_cast<double>(p.users)};
      for (std::size_t f = 0; f < p.filters.size(); ++f) {
        row.push_back(db(median(p.sinr[f])));
        row.push_back(db(median(p.theory[f])));
        row.push_back(p.sinr[f].size() >= 20 ? std::optional<double>(db(five_percentile(p.sinr[f]))) : std::nullopt);
      }
      summary.add_row(row);
      for (int t = 0; t < opts.trials; ++t) {
        std::vector<std::optional<double>> srow{p.alpha, static_cast<double>(t)};
        for (std::size_t f = 0; f < p.filters.size(); ++f) srow.push_back(db(p.sinr[f][static_cast<std::size_t>(t)]));
        samples.add_row(srow);
      }
    }
    emit("montecarlo.csv", summary);
    emit("montecarlo_samples.csv", samples);
  }

  void percentile() {
    std::optional<MonteCarloOptions> mc;
    if (opts_.trials || opts_.antennas) mc = mc_options();
    const auto rows = percentile_sweep(scenario_, scenario_.alphas, opts_.seed, mc);
    CsvTable t(meta(mc ? mc->trials : 0), {{"alpha", "ratio"},
                                           {"p5_mmse_pilot_db", "dB"},
                                           {"p5_mmse_perfect_db", "dB"},
                                           {"p5_mf_pilot_db", "dB"},
                                           {"mc_p5_mmse_pilot_db", "dB"},
                                           {"mc_p5_mmse_perfect_db", "dB"},
                                           {"mc_p5_mf_pilot_db", "dB"}});
    for (const auto& r : rows)
      t.add_row({r.alpha, r.de_pilot_db, r.de_perfect_db, r.de_mf_db, r.mc_pilot_db, r.mc_perfect_db, r.mc_mf_db});
    emit("percentile.csv", t);
  }

  void rates() {
    std::optional<MonteCarloOptions> mc;
    if (opts_.trials) mc = mc_options();
    const auto rows = rate_table(scenario_, scenario_.alphas, scenario_.antennas, opts_.seed, mc);
    CsvTable t(meta(mc ? mc->trials : 0), {{"alpha", "ratio"},
                                           {"rate_pilot", "bits/symbol"},
                                           {"rate_perfect", "bits/symbol"},
                                           {"sum_rate_pilot", "bits/symbol"},
                                           {"sum_rate_perfect", "bits/symbol"},
                                           {"mc_rate_pilot", "bits/symbol"},
                                           {"mc_rate_perfect", "bits/symbol"}});
    for (const auto& r : rows)
      t.add_row({r.alpha, r.rate_pilot, r.rate_perfect, r.sum_rate_pilot, r.sum_rate_perfect, r.mc_rate_pilot,
                 r.mc_rate_perfect});
    emit("rates.csv", t);
  }

  void rategap() {
    const auto rows = rate_gap_sweep(scenario_, scenario_.alphas, opts_.beta_others);
    CsvTable t(meta(0), {{"alpha", "ratio"},
                         {"beta_other", "linear"},
                         {"rate_perfect", "bits/symbol"},
                         {"rate_pilot", "bits/symbol"},
                         {"rate_gap", "bits/symbol"}});
    for (const auto& r : rows) t.add_row({r.alpha, r.beta_other, r.rate_perfect, r.rate_pilot, r.gap});
    emit("rategap.csv", t);
  }

  int validate() {
    const auto checks = run_property_suite(opts_.seed);
    bool ok = true;
    for (const auto& c : checks) {
      out_ << (c.passed ? "PASS " : "FAIL ") << c.name;
      if (!c.detail.empty()) out_ << "  [" << c.detail << "]";
      out_ << '\n';
      ok = ok && c.passed;
    }
    return ok ? kExitOk : kExitCheckFailed;
  }

  void write_manifest() {
    nlohmann::json m;
    m["command"] = opts_.command;
    m["scenario_path"] = opts_.scenario_path;
    m["scenario_hash"] = scenario_hash(scenario_);
    m["scenario"] = nlohmann::json::parse(serialize_scenario(scenario_));
    m["seed"] = opts_.seed;
    m["out"] = opts_.out_dir;
    m["overrides"] = overrides_;
    m["outputs"] = outputs_;
    m["csv_schema"] = kCsvSchema;
    std::ofstream f(fs::path(opts_.out_dir) / "manifest.json", std::ios::binary);
    f << m.dump(2) << '\n';
  }

  Options opts_;
  std::ostream& out_;
  Scenario scenario_;
  nlohmann::json overrides_ = nlohmann::json::object();
  std::vector<std::string> outputs_;
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Uplink multi-cell MMSE receivers under pilot contamination"};
  app.require_subcommand(1);
  Options opts;

  auto common = [&](CLI::App* sub, bool needs_scenario) {
    if (needs_scenario) sub->add_option("--scenario", opts.scenario_path, "Scenario JSON file")->required();
    sub->add_option("--seed", opts.seed, "Master seed (u64)");
    sub->add_option("--out", opts.out_dir, "Output directory");
    sub->add_option("--threads", opts.threads, "Worker threads (0 = all cores)");
  };
  auto sweep = [&](CLI::App* sub) {
    sub->add_option("--alpha", opts.alphas, "Loading factors K/M")->delimiter(',');
  };
  auto mc = [&](CLI::App* sub) {
    sub->add_option("--antennas", opts.antennas, "Base-station antennas M");
    sub->add_option("--trials", opts.trials, "Monte Carlo trials per point");
    sub->add_option("--estimate", opts.estimate, "noiseless | noisy | training")
        ->check(CLI::IsMember({"noiseless", "noisy", "training"}));
    sub->add_option("--filters", opts.filters, "mf,mmse,mmse-perfect")
        ->delimiter(',')
        ->check(CLI::IsMember({"mf", "mmse", "mmse-perfect"}));
  };

  auto* asym = app.add_subcommand("asymptotic", "Deterministic-equivalent SINR sweep");
  common(asym, true);
  sweep(asym);
  auto* montecarlo = app.add_subcommand("montecarlo", "Finite-M Monte Carlo SINR sweep");
  common(montecarlo, true);
  sweep(montecarlo);
  mc(montecarlo);
  auto* pct = app.add_subcommand("percentile", "Five-percentile SINR");
  common(pct, true);
  sweep(pct);
  mc(pct);
  auto* rates = app.add_subcommand("rates", "Achievable and sum rates");
  common(rates, true);
  sweep(rates);
  mc(rates);
  auto* gap = app.add_subcommand("rategap", "Perfect-minus-pilot rate gap");
  common(gap, true);
  sweep(gap);
  gap->add_option("--beta-other", opts.beta_others, "Other-cell gains")->delimiter(',');
  auto* val = app.add_subcommand("validate", "Run the invariant suite");
  common(val, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  for (auto* sub : app.get_subcommands()) opts.command = sub->get_name();

  try {
    return Runner(opts, out).run();
  } catch (const ConfigError& e) {
    err << "config error";
    if (!e.field().empty()) err << " [" << e.field() << "]";
    err << ": " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidInput& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ConvergenceError& e) {
    err << "convergence error: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const DegenerateRegime& e) {
    err << "convergence error: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace lsmimo
