#include "modsafe/cli_app.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "modsafe/config.hpp"
#include "modsafe/csv_io.hpp"
#include "modsafe/version.hpp"

namespace modsafe {

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitAborted = 3;
constexpr int kExitStrict = 4;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_given = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path,
                  "Config file with key = value lines")
      ->check(CLI::ExistingFile);
  cmd->add_option("--set", args.sets,
                  "Override one key, e.g. --set sim.dt=0.0005 (repeatable)");
  cmd->add_option("--out", args.out_dir, "Output directory")
      ->capture_default_str();
  auto* seed_opt = cmd->add_option("--seed", args.seed, "Override sim.seed");
  cmd->callback([&args, seed_opt] { args.seed_given = seed_opt->count() > 0; });
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

SimConfig build_config(const CommonArgs& args,
                       const std::vector<std::string>& extra_sets) {
  std::map<std::string, std::string> kv;
  if (!args.config_path.empty()) kv = parse_key_values(slurp(args.config_path));
  for (const std::string& s : args.sets) apply_assignment(kv, s);
  for (const std::string& s : extra_sets) apply_assignment(kv, s);
  if (args.seed_given)
    apply_assignment(kv, "sim.seed=" + std::to_string(args.seed));
  SimConfig cfg = sim_config_from(kv);
  cfg.validate();
  return cfg;
}

void write_manifest(const fs::path& dir, const std::string& command,
                    const SimConfig& cfg) {
  std::string text;
  text += "manifest.tool = modsafe\n";
  text += "manifest.version = ";
  text += kVersion;
  text += '\n';
  text += "manifest.command = " + command + "\n";
  text += serialize_sim_config(cfg);
  write_text_file((dir / "manifest.txt").string(), text);
}

int cmd_simulate(const CommonArgs& args) {
  const SimConfig cfg = build_config(args, {});
  const fs::path dir(args.out_dir);
  fs::create_directories(dir);

  const SimResult res = simulate(cfg, cfg.x0, cfg.that0);
  write_text_file((dir / "trajectory.csv").string(),
                  trajectory_csv(res.traj));
  write_manifest(dir, "simulate", cfg);

  const RunStats& st = res.stats;
  std::cout << "simulate: law=" << estimator_law_name(cfg.law)
            << " records=" << res.traj.records.size()
            << " final_x_norm=" << st.final_x_norm
            << " min_psi0=" << st.min_psi0 << " delta_hat=" << st.delta_hat
            << " violations=" << st.issf_violations << '\n';
  std::cout << "wrote " << (dir / "trajectory.csv").string() << '\n';
  if (st.aborted) {
    std::cerr << "run aborted at step " << st.abort_step << ": "
              << st.abort_reason << '\n';
    return kExitAborted;
  }
  return kExitOk;
}

int cmd_montecarlo(const CommonArgs& args, int runs_flag,
                   const std::string& laws_flag) {
  std::vector<std::string> extra;
  if (runs_flag > 0) extra.push_back("sim.runs=" + std::to_string(runs_flag));
  if (!laws_flag.empty()) extra.push_back("montecarlo.laws=" + laws_flag);
  const SimConfig cfg = build_config(args, extra);
  const fs::path dir(args.out_dir);
  fs::create_directories(dir);

  bool any_aborted = false;
  for (const EstimatorLaw law : cfg.mc_laws) {
    const MonteCarloSummary summary = monte_carlo(cfg, law);
    const std::string name = estimator_law_name(law);
    write_text_file((dir / ("summary_" + name + ".csv")).string(),
                    summary_csv(summary));
    write_text_file((dir / ("runs_" + name + ".csv")).string(),
                    runs_csv(summary.runs));

    int violations = 0;
    double worst_psi0 = std::numeric_limits<double>::infinity();
    for (const RunStats& st : summary.runs) {
      violations += st.issf_violations;
      worst_psi0 = std::min(worst_psi0, st.min_psi0);
      any_aborted = any_aborted || st.aborted;
    }
    std::cout << "montecarlo: law=" << name << " runs=" << summary.runs.size()
              << " final_ttil_mean=" << summary.ttil_mean.back()
              << " worst_min_psi0=" << worst_psi0
              << " violations=" << violations << '\n';
  }
  write_manifest(dir, "montecarlo", cfg);
  if (any_aborted) {
    std::cerr << "at least one run aborted\n";
    return kExitAborted;
  }
  return kExitOk;
}

int cmd_sweep(const CommonArgs& args, bool strict) {
  const SimConfig cfg = build_config(args, {});
  const fs::path dir(args.out_dir);
  fs::create_directories(dir);

  const std::vector<SweepRecord> recs = uncertainty_sweep(cfg);
  write_text_file((dir / "sweep.csv").string(), sweep_csv(recs));
  write_manifest(dir, "sweep", cfg);
  for (const SweepRecord& r : recs) {
    std::cout << "sweep: law=" << estimator_law_name(r.law) << " that0=["
              << r.that0.transpose() << "] min_psi0=" << r.min_psi0
              << " max_ttil=" << r.max_ttil << '\n';
  }

  if (!strict) return kExitOk;

  // Strict mode checks the adaptation-speed story: at the most uncertain
  // initial estimate, the forgetting-factor estimator should keep a larger
  // barrier margin than plain gradient descent.
  int best = -1;
  double worst_err = -1.0;
  for (std::size_t i = 0; i < cfg.sweep_that0.size(); ++i) {
    const double err = (cfg.sweep_that0[i] - cfg.theta_true).norm();
    if (err > worst_err) {
      worst_err = err;
      best = static_cast<int>(i);
    }
  }
  const Vec& worst_that0 = cfg.sweep_that0[static_cast<std::size_t>(best)];
  double gd_psi0 = std::numeric_limits<double>::quiet_NaN();
  double forget_psi0 = std::numeric_limits<double>::quiet_NaN();
  for (const SweepRecord& r : recs) {
    if ((r.that0 - worst_that0).norm() > 1e-12) continue;
    if (r.law == EstimatorLaw::Gd) gd_psi0 = r.min_psi0;
    if (r.law == EstimatorLaw::RlsForget) forget_psi0 = r.min_psi0;
  }
  if (std::isnan(gd_psi0) || std::isnan(forget_psi0)) {
    std::cerr << "--strict needs both gd and rls_forget in sweep.laws\n";
    return kExitUsage;
  }
  if (!(gd_psi0 < forget_psi0)) {
    std::cerr << "strict check failed: min_psi0 gd=" << gd_psi0
              << " rls_forget=" << forget_psi0 << '\n';
    return kExitStrict;
  }
  std::cout << "strict check passed: min_psi0 gd=" << gd_psi0
            << " < rls_forget=" << forget_psi0 << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Adaptive safety-critical control simulator"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  CommonArgs sim_args;
  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "Single closed-loop run, trajectory CSV");
  add_common(sim_cmd, sim_args);

  CommonArgs mc_args;
  int runs_flag = 0;
  std::string laws_flag;
  CLI::App* mc_cmd = app.add_subcommand(
      "montecarlo", "Batch of runs per estimator law, summary CSVs");
  add_common(mc_cmd, mc_args);
  mc_cmd->add_option("--runs", runs_flag, "Override sim.runs");
  mc_cmd->add_option("--laws", laws_flag,
                     "Override montecarlo.laws, e.g. gd,rls_forget");

  CommonArgs sweep_args;
  bool strict = false;
  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "One run per (law, initial estimate), sweep CSV");
  add_common(sweep_cmd, sweep_args);
  sweep_cmd->add_flag("--strict", strict,
                      "Fail unless rls_forget outperforms gd at the most "
                      "uncertain initial estimate");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("modsafe");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (sim_cmd->parsed()) return cmd_simulate(sim_args);
    if (mc_cmd->parsed()) return cmd_montecarlo(mc_args, runs_flag, laws_flag);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_args, strict);
    std::cerr << "no subcommand given\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace modsafe
