// Command-line front end: run, lodo, theory, sweep.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fedgala/config.hpp"
#include "fedgala/errors.hpp"
#include "fedgala/io.hpp"
#include "fedgala/protocol.hpp"

namespace fs = std::filesystem;
using namespace fedgala;

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::size_t jobs = 1;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required) {
  auto* opt = cmd->add_option("--config", flags.config_path, "experiment config file");
  if (config_required) opt->required();
  cmd->add_option("--seed", flags.seed, "override the config seed");
  cmd->add_option("--out", flags.out, "output directory")->capture_default_str();
  cmd->add_option("--jobs", flags.jobs, "worker threads for client training")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

ExperimentConfig resolve(const CommonFlags& flags) {
  ExperimentConfig cfg = flags.config_path.empty() ? ExperimentConfig{} : load_config(flags.config_path);
  if (flags.seed) cfg.seed = *flags.seed;
  cfg.validate();
  return cfg;
}

fs::path prepare_out(const CommonFlags& flags, const ExperimentConfig& cfg) {
  const fs::path out(flags.out);
  fs::create_directories(out);
  write_resolved_config(out, cfg);
  return out;
}

void print_probes(const std::vector<ExperimentResult>& results) {
  for (const auto& r : results)
    for (const auto& p : r.probes)
      std::printf("target=%zu fraction=%s accuracy=%s\n", p.target_domain,
                  format_real(p.labeled_fraction).c_str(), format_real(p.accuracy).c_str());
}

int cmd_run(const CommonFlags& flags) {
  const ExperimentConfig cfg = resolve(flags);
  const fs::path out = prepare_out(flags, cfg);
  const DomainFamily family = make_family(cfg);
  if (cfg.write_domains) {
    std::ofstream f(out / "domains.csv", std::ios::binary);
    write_family_csv(f, family);
  }
  const std::vector<ExperimentResult> results{run_experiment(cfg, family, flags.jobs)};
  write_rounds_csv(out / "rounds.csv", results);
  write_probe_csv(out / "probe.csv", results, cfg);
  if (cfg.write_checkpoint) {
    std::ofstream f(out / "model.bin", std::ios::binary);
    write_checkpoint(f, results.front().protocol.final_global);
  }
  print_probes(results);
  return 0;
}

int cmd_lodo(const CommonFlags& flags) {
  const ExperimentConfig cfg = resolve(flags);
  const fs::path out = prepare_out(flags, cfg);
  const auto results = leave_one_domain_out(cfg, flags.jobs);
  write_rounds_csv(out / "rounds.csv", results);
  write_probe_csv(out / "probe.csv", results, cfg);
  print_probes(results);
  return 0;
}

int cmd_theory(const CommonFlags& flags) {
  const ExperimentConfig cfg = resolve(flags);
  const fs::path out = prepare_out(flags, cfg);
  const auto verdicts = run_theory_suite(cfg, out / "theory");
  write_verdicts_json(out / "verdicts.json", verdicts);
  for (const auto& v : verdicts)
    std::printf("%-28s %s statistic=%s threshold=%s\n", v.name.c_str(), v.passed ? "pass" : "fail",
                format_real(v.statistic).c_str(), format_real(v.threshold).c_str());
  return 0;
}

int cmd_sweep(const CommonFlags& flags) {
  const ExperimentConfig cfg = resolve(flags);
  const fs::path out = prepare_out(flags, cfg);
  if (cfg.sweep.mode == SweepMode::Grid) {
    write_sweep_csv(out / "sweep.csv", grid_sweep(cfg, flags.jobs));
  } else {
    write_sweep_csv(out / "comm_frequency.csv",
                    communication_frequency_sweep(cfg, cfg.sweep.total_local_epochs,
                                                  cfg.sweep.e_values, flags.jobs));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated unsupervised domain generalization simulator"};
  app.require_subcommand(1);
  CommonFlags run_flags, lodo_flags, theory_flags, sweep_flags;
  auto* run = app.add_subcommand("run", "train on one config and probe the target domain");
  auto* lodo = app.add_subcommand("lodo", "leave-one-domain-out over every domain");
  auto* theory = app.add_subcommand("theory", "run every theory check and write verdicts");
  auto* sweep = app.add_subcommand("sweep", "grid or communication-frequency sweep");
  add_common(run, run_flags, true);
  add_common(lodo, lodo_flags, true);
  add_common(theory, theory_flags, false);
  add_common(sweep, sweep_flags, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_flags);
    if (lodo->parsed()) return cmd_lodo(lodo_flags);
    if (theory->parsed()) return cmd_theory(theory_flags);
    if (sweep->parsed()) return cmd_sweep(sweep_flags);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
