#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "dmmsim/config.hpp"
#include "dmmsim/csv.hpp"
#include "dmmsim/experiments.hpp"

using namespace dmmsim;

namespace {

struct ScenarioFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> rounds;
  std::optional<int> dmms;
  std::optional<int> rebate_bps;
  std::optional<std::string> asset;
  std::optional<int> trials;
  std::vector<std::string> set;
  bool exclude_dmm{false};
};

void add_scenario_flags(CLI::App* cmd, ScenarioFlags& f, bool with_trials) {
  cmd->add_option("--config", f.config, "key = value configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "base seed");
  cmd->add_option("--rounds", f.rounds, "timestamps per run");
  cmd->add_option("--dmms", f.dmms, "number of designated market makers");
  cmd->add_option("--rebate-bps", f.rebate_bps, "maker rebate in basis points");
  cmd->add_option("--asset", f.asset, "asset preset (KO, SBUX, NVDA) or configured ticker");
  if (with_trials) cmd->add_option("--trials", f.trials, "trials per cell");
  cmd->add_option("--set", f.set, "extra config override, key=value (repeatable)");
  cmd->add_flag("--exclude-dmm", f.exclude_dmm, "leave DMM quotes out of the EP ratio");
}

ExperimentConfig resolve_config(const ScenarioFlags& f) {
  ConfigOverrides o;
  for (const auto& kv : f.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    o.emplace_back(std::string(trim(kv.substr(0, eq))), std::string(trim(kv.substr(eq + 1))));
  }
  if (f.seed) o.emplace_back("seed", std::to_string(*f.seed));
  if (f.rounds) o.emplace_back("rounds", std::to_string(*f.rounds));
  if (f.dmms) o.emplace_back("dmms", std::to_string(*f.dmms));
  if (f.rebate_bps) o.emplace_back("rebate_bps", std::to_string(*f.rebate_bps));
  if (f.asset) o.emplace_back("asset", *f.asset);
  if (f.trials) o.emplace_back("trials", std::to_string(*f.trials));
  if (f.exclude_dmm) o.emplace_back("exclude_dmm", "true");
  return f.config.empty() ? default_config(o) : load_config(f.config, o);
}

int cmd_run(const ScenarioFlags& flags, const std::string& out_dir) {
  const ExperimentConfig config = resolve_config(flags);
  const SimResult result = run_simulation(config.sim);
  const MetricsReport m = compute_metrics(result, config.exclude_dmm);

  std::vector<std::optional<double>> values{m.ep_ratio, m.qs, m.db, m.rs5, m.rs10, m.as5, m.as10};
  std::vector<std::string> names{"EP_ratio", "qs", "DB", "RS5", "RS10", "AS5", "AS10"};
  if (m.recovery_timestamps) {
    names.emplace_back("recovery");
    values.emplace_back(static_cast<double>(*m.recovery_timestamps));
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    std::cout << names[i] << " " << (values[i] ? format_double(*values[i]) : std::string("NA")) << "\n";
  }
  std::cout << "trades " << result.trades.size() << "\norders " << result.orders.size() << "\n";

  if (!out_dir.empty()) {
    const std::filesystem::path dir(out_dir);
    write_text_file(dir / "manifest.txt", "dmmsim_version = " DMMSIM_VERSION "\nstudy = run\n[config]\n" +
                                              echo_config(config));
    write_text_file(dir / "steps.csv", step_report_csv(result));
    write_text_file(dir / "trades.csv", trades_csv(result));
    write_text_file(dir / "orders.csv", order_status_csv(result));
    write_text_file(dir / "metrics.csv", metrics_csv(names, values));
  }
  return 0;
}

void print_cells(const SweepResult& sweep) {
  std::cout << "cell";
  const std::vector<std::string> shown{"EP_ratio", "qs", "DB", "RS5", "PE", "recovery"};
  for (const auto& m : shown) std::cout << "," << m;
  std::cout << "\n";
  for (const auto& cell : sweep.cells) {
    std::cout << cell.key.name();
    if (cell.error) {
      std::cout << ",error: " << *cell.error << "\n";
      continue;
    }
    for (const auto& m : shown) std::cout << "," << format_optional(cell_mean(cell, m));
    std::cout << "\n";
  }
  for (const auto& w : sweep.warnings) std::cerr << "warning: " << w << "\n";
}

int cmd_study(StudyKind kind, const ScenarioFlags& flags, const std::string& out_dir, unsigned jobs, bool detail) {
  const ExperimentConfig config = resolve_config(flags);
  const ScenarioGrid grid = make_grid(kind, config);
  SweepOptions options;
  options.out_dir = out_dir;
  options.jobs = jobs;
  options.trial_detail = detail;
  const SweepResult sweep = run_sweep(grid, config, options);
  print_cells(sweep);
  std::cerr << "manifest " << sweep.manifest.config_hash << " written to " << out_dir << "\n";
  return 0;
}

int cmd_anova(const std::string& file, double alpha) {
  std::vector<stats::GroupSummary> summaries;
  const auto groups = read_anova_input(file, &summaries);
  const auto result = stats::one_way_anova(std::span<const stats::GroupMoments>(groups), alpha);
  std::cout << anova_report_csv(summaries, result);
  return 0;
}

int cmd_report(const std::string& dir, const std::string& out_dir) {
  const SweepResult sweep = load_sweep(dir);
  const std::filesystem::path target = out_dir.empty() ? std::filesystem::path(dir) : std::filesystem::path(out_dir);
  write_aggregates(sweep, target);
  print_cells(sweep);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Limit-order-book simulator with designated market makers"};
  app.set_version_flag("--version", DMMSIM_VERSION);
  app.require_subcommand(1);

  ScenarioFlags run_flags;
  std::string run_out;
  auto* run = app.add_subcommand("run", "simulate one scenario and print its metrics");
  add_scenario_flags(run, run_flags, false);
  run->add_option("--out-dir", run_out, "write step, trade, order and metric CSVs here");

  struct StudyCmd {
    StudyKind kind{StudyKind::Sweep};
    const char* name{""};
    const char* help{""};
    CLI::App* app{nullptr};
    ScenarioFlags flags;
    std::string out_dir;
    unsigned jobs{std::max(1u, std::thread::hardware_concurrency())};
    bool detail{false};
  };
  std::vector<StudyCmd> studies(4);
  studies[0].kind = StudyKind::Sweep;
  studies[0].name = "sweep";
  studies[0].help = "dmm count x rebate x asset grid";
  studies[1].kind = StudyKind::Shock;
  studies[1].name = "shock";
  studies[1].help = "shock recovery across 1..10 DMMs";
  studies[2].kind = StudyKind::Pe;
  studies[2].name = "pe";
  studies[2].help = "price efficiency across 1..15 DMMs";
  studies[3].kind = StudyKind::Assets;
  studies[3].name = "assets";
  studies[3].help = "KO, SBUX and NVDA with 3 DMMs";
  for (auto& s : studies) {
    s.app = app.add_subcommand(s.name, s.help);
    add_scenario_flags(s.app, s.flags, true);
    s.app->add_option("--out-dir", s.out_dir, "output directory")->required();
    s.app->add_option("--jobs", s.jobs, "worker threads")->check(CLI::PositiveNumber);
    s.app->add_flag("--trial-detail", s.detail, "also write per-trial step, trade and order CSVs");
  }

  std::string anova_file;
  double alpha = 0.05;
  auto* anova = app.add_subcommand("anova", "one-way ANOVA on a CSV of group,value rows or group summaries");
  anova->add_option("file", anova_file, "input CSV")->required()->check(CLI::ExistingFile);
  anova->add_option("--alpha", alpha, "significance level for F crit");

  std::string report_dir;
  std::string report_out;
  auto* report = app.add_subcommand("report", "recompute aggregate tables from a study's per-cell CSVs");
  report->add_option("dir", report_dir, "study output directory")->required()->check(CLI::ExistingDirectory);
  report->add_option("--out-dir", report_out, "write tables here instead of in place");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_flags, run_out);
    for (const auto& s : studies) {
      if (s.app->parsed()) return cmd_study(s.kind, s.flags, s.out_dir, s.jobs, s.detail);
    }
    if (anova->parsed()) return cmd_anova(anova_file, alpha);
    if (report->parsed()) return cmd_report(report_dir, report_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
