#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dmmsim/config.hpp"
#include "dmmsim/engine.hpp"
#include "dmmsim/metrics.hpp"
#include "dmmsim/stats.hpp"

namespace dmmsim {

enum class StudyKind { Sweep, Shock, Pe, Assets };
std::string to_string(StudyKind kind);
StudyKind study_from_string(const std::string& name);

struct ScenarioGrid {
  StudyKind kind{StudyKind::Sweep};
  /// Everything except dmm count, rebate, asset and seed.
  SimConfig base;
  std::vector<int> dmm_counts;
  std::vector<int> rebate_bps_list;
  std::vector<AssetSpec> assets;
  int trials_per_cell{30};
  std::uint64_t base_seed{1};
  bool exclude_dmm{false};

  void validate() const;
};

/// Grids for each study, with that study's fixed design applied to the config.
ScenarioGrid make_sweep_grid(const ExperimentConfig& config);
/// DMMs 1..10, 31 trials, shock at rounds/2 x1.3 with a 1% band unless configured.
ScenarioGrid make_shock_grid(const ExperimentConfig& config);
/// DMMs 1..15 at the configured rebate, 30 trials.
ScenarioGrid make_pe_grid(const ExperimentConfig& config);
/// KO, SBUX, NVDA presets with 3 DMMs at the configured rebate, 30 trials.
ScenarioGrid make_asset_grid(const ExperimentConfig& config);
ScenarioGrid make_grid(StudyKind kind, const ExperimentConfig& config);

struct CellKey {
  int dmm_count{1};
  int rebate_bps{20};
  std::string asset;

  /// Directory name, e.g. "dmm3_bps20_KO".
  std::string name() const;
};

/// Per-trial metric columns, in file order.
const std::vector<std::string>& trial_metric_names();

struct TrialResult {
  int trial{0};
  std::uint64_t seed{0};
  /// DMM whose equity curve fed the performance figures.
  int selected_dmm{0};
  /// Indexed like trial_metric_names(); empty where a metric had no data.
  std::vector<std::optional<double>> values;

  std::optional<double> value(const std::string& metric) const;
};

struct CellResult {
  CellKey key;
  std::vector<TrialResult> trials;
  /// Set when a trial failed; the cell then carries no trials.
  std::optional<std::string> error;

  /// Non-empty values of one metric, in trial order.
  std::vector<double> metric(const std::string& name) const;
};

struct RunManifest {
  std::string config_hash;
  std::string seed_rule;
  std::string version;
  std::string study;
  std::string config_echo;
  std::vector<std::pair<std::string, std::string>> cell_paths;

  std::string text() const;
  static RunManifest parse(const std::string& text);
};

struct SweepOptions {
  std::filesystem::path out_dir;
  unsigned jobs{1};
  /// Also write the step, trade and order-status CSVs of every trial.
  bool trial_detail{false};
};

struct SweepResult {
  ScenarioGrid grid;
  std::vector<CellResult> cells;
  RunManifest manifest;
  std::vector<std::string> warnings;
};

std::uint64_t trial_seed(std::uint64_t base_seed, const CellKey& key, int trial);

/// Simulates one trial of a cell and computes its metrics.
TrialResult run_trial(const ScenarioGrid& grid, const CellKey& key, int trial, SimResult* keep = nullptr);

/// Runs every (cell, trial) on a bounded worker pool. When out_dir is set,
/// writes the manifest, per-cell trial CSVs and the aggregate tables.
SweepResult run_sweep(const ScenarioGrid& grid, const ExperimentConfig& config, const SweepOptions& options = {});

/// Rebuilds a sweep from the manifest and per-cell CSVs under `dir`.
SweepResult load_sweep(const std::filesystem::path& dir);

/// Aggregate tables written next to the per-cell CSVs; file name -> text.
std::vector<std::pair<std::string, std::string>> aggregate_tables(const SweepResult& sweep);
void write_aggregates(const SweepResult& sweep, const std::filesystem::path& dir);

/// Mean of each metric per cell, skipping empty values; std::nullopt when none.
std::optional<double> cell_mean(const CellResult& cell, const std::string& metric);

/// SUMMARY block (Groups, Count, Sum, Average, Variance) then the ANOVA block.
std::string anova_report_csv(const std::vector<stats::GroupSummary>& groups, const stats::AnovaResult& result);
/// Reads either raw "group,value" rows or a "Groups,Count,Sum,Average,Variance" summary.
std::vector<stats::GroupMoments> read_anova_input(const std::filesystem::path& file,
                                                  std::vector<stats::GroupSummary>* summaries);

/// Step, trade, order-status and metric tables of a single run.
std::string step_report_csv(const SimResult& result);
std::string trades_csv(const SimResult& result);
std::string order_status_csv(const SimResult& result);
std::string metrics_csv(const std::vector<std::string>& names, const std::vector<std::optional<double>>& values);

MetricsReport compute_metrics(const SimResult& result, bool exclude_dmm);

}  // namespace dmmsim
