#include "dmmsim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "dmmsim/csv.hpp"

namespace dmmsim {

namespace {

constexpr const char* kSeedRule = "derive_seed(base_seed, dmm_count, rebate_bps, fnv1a64(asset), trial)";

const std::vector<std::string>& core_metrics() {
  static const std::vector<std::string> names{"EP_ratio", "qs", "DB", "RS5", "RS10", "AS5", "AS10"};
  return names;
}

std::string manifest_line(const std::string& hash) { return "manifest " + hash; }

std::vector<std::string> labels_of(const std::vector<int>& values, const std::string& prefix) {
  std::vector<std::string> out;
  for (int v : values) out.push_back(prefix + std::to_string(v));
  return out;
}

template <typename F>
std::optional<double> optional_metric(F&& f) {
  try {
    return f();
  } catch (const MetricError&) {
    return std::nullopt;
  }
}

}  // namespace

std::string to_string(StudyKind kind) {
  switch (kind) {
    case StudyKind::Sweep: return "sweep";
    case StudyKind::Shock: return "shock";
    case StudyKind::Pe: return "pe";
    case StudyKind::Assets: return "assets";
  }
  return "sweep";
}

StudyKind study_from_string(const std::string& name) {
  for (StudyKind k : {StudyKind::Sweep, StudyKind::Shock, StudyKind::Pe, StudyKind::Assets}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown study '" + name + "'");
}

void ScenarioGrid::validate() const {
  if (trials_per_cell < 1) throw std::invalid_argument("trials_per_cell must be >= 1");
  if (dmm_counts.empty() || rebate_bps_list.empty() || assets.empty()) {
    throw std::invalid_argument("grid lists must be nonempty");
  }
  std::set<std::string> tickers;
  for (const auto& a : assets) {
    if (!tickers.insert(a.ticker).second) throw std::invalid_argument("duplicate asset " + a.ticker);
  }
  SimConfig probe = base;
  for (int d : dmm_counts) {
    for (int b : rebate_bps_list) {
      probe.num_dmms = d;
      probe.rebate_bps = b;
      probe.validate();
    }
  }
}

namespace {

AssetSpec resolve_asset(const ExperimentConfig& config, const std::string& ticker) {
  if (ticker == config.sim.asset.ticker) return config.sim.asset;
  return asset_preset(ticker, config.sim.asset.initial_price);
}

ScenarioGrid base_grid(StudyKind kind, const ExperimentConfig& config, int default_trials) {
  ScenarioGrid g;
  g.kind = kind;
  g.base = config.sim;
  g.trials_per_cell = config.trials.value_or(default_trials);
  g.base_seed = config.sim.seed;
  g.exclude_dmm = config.exclude_dmm;
  g.rebate_bps_list = {config.sim.rebate_bps};
  g.assets = {config.sim.asset};
  return g;
}

}  // namespace

ScenarioGrid make_sweep_grid(const ExperimentConfig& config) {
  ScenarioGrid g = base_grid(StudyKind::Sweep, config, 30);
  g.dmm_counts = config.dmm_counts;
  g.rebate_bps_list = config.rebate_bps_list;
  g.assets.clear();
  for (const auto& t : config.assets) g.assets.push_back(resolve_asset(config, t));
  g.validate();
  return g;
}

ScenarioGrid make_shock_grid(const ExperimentConfig& config) {
  ScenarioGrid g = base_grid(StudyKind::Shock, config, 31);
  for (int d = 1; d <= 10; ++d) g.dmm_counts.push_back(d);
  if (!g.base.shock) {
    ShockSpec s;
    s.shock_time = g.base.rounds / 2;
    g.base.shock = s;
  }
  g.validate();
  return g;
}

ScenarioGrid make_pe_grid(const ExperimentConfig& config) {
  ScenarioGrid g = base_grid(StudyKind::Pe, config, 30);
  for (int d = 1; d <= 15; ++d) g.dmm_counts.push_back(d);
  g.validate();
  return g;
}

ScenarioGrid make_asset_grid(const ExperimentConfig& config) {
  ScenarioGrid g = base_grid(StudyKind::Assets, config, 30);
  g.dmm_counts = {3};
  g.assets.clear();
  for (const char* t : {"KO", "SBUX", "NVDA"}) g.assets.push_back(asset_preset(t, config.sim.asset.initial_price));
  g.validate();
  return g;
}

ScenarioGrid make_grid(StudyKind kind, const ExperimentConfig& config) {
  switch (kind) {
    case StudyKind::Sweep: return make_sweep_grid(config);
    case StudyKind::Shock: return make_shock_grid(config);
    case StudyKind::Pe: return make_pe_grid(config);
    case StudyKind::Assets: return make_asset_grid(config);
  }
  return make_sweep_grid(config);
}

std::string CellKey::name() const {
  return "dmm" + std::to_string(dmm_count) + "_bps" + std::to_string(rebate_bps) + "_" + asset;
}

const std::vector<std::string>& trial_metric_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out = core_metrics();
    for (const char* extra : {"PE", "recovery", "dmm_mean_return", "dmm_volatility", "dmm_risk_adjusted"}) {
      out.emplace_back(extra);
    }
    return out;
  }();
  return names;
}

namespace {

std::size_t metric_index(const std::string& metric) {
  const auto& names = trial_metric_names();
  const auto it = std::find(names.begin(), names.end(), metric);
  if (it == names.end()) throw std::invalid_argument("unknown metric '" + metric + "'");
  return static_cast<std::size_t>(it - names.begin());
}

}  // namespace

std::optional<double> TrialResult::value(const std::string& metric) const {
  return values.at(metric_index(metric));
}

std::vector<double> CellResult::metric(const std::string& name) const {
  const std::size_t idx = metric_index(name);
  std::vector<double> out;
  for (const auto& t : trials) {
    if (t.values.at(idx)) out.push_back(*t.values[idx]);
  }
  return out;
}

std::optional<double> cell_mean(const CellResult& cell, const std::string& metric) {
  const auto v = cell.metric(metric);
  if (v.empty()) return std::nullopt;
  return stats::summary_stats(v).mean;
}

std::uint64_t trial_seed(std::uint64_t base_seed, const CellKey& key, int trial) {
  return derive_seed(base_seed, {static_cast<std::uint64_t>(key.dmm_count), static_cast<std::uint64_t>(key.rebate_bps),
                                 fnv1a64(key.asset), static_cast<std::uint64_t>(trial)});
}

MetricsReport compute_metrics(const SimResult& result, bool exclude_dmm) {
  MetricsReport m;
  std::function<bool(const Order&)> filter;
  if (exclude_dmm) filter = [&](const Order& o) { return !result.is_dmm(o.owner_id); };
  m.ep_ratio = optional_metric([&] { return ep_ratio(result.orders, filter); });
  m.qs = optional_metric([&] { return quoted_spread_tw(result.quotes); });
  m.db = optional_metric([&] { return depth_best_tw(result.quotes); });
  m.rs5 = optional_metric([&] { return realized_spread_k(result.trades, result.quotes, 5); });
  m.rs10 = optional_metric([&] { return realized_spread_k(result.trades, result.quotes, 10); });
  m.as5 = optional_metric([&] { return adverse_selection_k(result.trades, result.quotes, 5); });
  m.as10 = optional_metric([&] { return adverse_selection_k(result.trades, result.quotes, 10); });
  m.pe_series = price_efficiency_series(result.quotes, result.path.values);
  if (result.config.shock) m.recovery_timestamps = shock_recovery_time(m.pe_series, *result.config.shock);
  return m;
}

TrialResult run_trial(const ScenarioGrid& grid, const CellKey& key, int trial, SimResult* keep) {
  SimConfig cfg = grid.base;
  cfg.num_dmms = key.dmm_count;
  cfg.rebate_bps = key.rebate_bps;
  const auto asset = std::find_if(grid.assets.begin(), grid.assets.end(),
                                  [&](const AssetSpec& a) { return a.ticker == key.asset; });
  if (asset == grid.assets.end()) throw std::invalid_argument("asset " + key.asset + " not in grid");
  cfg.asset = *asset;
  cfg.seed = trial_seed(grid.base_seed, key, trial);

  SimResult result = run_simulation(cfg);
  const MetricsReport m = compute_metrics(result, grid.exclude_dmm);

  TrialResult t;
  t.trial = trial;
  t.seed = cfg.seed;
  t.values.assign(trial_metric_names().size(), std::nullopt);
  t.values[0] = m.ep_ratio;
  t.values[1] = m.qs;
  t.values[2] = m.db;
  t.values[3] = m.rs5;
  t.values[4] = m.rs10;
  t.values[5] = m.as5;
  t.values[6] = m.as10;
  double pe_sum = 0.0;
  std::size_t pe_n = 0;
  for (const auto& pe : m.pe_series) {
    if (pe) {
      pe_sum += *pe;
      ++pe_n;
    }
  }
  if (pe_n > 0) t.values[7] = pe_sum / static_cast<double>(pe_n);
  if (m.recovery_timestamps) t.values[8] = static_cast<double>(*m.recovery_timestamps);

  RandomStream pick(cfg.seed, StreamPurpose::DmmSelection);
  t.selected_dmm = static_cast<int>(pick.uniform_index(static_cast<std::size_t>(cfg.num_dmms)));
  const auto perf = stats::dmm_performance(result.dmm_equity.at(static_cast<std::size_t>(t.selected_dmm)));
  t.values[9] = perf.mean_return;
  t.values[10] = perf.volatility;
  t.values[11] = perf.risk_adjusted;
  if (keep) *keep = std::move(result);
  return t;
}

std::string RunManifest::text() const {
  std::string out;
  out += "dmmsim_version = " + version + "\n";
  out += "study = " + study + "\n";
  out += "config_hash = " + config_hash + "\n";
  out += "seed_rule = " + seed_rule + "\n";
  out += "[config]\n" + config_echo;
  out += "[cells]\n";
  for (const auto& [cell, path] : cell_paths) out += cell + " = " + path + "\n";
  return out;
}

RunManifest RunManifest::parse(const std::string& text) {
  RunManifest m;
  std::istringstream in(text);
  std::string line;
  std::string section;
  while (std::getline(in, line)) {
    if (line == "[config]" || line == "[cells]") {
      section = line;
      continue;
    }
    if (section == "[config]") {
      m.config_echo += line + "\n";
      continue;
    }
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) {
      if (trim(line).empty()) continue;
      throw std::invalid_argument("manifest: malformed line '" + line + "'");
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 3);
    if (section == "[cells]") {
      m.cell_paths.emplace_back(key, value);
    } else if (key == "dmmsim_version") {
      m.version = value;
    } else if (key == "study") {
      m.study = value;
    } else if (key == "config_hash") {
      m.config_hash = value;
    } else if (key == "seed_rule") {
      m.seed_rule = value;
    } else {
      throw std::invalid_argument("manifest: unknown field '" + key + "'");
    }
  }
  if (m.study.empty() || m.config_hash.empty()) throw std::invalid_argument("manifest: missing study or hash");
  return m;
}

namespace {

std::vector<CellKey> grid_cells(const ScenarioGrid& grid) {
  std::vector<CellKey> cells;
  for (const auto& a : grid.assets) {
    for (int b : grid.rebate_bps_list) {
      for (int d : grid.dmm_counts) cells.push_back(CellKey{d, b, a.ticker});
    }
  }
  return cells;
}

std::string cell_path(const CellKey& key) { return "cells/" + key.name() + "/trials.csv"; }

RunManifest make_manifest(const ScenarioGrid& grid, const ExperimentConfig& config) {
  RunManifest m;
  m.version = DMMSIM_VERSION;
  m.study = to_string(grid.kind);
  m.seed_rule = kSeedRule;
  m.config_echo = echo_config(config);
  for (const auto& key : grid_cells(grid)) m.cell_paths.emplace_back(key.name(), cell_path(key));
  m.config_hash = hex64(fnv1a64(m.version + "\n" + m.study + "\n" + m.seed_rule + "\n" + m.config_echo));
  return m;
}

std::string trials_csv(const CellResult& cell, const std::string& hash) {
  CsvWriter w;
  w.comment(manifest_line(hash));
  if (cell.error) w.comment("error " + *cell.error);
  std::vector<std::string> header{"trial", "seed", "selected_dmm"};
  for (const auto& n : trial_metric_names()) header.push_back(n);
  w.row(header);
  for (const auto& t : cell.trials) {
    std::vector<std::string> row{std::to_string(t.trial), std::to_string(t.seed), std::to_string(t.selected_dmm)};
    for (const auto& v : t.values) row.push_back(format_optional(v));
    w.row(row);
  }
  return w.text();
}

CellResult parse_trials_csv(const CsvTable& table, const CellKey& key) {
  CellResult cell;
  cell.key = key;
  for (const auto& c : table.comments) {
    if (c.rfind("error ", 0) == 0) cell.error = c.substr(6);
  }
  const auto& names = trial_metric_names();
  std::vector<std::size_t> cols;
  for (const auto& n : names) {
    const auto col = table.column(n);
    if (!col) throw std::invalid_argument(key.name() + ": trials.csv lacks column " + n);
    cols.push_back(*col);
  }
  for (const auto& row : table.rows) {
    TrialResult t;
    t.trial = static_cast<int>(parse_integer(row.at(0)));
    t.seed = std::stoull(row.at(1));
    t.selected_dmm = static_cast<int>(parse_integer(row.at(2)));
    for (std::size_t c : cols) {
      const std::string& field = row.at(c);
      t.values.push_back(field.empty() ? std::nullopt : std::optional<double>(parse_double(field)));
    }
    cell.trials.push_back(std::move(t));
  }
  return cell;
}

void write_trial_detail(const std::filesystem::path& dir, int trial, const SimResult& result,
                        const std::vector<std::optional<double>>& values) {
  const std::string stem = "trial" + std::to_string(trial) + "_";
  write_text_file(dir / (stem + "steps.csv"), step_report_csv(result));
  write_text_file(dir / (stem + "trades.csv"), trades_csv(result));
  write_text_file(dir / (stem + "orders.csv"), order_status_csv(result));
  write_text_file(dir / (stem + "metrics.csv"), metrics_csv(trial_metric_names(), values));
}

}  // namespace

SweepResult run_sweep(const ScenarioGrid& grid, const ExperimentConfig& config, const SweepOptions& options) {
  grid.validate();
  SweepResult sweep;
  sweep.grid = grid;
  sweep.manifest = make_manifest(grid, config);

  const auto keys = grid_cells(grid);
  const auto trials = static_cast<std::size_t>(grid.trials_per_cell);
  std::vector<TrialResult> results(keys.size() * trials);
  std::vector<std::optional<std::string>> errors(results.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < results.size(); i = next++) {
      const CellKey& key = keys[i / trials];
      const int trial = static_cast<int>(i % trials);
      try {
        if (options.trial_detail && !options.out_dir.empty()) {
          SimResult full;
          results[i] = run_trial(grid, key, trial, &full);
          write_trial_detail(options.out_dir / "cells" / key.name(), trial, full, results[i].values);
        } else {
          results[i] = run_trial(grid, key, trial);
        }
      } catch (const std::exception& e) {
        errors[i] = "trial " + std::to_string(trial) + ": " + e.what();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(results.size())));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (std::size_t c = 0; c < keys.size(); ++c) {
    CellResult cell;
    cell.key = keys[c];
    for (std::size_t k = 0; k < trials; ++k) {
      const std::size_t i = c * trials + k;
      if (errors[i]) {
        cell.error = *errors[i];
        cell.trials.clear();
        break;
      }
      cell.trials.push_back(std::move(results[i]));
    }
    sweep.cells.push_back(std::move(cell));
  }

  if (!options.out_dir.empty()) {
    write_text_file(options.out_dir / "manifest.txt", sweep.manifest.text());
    for (const auto& cell : sweep.cells) {
      write_text_file(options.out_dir / cell_path(cell.key), trials_csv(cell, sweep.manifest.config_hash));
    }
    write_aggregates(sweep, options.out_dir);
  }
  // Warnings surface through the aggregate tables; collect them for callers too.
  for (const auto& [name, text] : aggregate_tables(sweep)) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind("# warning ", 0) == 0) sweep.warnings.push_back(name + ": " + line.substr(10));
    }
  }
  return sweep;
}

SweepResult load_sweep(const std::filesystem::path& dir) {
  SweepResult sweep;
  sweep.manifest = RunManifest::parse(read_text_file(dir / "manifest.txt"));
  const ExperimentConfig config = parse_config(sweep.manifest.config_echo, {}, (dir / "manifest.txt").string());
  sweep.grid = make_grid(study_from_string(sweep.manifest.study), config);
  const auto keys = grid_cells(sweep.grid);
  if (keys.size() != sweep.manifest.cell_paths.size()) {
    throw std::invalid_argument("manifest cell list does not match its configuration");
  }
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto& [name, rel] = sweep.manifest.cell_paths[i];
    if (name != keys[i].name()) throw std::invalid_argument("manifest cell " + name + " out of order");
    sweep.cells.push_back(parse_trials_csv(read_csv(dir / rel), keys[i]));
  }
  return sweep;
}

namespace {

bool metric_present(const SweepResult& sweep, const std::string& metric) {
  return std::any_of(sweep.cells.begin(), sweep.cells.end(),
                     [&](const CellResult& c) { return !c.metric(metric).empty(); });
}

std::vector<std::string> reported_metrics(const SweepResult& sweep) {
  std::vector<std::string> out;
  for (const auto& m : trial_metric_names()) {
    if (metric_present(sweep, m)) out.push_back(m);
  }
  return out;
}

std::string summary_table(const SweepResult& sweep) {
  CsvWriter w;
  w.comment(manifest_line(sweep.manifest.config_hash));
  w.row({"dmm_count", "rebate_bps", "asset", "metric", "count", "mean", "std", "min", "q25", "median", "q75", "max",
         "error"});
  const auto metrics = reported_metrics(sweep);
  for (const auto& cell : sweep.cells) {
    const std::vector<std::string> coords{std::to_string(cell.key.dmm_count), std::to_string(cell.key.rebate_bps),
                                          cell.key.asset};
    if (cell.error) {
      auto row = coords;
      row.insert(row.end(), {"", "0", "", "", "", "", "", "", "", *cell.error});
      w.row(row);
      continue;
    }
    for (const auto& m : metrics) {
      auto row = coords;
      row.push_back(m);
      const auto v = cell.metric(m);
      if (v.empty()) {
        row.insert(row.end(), {"0", "", "", "", "", "", "", "", ""});
      } else {
        const auto s = stats::summary_stats(v);
        row.insert(row.end(), {std::to_string(s.count), format_double(s.mean), format_double(s.std_dev),
                               format_double(s.min), format_double(s.q25), format_double(s.median),
                               format_double(s.q75), format_double(s.max), ""});
      }
      w.row(row);
    }
  }
  return w.text();
}

struct Factor {
  std::string name;
  std::function<std::string(const CellKey&)> level;
  std::function<std::string(const CellKey&)> slice;
};

std::vector<Factor> factors_of(const ScenarioGrid& grid) {
  std::vector<Factor> out;
  if (grid.dmm_counts.size() >= 2) {
    out.push_back({"dmm_count", [](const CellKey& k) { return "MM" + std::to_string(k.dmm_count); },
                   [](const CellKey& k) { return "rebate_bps=" + std::to_string(k.rebate_bps) + ";asset=" + k.asset; }});
  }
  if (grid.rebate_bps_list.size() >= 2) {
    out.push_back({"rebate_bps", [](const CellKey& k) { return std::to_string(k.rebate_bps) + "bps"; },
                   [](const CellKey& k) { return "dmm_count=" + std::to_string(k.dmm_count) + ";asset=" + k.asset; }});
  }
  if (grid.assets.size() >= 2) {
    out.push_back({"asset", [](const CellKey& k) { return k.asset; },
                   [](const CellKey& k) {
                     return "dmm_count=" + std::to_string(k.dmm_count) + ";rebate_bps=" + std::to_string(k.rebate_bps);
                   }});
  }
  return out;
}

std::string anova_table(const SweepResult& sweep) {
  CsvWriter w;
  w.comment(manifest_line(sweep.manifest.config_hash));
  w.row({"factor", "slice", "metric", "groups", "ss_between", "ss_within", "df_between", "df_within", "ms_between",
         "ms_within", "F", "p_value", "F_crit", "note"});
  const auto metrics = reported_metrics(sweep);
  for (const auto& factor : factors_of(sweep.grid)) {
    std::vector<std::string> slices;
    for (const auto& cell : sweep.cells) {
      const auto s = factor.slice(cell.key);
      if (std::find(slices.begin(), slices.end(), s) == slices.end()) slices.push_back(s);
    }
    for (const auto& slice : slices) {
      for (const auto& metric : metrics) {
        std::vector<std::vector<double>> groups;
        std::vector<std::string> skipped;
        for (const auto& cell : sweep.cells) {
          if (factor.slice(cell.key) != slice) continue;
          auto v = cell.metric(metric);
          if (v.size() < 2) {
            skipped.push_back(factor.level(cell.key));
            continue;
          }
          groups.push_back(std::move(v));
        }
        std::vector<std::string> row{factor.name, slice, metric, std::to_string(groups.size())};
        std::string note;
        if (!skipped.empty()) {
          note = "excluded groups with < 2 values:";
          for (const auto& s : skipped) note += " " + s;
        }
        if (groups.size() < 2) {
          row.insert(row.end(), {"", "", "", "", "", "", "", "", ""});
          row.push_back(note.empty() ? "fewer than 2 groups" : note);
          w.row(row);
          continue;
        }
        const auto r = stats::one_way_anova(std::span<const std::vector<double>>(groups));
        row.insert(row.end(), {format_double(r.ss_between), format_double(r.ss_within), std::to_string(r.df_between),
                               std::to_string(r.df_within), format_double(r.ms_between), format_double(r.ms_within),
                               format_double(r.f_stat), format_double(r.p_value), format_double(r.f_crit), note});
        w.row(row);
      }
    }
  }
  return w.text();
}

std::string sensitivity_table(const SweepResult& sweep) {
  const auto& g = sweep.grid;
  CsvWriter w;
  w.comment(manifest_line(sweep.manifest.config_hash));
  w.comment("z-scores of mean qs, pooled over each asset's rebate x dmm grid");
  std::vector<std::string> header{"asset", "rebate_bps"};
  for (const auto& l : labels_of(g.dmm_counts, "MM")) header.push_back(l);
  w.row(header);
  for (const auto& asset : g.assets) {
    std::vector<double> means;
    std::vector<std::string> missing;
    for (int b : g.rebate_bps_list) {
      for (int d : g.dmm_counts) {
        const auto it = std::find_if(sweep.cells.begin(), sweep.cells.end(), [&](const CellResult& c) {
          return c.key.dmm_count == d && c.key.rebate_bps == b && c.key.asset == asset.ticker;
        });
        const auto m = cell_mean(*it, "qs");
        if (m) {
          means.push_back(*m);
        } else {
          missing.push_back(it->key.name());
        }
      }
    }
    if (!missing.empty() || means.size() < 2) {
      std::string msg = "warning " + asset.ticker + ": matrix skipped";
      for (const auto& n : missing) msg += " " + n;
      w.comment(msg);
      continue;
    }
    const auto z = stats::zscore_matrix(labels_of(g.rebate_bps_list, ""), labels_of(g.dmm_counts, "MM"), means);
    if (z.degenerate) w.comment("warning " + asset.ticker + ": constant grid, z-scores set to 0");
    for (std::size_t r = 0; r < g.rebate_bps_list.size(); ++r) {
      std::vector<std::string> row{asset.ticker, std::to_string(g.rebate_bps_list[r])};
      for (std::size_t c = 0; c < g.dmm_counts.size(); ++c) row.push_back(format_double(z.at(r, c)));
      w.row(row);
    }
  }
  return w.text();
}

std::string shock_table(const SweepResult& sweep) {
  std::vector<stats::GroupSummary> summaries;
  std::vector<stats::GroupMoments> moments;
  std::string warnings;
  for (const auto& cell : sweep.cells) {
    const std::string label = "MM" + std::to_string(cell.key.dmm_count);
    const auto v = cell.metric("recovery");
    if (v.size() < 2) {
      warnings += "# warning " + label + " excluded: " + std::to_string(v.size()) + " recovered trials of " +
                  std::to_string(sweep.grid.trials_per_cell) + "\n";
      continue;
    }
    if (static_cast<int>(v.size()) < sweep.grid.trials_per_cell) {
      warnings += "# note " + label + ": " + std::to_string(sweep.grid.trials_per_cell - static_cast<int>(v.size())) +
                  " trials not recovered, left out\n";
    }
    summaries.push_back(stats::summary_stats(v, label));
    moments.push_back(stats::moments_of(v, label));
  }
  std::string out = "# " + manifest_line(sweep.manifest.config_hash) + "\n" + warnings;
  if (moments.size() < 2) return out + "# warning fewer than 2 groups recovered; no ANOVA\n";
  return out + anova_report_csv(summaries, stats::one_way_anova(std::span<const stats::GroupMoments>(moments)));
}

std::string pe_table(const SweepResult& sweep) {
  CsvWriter w;
  w.comment(manifest_line(sweep.manifest.config_hash));
  w.row({"dmm_count", "trials", "mean_pe", "sd_pe"});
  for (const auto& cell : sweep.cells) {
    const auto v = cell.metric("PE");
    if (v.empty()) {
      w.row({std::to_string(cell.key.dmm_count), "0", "", ""});
      continue;
    }
    const auto s = stats::summary_stats(v);
    w.row({std::to_string(cell.key.dmm_count), std::to_string(s.count), format_double(s.mean),
           format_double(s.std_dev)});
  }
  return w.text();
}

std::string asset_table(const SweepResult& sweep) {
  CsvWriter w;
  w.comment(manifest_line(sweep.manifest.config_hash));
  std::vector<std::string> header{"asset"};
  const std::vector<std::string> metrics{"EP_ratio", "qs", "DB", "RS5", "RS10", "AS5", "AS10", "PE"};
  for (const auto& m : metrics) header.push_back(m);
  w.row(header);
  for (const auto& cell : sweep.cells) {
    std::vector<std::string> row{cell.key.asset};
    for (const auto& m : metrics) row.push_back(format_optional(cell_mean(cell, m)));
    w.row(row);
  }
  return w.text();
}

}  // namespace

std::vector<std::pair<std::string, std::string>> aggregate_tables(const SweepResult& sweep) {
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("summary.csv", summary_table(sweep));
  out.emplace_back("anova.csv", anova_table(sweep));
  switch (sweep.grid.kind) {
    case StudyKind::Sweep: out.emplace_back("sensitivity_matrix.csv", sensitivity_table(sweep)); break;
    case StudyKind::Shock: out.emplace_back("shock_recovery.csv", shock_table(sweep)); break;
    case StudyKind::Pe: out.emplace_back("pe_study.csv", pe_table(sweep)); break;
    case StudyKind::Assets: out.emplace_back("asset_study.csv", asset_table(sweep)); break;
  }
  return out;
}

void write_aggregates(const SweepResult& sweep, const std::filesystem::path& dir) {
  for (const auto& [name, text] : aggregate_tables(sweep)) write_text_file(dir / name, text);
}

std::string anova_report_csv(const std::vector<stats::GroupSummary>& groups, const stats::AnovaResult& r) {
  CsvWriter w;
  w.row({"SUMMARY"});
  w.row({"Groups", "Count", "Sum", "Average", "Variance"});
  for (const auto& g : groups) {
    w.row({g.label, std::to_string(g.count), format_double(g.sum), format_double(g.mean), format_double(g.variance)});
  }
  w.row({""});
  w.row({"ANOVA"});
  w.row({"Source of Variation", "SS", "df", "MS", "F", "P-value", "F crit"});
  w.row({"Between Groups", format_double(r.ss_between), std::to_string(r.df_between), format_double(r.ms_between),
         format_double(r.f_stat), format_double(r.p_value), format_double(r.f_crit)});
  w.row({"Within Groups", format_double(r.ss_within), std::to_string(r.df_within), format_double(r.ms_within), "", "",
         ""});
  w.row({"Total", format_double(r.ss_total), std::to_string(r.df_between + r.df_within), "", "", "", ""});
  return w.text();
}

std::vector<stats::GroupMoments> read_anova_input(const std::filesystem::path& file,
                                                  std::vector<stats::GroupSummary>* summaries) {
  const CsvTable table = read_csv(file);
  std::vector<stats::GroupMoments> out;
  if (table.column("Groups") && table.column("Count") && table.column("Variance") &&
      (table.column("Sum") || table.column("Average"))) {
    const auto label = *table.column("Groups");
    const auto count = *table.column("Count");
    const auto var = *table.column("Variance");
    for (const auto& row : table.rows) {
      stats::GroupMoments g;
      g.label = row.at(label);
      const long long n = parse_integer(row.at(count));
      if (n < 1) throw std::invalid_argument(file.string() + ": group " + g.label + " has count < 1");
      g.count = static_cast<std::size_t>(n);
      // Sum carries more digits than a printed average, so it wins when present.
      g.mean = table.column("Sum") ? parse_double(row.at(*table.column("Sum"))) / static_cast<double>(n)
                                   : parse_double(row.at(*table.column("Average")));
      g.variance = parse_double(row.at(var));
      out.push_back(g);
      if (summaries) {
        stats::GroupSummary s;
        s.label = g.label;
        s.count = g.count;
        s.mean = g.mean;
        s.sum = g.mean * static_cast<double>(n);
        s.variance = g.variance;
        s.std_dev = std::sqrt(g.variance);
        summaries->push_back(s);
      }
    }
    return out;
  }
  if (table.header.size() != 2) {
    throw std::invalid_argument(file.string() + ": expected 'group,value' rows or a Groups/Count/Sum/Variance table");
  }
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> values;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    if (row.size() != 2) throw std::invalid_argument(file.string() + ": row " + std::to_string(i + 2) + " needs 2 fields");
    if (!values.contains(row[0])) order.push_back(row[0]);
    values[row[0]].push_back(parse_double(row[1]));
  }
  for (const auto& label : order) {
    out.push_back(stats::moments_of(values[label], label));
    if (summaries) summaries->push_back(stats::summary_stats(values[label], label));
  }
  return out;
}

std::string step_report_csv(const SimResult& result) {
  CsvWriter w;
  std::vector<std::string> header{"time"};
  const int dmms = result.config.num_dmms;
  for (int k = 1; k <= dmms; ++k) {
    header.push_back("mm" + std::to_string(k) + "_inventory");
    header.push_back("mm" + std::to_string(k) + "_cash");
  }
  for (const char* h : {"p1_inventory", "p1_cash", "p3_inventory", "p3_cash", "price_history", "fundamental",
                        "difference"}) {
    header.emplace_back(h);
  }
  w.row(header);
  for (const auto& s : result.steps) {
    std::vector<std::string> row{std::to_string(s.time)};
    for (int k = 0; k < dmms; ++k) {
      const Account& a = s.holdings.at(static_cast<std::size_t>(kFirstDmm + k));
      row.push_back(std::to_string(a.inventory));
      row.push_back(format_double(a.cash));
    }
    for (ParticipantId p : {kInsider, kMomentum}) {
      const Account& a = s.holdings.at(static_cast<std::size_t>(p));
      row.push_back(std::to_string(a.inventory));
      row.push_back(format_double(a.cash));
    }
    row.push_back(format_optional(s.price_history));
    row.push_back(format_double(s.fundamental));
    row.push_back(format_optional(s.difference));
    w.row(row);
  }
  return w.text();
}

std::string trades_csv(const SimResult& result) {
  CsvWriter w;
  w.row({"Time", "Matched P", "Matched C", "Buyer", "Seller"});
  for (const auto& t : result.trades) {
    w.row({std::to_string(t.trade_time), t.matched_price.str(), std::to_string(t.matched_quantity),
           std::to_string(t.buyer_id), std::to_string(t.seller_id)});
  }
  return w.text();
}

std::string order_status_csv(const SimResult& result) {
  CsvWriter w;
  w.row({"order_id", "customer_id", "order_time", "asset", "order_type", "order_price", "order_quantity",
         "total_amount", "status"});
  for (const auto& o : result.orders) {
    w.row({o.order_id, std::to_string(o.owner_id), std::to_string(o.submit_time), o.asset, to_string(o.side),
           o.limit_price.str(), std::to_string(o.remaining_quantity),
           format_double(notional(o.limit_price, o.original_quantity)), to_string(o.status)});
  }
  return w.text();
}

std::string metrics_csv(const std::vector<std::string>& names, const std::vector<std::optional<double>>& values) {
  CsvWriter w;
  w.row(names);
  std::vector<std::string> row;
  for (const auto& v : values) row.push_back(format_optional(v));
  w.row(row);
  return w.text();
}

}  // namespace dmmsim
