#include "dmmsim/config.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <map>

#include "dmmsim/csv.hpp"

namespace dmmsim {

namespace {

struct Setting {
  std::string value;
  std::string where;
};

int to_int(const std::string& text) {
  const long long v = parse_integer(text);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw std::invalid_argument("integer out of range");
  }
  return static_cast<int>(v);
}

std::uint64_t to_u64(const std::string& text) {
  if (!text.empty() && text.front() == '-') throw std::invalid_argument("expected a non-negative integer");
  std::size_t used = 0;
  const unsigned long long v = std::stoull(text, &used);
  if (used != text.size()) throw std::invalid_argument("trailing characters");
  return v;
}

bool to_bool(const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw std::invalid_argument("expected true or false");
}

std::vector<std::string> to_list(const std::string& text) {
  std::vector<std::string> out;
  for (const auto& field : split_fields(text)) {
    const std::string item(trim(field));
    if (item.empty()) throw std::invalid_argument("empty list item");
    out.push_back(item);
  }
  return out;
}

std::vector<int> to_int_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& item : to_list(text)) out.push_back(to_int(item));
  return out;
}

template <typename T>
std::string join(const std::vector<T>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ',';
    if constexpr (std::is_same_v<T, std::string>) {
      out += items[i];
    } else {
      out += std::to_string(items[i]);
    }
  }
  return out;
}

struct Key {
  std::string name;
  const char* type;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  /// std::nullopt leaves the key out of the echo.
  std::function<std::optional<std::string>(const ExperimentConfig&)> get;
};

ShockSpec& shock_of(ExperimentConfig& c) {
  if (!c.sim.shock) c.sim.shock = ShockSpec{};
  return *c.sim.shock;
}

std::optional<std::string> shock_field(const ExperimentConfig& c, std::string (*f)(const ShockSpec&)) {
  if (!c.sim.shock) return std::nullopt;
  return f(*c.sim.shock);
}

#define DMM_INT(key, field)                                                               \
  Key {                                                                                   \
    key, "integer", [](ExperimentConfig& c, const std::string& v) { c.field = to_int(v); }, \
        [](const ExperimentConfig& c) -> std::optional<std::string> { return std::to_string(c.field); } \
  }
#define DMM_DOUBLE(key, field)                                                                  \
  Key {                                                                                         \
    key, "number", [](ExperimentConfig& c, const std::string& v) { c.field = parse_double(v); }, \
        [](const ExperimentConfig& c) -> std::optional<std::string> { return format_double(c.field); } \
  }
#define DMM_SIZE(key, field)                                                                      \
  Key {                                                                                           \
    key, "integer",                                                                               \
        [](ExperimentConfig& c, const std::string& v) {                                           \
          const int n = to_int(v);                                                                \
          if (n < 0) throw std::invalid_argument("expected a non-negative integer");              \
          c.field = static_cast<std::size_t>(n);                                                  \
        },                                                                                        \
        [](const ExperimentConfig& c) -> std::optional<std::string> { return std::to_string(c.field); } \
  }

const std::vector<Key>& key_table() {
  static const std::vector<Key> keys = {
      DMM_INT("rounds", sim.rounds),
      DMM_INT("dmms", sim.num_dmms),
      DMM_INT("rebate_bps", sim.rebate_bps),
      // The asset block is applied first so its preset can be refined by the keys below.
      Key{"asset", "ticker",
          [](ExperimentConfig& c, const std::string& v) {
            if (v.empty()) throw std::invalid_argument("empty ticker");
            c.sim.asset.ticker = v;
          },
          [](const ExperimentConfig& c) -> std::optional<std::string> { return c.sim.asset.ticker; }},
      DMM_DOUBLE("annual_return", sim.asset.annual_return),
      DMM_DOUBLE("annual_volatility", sim.asset.annual_volatility),
      DMM_DOUBLE("initial_price", sim.asset.initial_price),
      Key{"seed", "unsigned integer",
          [](ExperimentConfig& c, const std::string& v) { c.sim.seed = to_u64(v); },
          [](const ExperimentConfig& c) -> std::optional<std::string> { return std::to_string(c.sim.seed); }},
      Key{"trials", "integer", [](ExperimentConfig& c, const std::string& v) { c.trials = to_int(v); },
          [](const ExperimentConfig& c) -> std::optional<std::string> {
            if (!c.trials) return std::nullopt;
            return std::to_string(*c.trials);
          }},
      Key{"dmm_counts", "integer list",
          [](ExperimentConfig& c, const std::string& v) { c.dmm_counts = to_int_list(v); },
          [](const ExperimentConfig& c) -> std::optional<std::string> { return join(c.dmm_counts); }},
      Key{"rebate_bps_list", "integer list",
          [](ExperimentConfig& c, const std::string& v) { c.rebate_bps_list = to_int_list(v); },
          [](const ExperimentConfig& c) -> std::optional<std::string> { return join(c.rebate_bps_list); }},
      Key{"assets", "ticker list", [](ExperimentConfig& c, const std::string& v) { c.assets = to_list(v); },
          [](const ExperimentConfig& c) -> std::optional<std::string> { return join(c.assets); }},
      Key{"exclude_dmm", "boolean", [](ExperimentConfig& c, const std::string& v) { c.exclude_dmm = to_bool(v); },
          [](const ExperimentConfig& c) -> std::optional<std::string> {
            return std::string(c.exclude_dmm ? "true" : "false");
          }},
      Key{"max_inventory", "integer",
          [](ExperimentConfig& c, const std::string& v) {
            c.sim.insider.max_inventory = to_int(v);
            c.sim.momentum.max_inventory = c.sim.insider.max_inventory;
          },
          [](const ExperimentConfig& c) -> std::optional<std::string> {
            return std::to_string(c.sim.insider.max_inventory);
          }},
      Key{"starting_cash", "number",
          [](ExperimentConfig& c, const std::string& v) {
            c.sim.insider.starting_cash = parse_double(v);
            c.sim.momentum.starting_cash = c.sim.insider.starting_cash;
          },
          [](const ExperimentConfig& c) -> std::optional<std::string> {
            return format_double(c.sim.insider.starting_cash);
          }},
      Key{"price_premium", "number",
          [](ExperimentConfig& c, const std::string& v) {
            c.sim.insider.price_premium = parse_double(v);
            c.sim.momentum.price_premium = c.sim.insider.price_premium;
          },
          [](const ExperimentConfig& c) -> std::optional<std::string> {
            return format_double(c.sim.insider.price_premium);
          }},
      Key{"quantity_cap", "integer",
          [](ExperimentConfig& c, const std::string& v) {
            c.sim.insider.quantity_cap = to_int(v);
            c.sim.momentum.quantity_cap = c.sim.insider.quantity_cap;
          },
          [](const ExperimentConfig& c) -> std::optional<std::string> {
            return std::to_string(c.sim.insider.quantity_cap);
          }},
      Key{"order_lifetime", "integer",
          [](ExperimentConfig& c, const std::string& v) {
            c.sim.insider.order_lifetime = to_int(v);
            c.sim.momentum.order_lifetime = c.sim.insider.order_lifetime;
            c.sim.liquidity_order_lifetime = c.sim.insider.order_lifetime;
          },
          [](const ExperimentConfig& c) -> std::optional<std::string> {
            return std::to_string(c.sim.insider.order_lifetime);
          }},
      DMM_DOUBLE("refrain_threshold", sim.insider.refrain_threshold),
      DMM_DOUBLE("liquidity_starting_cash", sim.liquidity_starting_cash),
      DMM_SIZE("liquidity_history_window", sim.liquidity_history_window),
      DMM_INT("dmm_max_inventory", sim.dmm.max_inventory),
      DMM_DOUBLE("dmm_starting_cash", sim.dmm.starting_cash),
      DMM_DOUBLE("base_half_spread", sim.dmm.base_half_spread),
      DMM_DOUBLE("widen_factor", sim.dmm.widen_factor),
      DMM_DOUBLE("quote_aggressiveness", sim.dmm.quote_aggressiveness),
      DMM_DOUBLE("min_half_spread", sim.dmm.min_half_spread),
      DMM_SIZE("volatility_window", sim.dmm.volatility_window),
      DMM_SIZE("large_order_window", sim.dmm.large_order_window),
      DMM_DOUBLE("insider_lambda", sim.insider_arrival.lambda_rate),
      DMM_DOUBLE("liquidity_lambda", sim.liquidity_arrival.lambda_rate),
      DMM_DOUBLE("momentum_lambda", sim.momentum_arrival.lambda_rate),
      DMM_DOUBLE("spread_mean", sim.noise.spread_mean),
      DMM_DOUBLE("spread_sd", sim.noise.spread_sd),
      DMM_DOUBLE("quantity_mean", sim.noise.quantity_mean),
      DMM_DOUBLE("quantity_sd", sim.noise.quantity_sd),
      Key{"shock_time", "integer",
          [](ExperimentConfig& c, const std::string& v) { shock_of(c).shock_time = to_int(v); },
          [](const ExperimentConfig& c) {
            return shock_field(c, [](const ShockSpec& s) { return std::to_string(s.shock_time); });
          }},
      Key{"shock_multiplier", "number",
          [](ExperimentConfig& c, const std::string& v) { shock_of(c).multiplier = parse_double(v); },
          [](const ExperimentConfig& c) {
            return shock_field(c, [](const ShockSpec& s) { return format_double(s.multiplier); });
          }},
      Key{"convergence_band", "number",
          [](ExperimentConfig& c, const std::string& v) { shock_of(c).convergence_band = parse_double(v); },
          [](const ExperimentConfig& c) {
            return shock_field(c, [](const ShockSpec& s) { return format_double(s.convergence_band); });
          }},
      Key{"historical_path", "file path",
          [](ExperimentConfig& c, const std::string& v) {
            if (v.empty()) throw std::invalid_argument("empty path");
            c.historical_path_file = v;
          },
          [](const ExperimentConfig& c) -> std::optional<std::string> {
            if (c.historical_path_file.empty()) return std::nullopt;
            return c.historical_path_file;
          }},
  };
  return keys;
}

#undef DMM_INT
#undef DMM_DOUBLE
#undef DMM_SIZE

const Key* find_key(std::string_view name) {
  for (const Key& k : key_table()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

void finish(ExperimentConfig& c, const std::map<std::string, Setting>& settings) {
  auto where = [&](const char* key) {
    const auto it = settings.find(key);
    return it == settings.end() ? std::string("config") : it->second.where;
  };
  try {
    c.sim.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  if (c.trials && *c.trials < 1) throw ConfigError(where("trials") + ": trials must be >= 1");
  if (c.dmm_counts.empty()) throw ConfigError(where("dmm_counts") + ": dmm_counts must not be empty");
  for (int d : c.dmm_counts) {
    if (d < 1) throw ConfigError(where("dmm_counts") + ": dmm counts must be >= 1");
  }
  if (c.rebate_bps_list.empty()) throw ConfigError(where("rebate_bps_list") + ": rebate_bps_list must not be empty");
  for (int b : c.rebate_bps_list) {
    if (b < 0) throw ConfigError(where("rebate_bps_list") + ": rebates must be >= 0");
  }
  if (c.assets.empty()) throw ConfigError(where("assets") + ": assets must not be empty");
  for (const auto& a : c.assets) {
    if (!is_asset_preset(a) && a != c.sim.asset.ticker) {
      throw ConfigError(where("assets") + ": asset '" + a + "' is neither a preset nor the configured asset");
    }
  }
}

ExperimentConfig build(const std::map<std::string, Setting>& settings) {
  ExperimentConfig c;
  const auto asset = settings.find("asset");
  if (asset != settings.end() && !is_asset_preset(asset->second.value)) {
    for (const char* needed : {"annual_return", "annual_volatility"}) {
      if (!settings.contains(needed)) {
        throw ConfigError(asset->second.where + ": custom asset '" + asset->second.value + "' needs '" +
                          needed + "'");
      }
    }
  }
  for (const Key& key : key_table()) {
    const auto it = settings.find(key.name);
    if (it == settings.end()) continue;
    try {
      key.set(c, it->second.value);
    } catch (const std::exception& e) {
      throw ConfigError(it->second.where + ": '" + key.name + "' expects " + key.type + ", got '" +
                        it->second.value + "' (" + e.what() + ")");
    }
    if (key.name == "asset" && is_asset_preset(c.sim.asset.ticker)) {
      c.sim.asset = asset_preset(c.sim.asset.ticker, c.sim.asset.initial_price);
    }
  }
  if (!c.historical_path_file.empty()) {
    try {
      c.sim.historical_path = load_historical_path(c.historical_path_file);
    } catch (const std::exception& e) {
      throw ConfigError(settings.at("historical_path").where + ": " + e.what());
    }
  }
  finish(c, settings);
  return c;
}

void apply_overrides(std::map<std::string, Setting>& settings, const ConfigOverrides& overrides) {
  for (const auto& [key, value] : overrides) {
    if (!find_key(key)) throw ConfigError("command line: unknown key '" + key + "'");
    settings[key] = Setting{value, "command line (" + key + ")"};
  }
}

}  // namespace

const std::vector<std::string>& required_config_keys() {
  static const std::vector<std::string> keys{"rounds", "dmms", "rebate_bps", "asset"};
  return keys;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const Key& k : key_table()) out.push_back(k.name);
    return out;
  }();
  return keys;
}

ExperimentConfig parse_config(std::string_view text, const ConfigOverrides& overrides, const std::string& source) {
  std::map<std::string, Setting> settings;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(where + ": missing key");
    if (!find_key(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    if (const auto prev = settings.find(key); prev != settings.end()) {
      throw ConfigError(where + ": duplicate key '" + key + "' (first set at " + prev->second.where + ")");
    }
    settings.emplace(key, Setting{value, where});
  }
  apply_overrides(settings, overrides);
  for (const auto& key : required_config_keys()) {
    if (!settings.contains(key)) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": missing required key '" + key + "'");
    }
  }
  return build(settings);
}

ExperimentConfig load_config(const std::filesystem::path& file, const ConfigOverrides& overrides) {
  std::string text;
  try {
    text = read_text_file(file);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text, overrides, file.string());
}

ExperimentConfig default_config(const ConfigOverrides& overrides) {
  std::map<std::string, Setting> settings;
  apply_overrides(settings, overrides);
  return build(settings);
}

std::string echo_config(const ExperimentConfig& config) {
  std::string out;
  for (const Key& key : key_table()) {
    if (auto value = key.get(config)) out += key.name + " = " + *value + "\n";
  }
  return out;
}

}  // namespace dmmsim
