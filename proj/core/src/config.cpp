#include "clpu/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <utility>
#include <vector>

#include "clpu/errors.hpp"

namespace clpu {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b])) != 0) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])) != 0) --e;
  return s.substr(b, e - b);
}

std::string strip_quotes(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

// Cuts a trailing comment, respecting quoted strings.
std::string strip_comment(const std::string& line) {
  bool in_quote = false;
  char quote = '\0';
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quote) {
      if (c == quote) in_quote = false;
    } else if (c == '"' || c == '\'') {
      in_quote = true;
      quote = c;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

long long parse_int(const std::string& raw, const std::string& key) {
  const std::string v = strip_quotes(trim(raw));
  char* end = nullptr;
  const long long n = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || end == nullptr || *end != '\0')
    throw ConfigError("invalid integer for " + key + ": " + raw);
  return n;
}

double parse_double(const std::string& raw, const std::string& key) {
  const std::string v = strip_quotes(trim(raw));
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end == nullptr || *end != '\0')
    throw ConfigError("invalid number for " + key + ": " + raw);
  return d;
}

bool parse_bool(const std::string& raw, const std::string& key) {
  const std::string v = strip_quotes(trim(raw));
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("invalid boolean for " + key + ": " + raw);
}

std::string parse_string(const std::string& raw) { return strip_quotes(trim(raw)); }

using Setter = std::function<void(Config&, const std::string&, const std::string&)>;

struct KeyEntry {
  const char* key;
  Setter set;
};

std::vector<Method> parse_methods(const std::string& raw, const std::string& key) {
  std::vector<Method> out;
  std::stringstream ss(strip_quotes(trim(raw)));
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string name = trim(item);
    if (name.empty()) continue;
    out.push_back(method_from_name(name));
  }
  if (out.empty()) throw ConfigError("no methods listed for " + key);
  return out;
}

const std::vector<KeyEntry>& key_table() {
  static const std::vector<KeyEntry> table = {
      {"search.p_limit",
       [](Config& c, const std::string& r, const std::string& k) {
         c.search.p_limit = static_cast<int>(parse_int(r, k));
       }},
      {"search.q_limit",
       [](Config& c, const std::string& r, const std::string& k) {
         c.search.q_limit = static_cast<int>(parse_int(r, k));
       }},
      {"search.d_max",
       [](Config& c, const std::string& r, const std::string& k) {
         c.search.d_max = static_cast<int>(parse_int(r, k));
       }},
      {"search.ci_level",
       [](Config& c, const std::string& r, const std::string& k) {
         c.search.ci_level = parse_double(r, k);
       }},
      {"search.mse_improvement_threshold",
       [](Config& c, const std::string& r, const std::string& k) {
         c.search.mse_improvement_threshold = parse_double(r, k);
       }},
      {"search.holdout_horizon_steps",
       [](Config& c, const std::string& r, const std::string& k) {
         c.search.holdout_horizon_steps = static_cast<int>(parse_int(r, k));
       }},
      {"search.criterion",
       [](Config& c, const std::string& r, const std::string& k) {
         const std::string v = parse_string(r);
         if (v == "holdout_mse")
           c.search.criterion = SearchCriterion::holdout_mse;
         else if (v == "aic")
           c.search.criterion = SearchCriterion::aic;
         else
           throw ConfigError("invalid criterion for " + k + ": " + v);
       }},
      {"search.jobs",
       [](Config& c, const std::string& r, const std::string& k) {
         c.search.jobs = static_cast<int>(parse_int(r, k));
       }},
      {"series.delta_minutes",
       [](Config& c, const std::string& r, const std::string& k) {
         c.delta_minutes = static_cast<int>(parse_int(r, k));
       }},
      {"series.timestamp_column",
       [](Config& c, const std::string& r, const std::string&) {
         c.csv.timestamp_column = parse_string(r);
       }},
      {"series.energy_column",
       [](Config& c, const std::string& r, const std::string&) {
         c.csv.energy_column = parse_string(r);
       }},
      {"series.gap_fill_limit",
       [](Config& c, const std::string& r, const std::string& k) {
         c.csv.gap_fill_limit = static_cast<int>(parse_int(r, k));
       }},
      {"forecast.horizon_cap",
       [](Config& c, const std::string& r, const std::string& k) {
         c.horizon_cap = static_cast<int>(parse_int(r, k));
       }},
      {"clpu.n_lags",
       [](Config& c, const std::string& r, const std::string& k) {
         c.clpu.n_lags = static_cast<int>(parse_int(r, k));
       }},
      {"clpu.staleness_days",
       [](Config& c, const std::string& r, const std::string& k) {
         c.clpu.staleness_days = static_cast<int>(parse_int(r, k));
       }},
      {"clpu.zero_peak_floor_kw",
       [](Config& c, const std::string& r, const std::string& k) {
         c.clpu.zero_peak_floor_kw = parse_double(r, k);
       }},
      {"clpu.peak_intercept",
       [](Config& c, const std::string& r, const std::string& k) {
         c.clpu.peak_intercept = parse_bool(r, k);
       }},
      {"harness.step_minutes",
       [](Config& c, const std::string& r, const std::string& k) {
         c.backtest.step_minutes = static_cast<int>(parse_int(r, k));
       }},
      {"harness.horizon_steps",
       [](Config& c, const std::string& r, const std::string& k) {
         c.backtest.horizon_steps = static_cast<int>(parse_int(r, k));
       }},
      {"harness.train_days",
       [](Config& c, const std::string& r, const std::string& k) {
         c.backtest.train_window_days = parse_double(r, k);
       }},
      {"harness.refresh_days",
       [](Config& c, const std::string& r, const std::string& k) {
         c.backtest.refresh_days = static_cast<int>(parse_int(r, k));
       }},
      {"harness.refresh_policy",
       [](Config& c, const std::string& r, const std::string& k) {
         const std::string v = parse_string(r);
         if (v == "weekly_or_divergence")
           c.backtest.refresh_policy = RefreshPolicy::weekly_or_divergence;
         else if (v == "fixed_order")
           c.backtest.refresh_policy = RefreshPolicy::fixed_order;
         else
           throw ConfigError("invalid refresh policy for " + k + ": " + v);
       }},
      {"harness.methods",
       [](Config& c, const std::string& r, const std::string& k) {
         c.backtest.methods = parse_methods(r, k);
       }},
      {"harness.jobs",
       [](Config& c, const std::string& r, const std::string& k) {
         c.backtest.jobs = static_cast<int>(parse_int(r, k));
       }},
      {"etp.n_houses",
       [](Config& c, const std::string& r, const std::string& k) {
         c.etp.n_houses = static_cast<int>(parse_int(r, k));
       }},
      {"etp.clean_days",
       [](Config& c, const std::string& r, const std::string& k) {
         c.etp.clean_days = static_cast<int>(parse_int(r, k));
       }},
      {"etp.jitter_fraction",
       [](Config& c, const std::string& r, const std::string& k) {
         c.etp.jitter_fraction = parse_double(r, k);
       }},
      {"etp.t_mean",
       [](Config& c, const std::string& r, const std::string& k) {
         c.etp.t_mean = parse_double(r, k);
       }},
      {"etp.t_amplitude",
       [](Config& c, const std::string& r, const std::string& k) {
         c.etp.t_amplitude = parse_double(r, k);
       }},
      {"etp.t_noise_std",
       [](Config& c, const std::string& r, const std::string& k) {
         c.etp.t_noise_std = parse_double(r, k);
       }},
      {"etp.outage_min_hours",
       [](Config& c, const std::string& r, const std::string& k) {
         c.etp.outage_min_hours = static_cast<int>(parse_int(r, k));
       }},
      {"etp.outage_max_hours",
       [](Config& c, const std::string& r, const std::string& k) {
         c.etp.outage_max_hours = static_cast<int>(parse_int(r, k));
       }},
      {"etp.outage_start_hour",
       [](Config& c, const std::string& r, const std::string& k) {
         c.etp.outage_start_hour = static_cast<int>(parse_int(r, k));
       }},
      {"etp.meter_delta_minutes",
       [](Config& c, const std::string& r, const std::string& k) {
         c.etp.meter_delta_minutes = static_cast<int>(parse_int(r, k));
       }},
      {"etp.u_a",
       [](Config& c, const std::string& r, const std::string& k) {
         c.house.U_A = parse_double(r, k);
       }},
      {"etp.c_a",
       [](Config& c, const std::string& r, const std::string& k) {
         c.house.C_A = parse_double(r, k);
       }},
      {"etp.h_m",
       [](Config& c, const std::string& r, const std::string& k) {
         c.house.H_M = parse_double(r, k);
       }},
      {"etp.c_m",
       [](Config& c, const std::string& r, const std::string& k) {
         c.house.C_M = parse_double(r, k);
       }},
      {"etp.q_internal",
       [](Config& c, const std::string& r, const std::string& k) {
         c.house.Q_internal = parse_double(r, k);
       }},
      {"etp.gain_air_fraction",
       [](Config& c, const std::string& r, const std::string& k) {
         c.house.gain_air_fraction = parse_double(r, k);
       }},
      {"etp.gain_mass_fraction",
       [](Config& c, const std::string& r, const std::string& k) {
         c.house.gain_mass_fraction = parse_double(r, k);
       }},
      {"etp.heater_rating",
       [](Config& c, const std::string& r, const std::string& k) {
         c.house.heater_rating = parse_double(r, k);
       }},
      {"etp.setpoint",
       [](Config& c, const std::string& r, const std::string& k) {
         c.house.setpoint = parse_double(r, k);
       }},
      {"etp.deadband",
       [](Config& c, const std::string& r, const std::string& k) {
         c.house.deadband = parse_double(r, k);
       }},
      {"etp.water_heater_rating",
       [](Config& c, const std::string& r, const std::string& k) {
         c.house.water_heater_rating = parse_double(r, k);
       }},
      {"etp.tank_capacity",
       [](Config& c, const std::string& r, const std::string& k) {
         c.house.tank_capacity = parse_double(r, k);
       }},
      {"etp.tank_setpoint",
       [](Config& c, const std::string& r, const std::string& k) {
         c.house.tank_setpoint = parse_double(r, k);
       }},
      {"etp.tank_deadband",
       [](Config& c, const std::string& r, const std::string& k) {
         c.house.tank_deadband = parse_double(r, k);
       }},
      {"etp.tank_loss",
       [](Config& c, const std::string& r, const std::string& k) {
         c.house.tank_loss = parse_double(r, k);
       }},
      {"output.directory",
       [](Config& c, const std::string& r, const std::string&) {
         c.output_directory = parse_string(r);
       }},
  };
  return table;
}

const Setter* find_setter(const std::string& key) {
  for (const KeyEntry& entry : key_table())
    if (key == entry.key) return &entry.set;
  return nullptr;
}

// The search config is duplicated into the backtest config so harness callers
// see one consistent object.
void finalize(Config& config) { config.backtest.search = config.search; }

std::string env_name(const std::string& key) {
  std::string name = "CLPU_";
  for (char c : key) {
    if (c == '.')
      name += '_';
    else
      name += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return name;
}

}  // namespace

Config default_config() {
  Config config;
  config.house = default_house();
  finalize(config);
  return config;
}

Config parse_config(const std::string& text) {
  Config config = default_config();
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']')
        throw ConfigError("malformed section header at line " + std::to_string(lineno));
      section = trim(body.substr(1, body.size() - 2));
      if (section.empty())
        throw ConfigError("empty section name at line " + std::to_string(lineno));
      continue;
    }
    const std::size_t eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value at line " + std::to_string(lineno));
    const std::string key = trim(body.substr(0, eq));
    const std::string raw = trim(body.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key at line " + std::to_string(lineno));
    const std::string full = section.empty() ? key : section + "." + key;
    const Setter* setter = find_setter(full);
    if (setter == nullptr) throw ConfigError("unknown key: " + full);
    (*setter)(config, raw, full);
  }
  finalize(config);
  return config;
}

Config load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

void apply_env_overrides(Config& config) {
  for (const KeyEntry& entry : key_table()) {
    const char* value = std::getenv(env_name(entry.key).c_str());
    if (value != nullptr) entry.set(config, value, entry.key);
  }
  finalize(config);
}

}  // namespace clpu
