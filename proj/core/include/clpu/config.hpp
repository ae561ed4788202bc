#pragma once

#include <string>

#include "clpu/clpu.hpp"
#include "clpu/etpsim.hpp"
#include "clpu/harness.hpp"
#include "clpu/order_select.hpp"
#include "clpu/series.hpp"

namespace clpu {

// Central configuration. File values override the defaults below; CLPU_*
// environment variables override the file; CLI flags override everything.
struct Config {
  SearchConfig search;
  CsvSchema csv;
  int delta_minutes = 15;
  int horizon_cap = 48;
  ClpuConfig clpu;
  BacktestConfig backtest;
  EtpSuiteConfig etp;
  // House defaults for the simulator; see etpsim::default_house for the
  // provenance notes on the numeric choices.
  EtpHouseParams house;
  std::string output_directory = "out";
};

Config default_config();

// TOML-style sections and key = value lines; '#' starts a comment. Unknown
// keys are rejected with a ConfigError naming the key.
Config parse_config(const std::string& text);
Config load_config(const std::string& path);

// Applies CLPU_<SECTION>_<KEY> environment variables onto config.
void apply_env_overrides(Config& config);

}  // namespace clpu
