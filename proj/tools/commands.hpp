#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "diiv/estimand.hpp"
#include "diiv/microsim.hpp"
#include "diiv/twostage.hpp"

namespace diiv::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitEstimation = 1;
inline constexpr int kExitInput = 2;

// Parsed run configuration (flat key/value file, optional preset).
struct RunConfig {
  EnvironmentConfig env;
  DirectedDesign design;
  std::optional<Preset> preset;
};

// Loads and validates a config file. A preset fixes shares, effects,
// kappa and sigma; explicit keys for any of those alongside a preset
// are rejected. Throws InvalidInputError on any problem.
RunConfig load_run_config(const std::string& path);

struct EstimateOptions {
  std::string csv_path;
  std::optional<TableMode> design;
  int s1 = +1;
  int s2 = +1;
  std::vector<std::string> covariates;
  SeKind se_kind = SeKind::robust_hc1;
  bool drop_cross = false;
  std::optional<std::string> out_dir;
};

struct SimulateOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed_override;
  int threads = 0;
};

struct SharesOptions {
  std::string config_path;
};

// Each command prints its report to `out` (and, for estimate/simulate,
// writes files under the output directory) and returns the exit code.
int cmd_estimate(const EstimateOptions& opt, std::ostream& out);
int cmd_simulate(const SimulateOptions& opt, std::ostream& out);
int cmd_shares(const SharesOptions& opt, std::ostream& out);

}  // namespace diiv::cli
