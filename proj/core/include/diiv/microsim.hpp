#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "diiv/estimand.hpp"
#include "diiv/table.hpp"

namespace diiv {

enum class BehavioralType : std::uint8_t { always = 0, never = 1, persuasion = 2, reactance = 3 };

// Population composition: shares must be nonnegative and sum to 1
// within 1e-12; effects are per-type expected outcome gains.
struct TypeProfile {
  double pi_a = 0.1, pi_n = 0.1, pi_c = 0.4, pi_f = 0.4;
  double tau_a = 4.0, tau_n = 1.0, tau_c = 3.0, tau_f = 2.0;

  void validate() const;
  double share(BehavioralType t) const;
  double effect(BehavioralType t) const;
};

// Signed responsiveness of the behavioral types to each instrument
// (directive already folded in: persuasion rows >= 0, reactance <= 0
// in the presets), plus the shock scale, the latent instrument
// correlation and the take-up threshold.
struct ResponseSpec {
  // kappa[type][instrument]: type 0 = persuasion-prone, 1 = reactance-prone.
  std::array<std::array<double, 2>, 2> kappa{{{2.0, 0.5}, {-0.2, -0.5}}};
  double sigma = 2.0;
  double rho = -0.45;
  double threshold = 0.0;

  void validate() const;
};

enum class SimDesign { parallel, joint };

std::string to_string(SimDesign d);

struct EnvironmentConfig {
  TypeProfile profile;
  ResponseSpec response;
  std::size_t n = 10000;
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  SimDesign design = SimDesign::joint;

  void validate() const;
};

// The four built-in study environments (a-d). Shares, effects, rho and
// the threshold are common; kappa and sigma vary.
enum class Preset { env_a, env_b, env_c, env_d };

std::optional<Preset> preset_from_name(const std::string& name);
std::string to_string(Preset p);
EnvironmentConfig preset_config(Preset p);

// Population-level single-edge shshare quadruple with the implied
// convex weight and target estimand.
struct AnalyticShares {
  double p_c1 = 0, p_c2 = 0, p_f1 = 0, p_f2 = 0;
  double lambda = 0;
  double target_tau = 0;
  bool ordering_satisfied = true;
};

AnalyticShares analytic_shares(const EnvironmentConfig& config);

// Latent per-unit simulation record kept alongside the observed table
// for oracle checks (types, shocks, both potential outcomes).
struct LatentRecord {
  std::vector<BehavioralType> type;
  std::vector<double> eta;
  std::vector<double> y0;
  std::vector<double> y1;
};

struct TrialData {
  ObservationTable table;
  LatentRecord latent;
};

// One synthetic experiment, deterministic in (config, trial_index).
// Draw protocol per unit (fixed): type uniform; instruments (joint:
// two latent gaussians, parallel: two uniforms for frame and
// assignment); eta gaussian; outcome shock gaussian.
TrialData simulate_trial(const EnvironmentConfig& config, std::uint64_t trial_index);

// Standard over-identified 2SLS of y on d with intercept and both raw
// instruments excluded. Point estimate only.
double overidentified_iv(const ObservationTable& table);

struct SummaryStats {
  double mean = 0, sd = 0;
  // type-7 quantiles at 1, 5, 25, 50, 75, 95, 99 percent
  std::array<double, 7> quantiles{};
  double trimmed_mean = 0, trimmed_sd = 0;  // 1% per tail
};

struct Histogram {
  double bin_width = 0.02;
  std::int64_t first_bin = 0;  // left edge = first_bin * bin_width
  std::vector<std::int64_t> counts;
};

struct TrialOutcome {
  double diiv = 0;
  double overid = 0;
  bool flagged = false;
};

struct MonteCarloSummary {
  std::vector<TrialOutcome> trials;
  SummaryStats diiv;
  SummaryStats overid;
  Histogram diiv_hist;
  Histogram overid_hist;
  std::size_t flagged_count = 0;
};

// Runs config.trials independent trials (DIIV via the design-matched
// two-stage path, plus the standard comparator), optionally across
// threads. The comparator is over-identified 2SLS on (z1, z2) in the
// joint design and the pooled-assignment IV in the parallel design.
// Results are keyed by trial index, so the summary is identical for any
// thread count. Trials whose estimation degenerates are flagged and
// excluded from the moments.
MonteCarloSummary run_monte_carlo(const EnvironmentConfig& config, int threads = 0);

}  // namespace diiv
