#include "diiv/microsim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <span>
#include <thread>

#include "diiv/errors.hpp"
#include "diiv/linalg.hpp"
#include "diiv/normal.hpp"
#include "diiv/rng.hpp"
#include "diiv/twostage.hpp"

namespace diiv {

void TypeProfile::validate() const {
  const double shares[] = {pi_a, pi_n, pi_c, pi_f};
  double sum = 0.0;
  for (double s : shares) {
    if (s < 0.0) throw InvalidInputError("type shares must be nonnegative");
    sum += s;
  }
  if (std::fabs(sum - 1.0) > 1e-12) {
    throw InvalidInputError("type shares must sum to 1 (got " +
                            std::to_string(sum) + ")");
  }
}

double TypeProfile::share(BehavioralType t) const {
  switch (t) {
    case BehavioralType::always: return pi_a;
    case BehavioralType::never: return pi_n;
    case BehavioralType::persuasion: return pi_c;
    case BehavioralType::reactance: return pi_f;
  }
  return 0.0;
}

double TypeProfile::effect(BehavioralType t) const {
  switch (t) {
    case BehavioralType::always: return tau_a;
    case BehavioralType::never: return tau_n;
    case BehavioralType::persuasion: return tau_c;
    case BehavioralType::reactance: return tau_f;
  }
  return 0.0;
}

void ResponseSpec::validate() const {
  if (!(sigma > 0.0)) throw InvalidInputError("sigma must be positive");
  if (!(rho > -1.0 && rho < 1.0)) {
    throw InvalidInputError("rho must lie in (-1, 1)");
  }
}

std::string to_string(SimDesign d) {
  return d == SimDesign::parallel ? "parallel" : "joint";
}

void EnvironmentConfig::validate() const {
  profile.validate();
  response.validate();
  if (n < 2) throw InvalidInputError("n must be at least 2");
  if (trials < 1) throw InvalidInputError("trials must be at least 1");
}

std::optional<Preset> preset_from_name(const std::string& name) {
  if (name == "env-a") return Preset::env_a;
  if (name == "env-b") return Preset::env_b;
  if (name == "env-c") return Preset::env_c;
  if (name == "env-d") return Preset::env_d;
  return std::nullopt;
}

std::string to_string(Preset p) {
  switch (p) {
    case Preset::env_a: return "env-a";
    case Preset::env_b: return "env-b";
    case Preset::env_c: return "env-c";
    case Preset::env_d: return "env-d";
  }
  return "?";
}

EnvironmentConfig preset_config(Preset p) {
  EnvironmentConfig cfg;  // shares/effects/rho defaults are the common values
  switch (p) {
    case Preset::env_a:
      cfg.response.kappa = {{{2.0, 0.5}, {-0.2, -0.5}}};
      cfg.response.sigma = 2.0;
      break;
    case Preset::env_b:
      cfg.response.kappa = {{{0.5, 0.2}, {-0.5, -2.0}}};
      cfg.response.sigma = 2.0;
      break;
    case Preset::env_c:
      cfg.response.kappa = {{{2.0, 0.5}, {-0.2, -0.5}}};
      cfg.response.sigma = 1.0;
      break;
    case Preset::env_d:
      cfg.response.kappa = {{{0.5, 0.2}, {-0.5, -2.0}}};
      cfg.response.sigma = 1.0;
      break;
  }
  return cfg;
}

namespace {

// Probability mass of the eta interval a unit crosses when one
// instrument flips on at the baseline: |Phi((k - v)/sigma) - Phi(-v/sigma)|.
double edge_mass(double kappa, double threshold, double sigma) {
  if (kappa == 0.0) return 0.0;
  const double hi = normal_cdf((kappa - threshold) / sigma);
  const double lo = normal_cdf((-threshold) / sigma);
  return std::fabs(hi - lo);
}

}  // namespace

AnalyticShares analytic_shares(const EnvironmentConfig& config) {
  config.validate();
  const auto& r = config.response;
  AnalyticShares s;
  s.p_c1 = config.profile.pi_c * edge_mass(r.kappa[0][0], r.threshold, r.sigma);
  s.p_c2 = config.profile.pi_c * edge_mass(r.kappa[0][1], r.threshold, r.sigma);
  s.p_f1 = config.profile.pi_f * edge_mass(r.kappa[1][0], r.threshold, r.sigma);
  s.p_f2 = config.profile.pi_f * edge_mass(r.kappa[1][1], r.threshold, r.sigma);
  const double dc = s.p_c1 - s.p_c2;
  const double df = s.p_f1 - s.p_f2;
  const double den = dc - df;
  if (den <= kExactDegeneracyTol) {
    throw RelevanceViolatedError(
        "differential behavioral shift (pC1-pC2)-(pF1-pF2) = " +
        std::to_string(den) + " is not strictly positive");
  }
  s.lambda = dc / den;
  s.target_tau = s.lambda * config.profile.tau_c + (1.0 - s.lambda) * config.profile.tau_f;
  s.ordering_satisfied = (dc >= 0.0) && (df <= 0.0);
  return s;
}

TrialData simulate_trial(const EnvironmentConfig& config, std::uint64_t trial_index) {
  config.validate();
  const std::size_t n = config.n;
  const auto& prof = config.profile;
  const auto& resp = config.response;

  TrialData out;
  out.table.y.resize(n);
  out.table.d.resize(n);
  out.table.z1.resize(n);
  out.latent.type.resize(n);
  out.latent.eta.resize(n);
  out.latent.y0.resize(n);
  out.latent.y1.resize(n);

  const bool joint = (config.design == SimDesign::joint);
  if (joint) {
    out.table.z2.emplace(n);
  } else {
    out.table.h.emplace(n);
  }

  const double cum_a = prof.pi_a;
  const double cum_n = cum_a + prof.pi_n;
  const double cum_c = cum_n + prof.pi_c;

  TrialStream rng(config.seed, trial_index);
  for (std::size_t i = 0; i < n; ++i) {
    const double ut = rng.uniform_open01();
    BehavioralType type;
    if (ut < cum_a) {
      type = BehavioralType::always;
    } else if (ut < cum_n) {
      type = BehavioralType::never;
    } else if (ut < cum_c) {
      type = BehavioralType::persuasion;
    } else {
      type = BehavioralType::reactance;
    }
    out.latent.type[i] = type;

    std::uint8_t z1 = 0, z2 = 0, h = 0;
    if (joint) {
      const double e1 = rng.gaussian();
      const double e2 = rng.gaussian() + resp.rho * e1;
      z1 = e1 > 0.0 ? 1 : 0;
      z2 = e2 > 0.0 ? 1 : 0;
      out.table.z1[i] = z1;
      (*out.table.z2)[i] = z2;
    } else {
      h = rng.uniform_open01() < 0.5 ? 1 : 0;
      z1 = rng.uniform_open01() < 0.5 ? 1 : 0;
      out.table.z1[i] = z1;
      (*out.table.h)[i] = h;
    }

    const double eta = resp.sigma * rng.gaussian();
    const double eps = rng.gaussian();
    out.latent.eta[i] = eta;
    out.latent.y0[i] = eps;
    out.latent.y1[i] = prof.effect(type) + eps;

    std::uint8_t d = 0;
    switch (type) {
      case BehavioralType::always:
        d = 1;
        break;
      case BehavioralType::never:
        d = 0;
        break;
      case BehavioralType::persuasion:
      case BehavioralType::reactance: {
        const int row = (type == BehavioralType::persuasion) ? 0 : 1;
        double drive;
        if (joint) {
          drive = resp.kappa[row][0] * z1 + resp.kappa[row][1] * z2;
        } else {
          // frame 1 when h=1, frame 2 when h=0; the unit only sees its
          // frame's instrument
          const int instrument = (h == 1) ? 0 : 1;
          drive = resp.kappa[row][instrument] * z1;
        }
        d = (drive - resp.threshold > eta) ? 1 : 0;  // strict inequality
        break;
      }
    }
    out.table.d[i] = d;
    out.table.y[i] = d ? out.latent.y1[i] : out.latent.y0[i];
  }
  return out;
}

double overidentified_iv(const ObservationTable& table) {
  table.validate();
  if (!table.has_z2()) {
    throw InvalidInputError("over-identified IV requires both instruments");
  }
  const std::size_t n = table.n();
  Matrix zmat(n, 3);
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    zmat(i, 0) = 1.0;
    zmat(i, 1) = static_cast<double>(table.z1[i]);
    zmat(i, 2) = static_cast<double>((*table.z2)[i]);
    d[i] = static_cast<double>(table.d[i]);
  }
  OlsFit first = ols_solve(zmat, d, SeKind::classical);
  Matrix x2(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    x2(i, 0) = 1.0;
    x2(i, 1) = first.fitted[i];
  }
  OlsFit second = ols_solve(x2, table.y, SeKind::classical);
  return second.coef[1];
}

namespace {

TrialOutcome estimate_trial(const EnvironmentConfig& config, std::uint64_t t) {
  TrialData data = simulate_trial(config, t);
  TrialOutcome out;
  try {
    if (config.design == SimDesign::joint) {
      out.diiv = two_stage_joint(data.table, DirectedDesign{}, SeKind::robust_hc1).tau;
      out.overid = overidentified_iv(data.table);
    } else {
      out.diiv = two_stage_parallel(data.table, SeKind::robust_hc1).tau;
      // Pooling realizes the over-identified comparator in the parallel
      // design: intercept-only IV on the pooled assignment.
      const std::size_t n = data.table.n();
      Matrix zmat(n, 2);
      std::vector<double> d(n);
      for (std::size_t i = 0; i < n; ++i) {
        zmat(i, 0) = 1.0;
        zmat(i, 1) = static_cast<double>(data.table.z1[i]);
        d[i] = static_cast<double>(data.table.d[i]);
      }
      OlsFit first = ols_solve(zmat, d, SeKind::classical);
      Matrix x2(n, 2);
      for (std::size_t i = 0; i < n; ++i) {
        x2(i, 0) = 1.0;
        x2(i, 1) = first.fitted[i];
      }
      out.overid = ols_solve(x2, data.table.y, SeKind::classical).coef[1];
    }
  } catch (const Error&) {
    out.flagged = true;
    out.diiv = std::numeric_limits<double>::quiet_NaN();
    out.overid = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

SummaryStats summarize(std::vector<double> values) {
  SummaryStats s;
  const std::size_t m = values.size();
  if (m == 0) {
    s.mean = s.sd = s.trimmed_mean = s.trimmed_sd =
        std::numeric_limits<double>::quiet_NaN();
    s.quantiles.fill(std::numeric_limits<double>::quiet_NaN());
    return s;
  }
  std::sort(values.begin(), values.end());
  s.mean = pairwise_mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.sd = m > 1 ? std::sqrt(ss / static_cast<double>(m - 1)) : 0.0;

  const double probs[7] = {0.01, 0.05, 0.25, 0.50, 0.75, 0.95, 0.99};
  for (int q = 0; q < 7; ++q) {
    const double pos = probs[q] * static_cast<double>(m - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    s.quantiles[q] = (lo + 1 < m)
                         ? values[lo] * (1.0 - frac) + values[lo + 1] * frac
                         : values[lo];
  }

  const std::size_t cut = static_cast<std::size_t>(
      std::ceil(0.01 * static_cast<double>(m)));
  if (m > 2 * cut) {
    std::span<const double> mid(values.data() + cut, m - 2 * cut);
    s.trimmed_mean = pairwise_mean(mid);
    double tss = 0.0;
    for (double v : mid) tss += (v - s.trimmed_mean) * (v - s.trimmed_mean);
    s.trimmed_sd = mid.size() > 1
                       ? std::sqrt(tss / static_cast<double>(mid.size() - 1))
                       : 0.0;
  } else {
    s.trimmed_mean = s.mean;
    s.trimmed_sd = s.sd;
  }
  return s;
}

Histogram make_histogram(const std::vector<double>& values, double width) {
  Histogram h;
  h.bin_width = width;
  if (values.empty()) return h;
  std::int64_t lo = std::numeric_limits<std::int64_t>::max();
  std::int64_t hi = std::numeric_limits<std::int64_t>::min();
  std::vector<std::int64_t> bins(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    bins[i] = static_cast<std::int64_t>(std::floor(values[i] / width));
    lo = std::min(lo, bins[i]);
    hi = std::max(hi, bins[i]);
  }
  h.first_bin = lo;
  h.counts.assign(static_cast<std::size_t>(hi - lo + 1), 0);
  for (std::int64_t b : bins) h.counts[static_cast<std::size_t>(b - lo)] += 1;
  return h;
}

}  // namespace

MonteCarloSummary run_monte_carlo(const EnvironmentConfig& config, int threads) {
  config.validate();
  const std::size_t trials = config.trials;
  MonteCarloSummary summary;
  summary.trials.resize(trials);

  unsigned workers = threads > 0 ? static_cast<unsigned>(threads)
                                 : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, trials);

  if (workers <= 1) {
    for (std::size_t t = 0; t < trials; ++t) {
      summary.trials[t] = estimate_trial(config, t);
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        const std::size_t t = next.fetch_add(1);
        if (t >= trials) break;
        summary.trials[t] = estimate_trial(config, t);
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<double> diiv, overid;
  diiv.reserve(trials);
  overid.reserve(trials);
  for (const auto& t : summary.trials) {
    if (t.flagged) {
      ++summary.flagged_count;
    } else {
      diiv.push_back(t.diiv);
      overid.push_back(t.overid);
    }
  }
  summary.diiv = summarize(diiv);
  summary.overid = summarize(overid);
  summary.diiv_hist = make_histogram(diiv, 0.02);
  summary.overid_hist = make_histogram(overid, 0.02);
  return summary;
}

}  // namespace diiv
