#include "commands.hpp"

#include <array>
#include <cmath>
#include <filesystem>
#include <set>

#include "csv.hpp"
#include "diiv/errors.hpp"
#include "diiv/linalg.hpp"
#include "kvio.hpp"

namespace diiv::cli {

namespace {

int exit_code_for(const Error& e) {
  const std::string& c = e.code();
  if (c == "NonBinary" || c == "InvalidInput") return kExitInput;
  return kExitEstimation;
}

const std::set<std::string> kConfigKeys = {
    "design", "s1", "s2", "preset", "sigma", "rho", "n", "trials", "seed",
    "shares.pi_A", "shares.pi_N", "shares.pi_C", "shares.pi_F",
    "effects.tau_A", "effects.tau_N", "effects.tau_C", "effects.tau_F",
    "kappa.C1", "kappa.C2", "kappa.F1", "kappa.F2"};

const char* kPresetControlled[] = {
    "sigma", "shares.pi_A", "shares.pi_N", "shares.pi_C", "shares.pi_F",
    "effects.tau_A", "effects.tau_N", "effects.tau_C", "effects.tau_F",
    "kappa.C1", "kappa.C2", "kappa.F1", "kappa.F2"};

int parse_sign(const std::string& text, const std::string& key) {
  if (text == "+1" || text == "1") return +1;
  if (text == "-1") return -1;
  throw InvalidInputError(key + " must be +1 or -1, got: " + text);
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  const KvFile kv = KvFile::parse_file(path);
  for (const auto& [key, value] : kv.entries()) {
    if (kConfigKeys.find(key) == kConfigKeys.end()) {
      throw InvalidInputError("unknown config key: " + key);
    }
  }

  RunConfig rc;
  if (kv.has("preset")) {
    const std::string name = kv.get_string("preset");
    const auto p = preset_from_name(name);
    if (!p) {
      throw InvalidInputError("unknown preset: " + name +
                              " (expected env-a|env-b|env-c|env-d)");
    }
    for (const char* key : kPresetControlled) {
      if (kv.has(key)) {
        throw InvalidInputError(std::string("key ") + key +
                                " conflicts with preset " + name);
      }
    }
    rc.preset = *p;
    rc.env = preset_config(*p);
  } else {
    rc.env.profile.pi_a = kv.get_double("shares.pi_A");
    rc.env.profile.pi_n = kv.get_double("shares.pi_N");
    rc.env.profile.pi_c = kv.get_double("shares.pi_C");
    rc.env.profile.pi_f = kv.get_double("shares.pi_F");
    rc.env.profile.tau_a = kv.get_double("effects.tau_A");
    rc.env.profile.tau_n = kv.get_double("effects.tau_N");
    rc.env.profile.tau_c = kv.get_double("effects.tau_C");
    rc.env.profile.tau_f = kv.get_double("effects.tau_F");
    rc.env.response.kappa[0][0] = kv.get_double("kappa.C1");
    rc.env.response.kappa[0][1] = kv.get_double("kappa.C2");
    rc.env.response.kappa[1][0] = kv.get_double("kappa.F1");
    rc.env.response.kappa[1][1] = kv.get_double("kappa.F2");
    rc.env.response.sigma = kv.get_double("sigma");
  }

  if (kv.has("rho")) rc.env.response.rho = kv.get_double("rho");
  if (kv.has("n")) rc.env.n = static_cast<std::size_t>(kv.get_uint("n"));
  if (kv.has("trials")) rc.env.trials = static_cast<std::size_t>(kv.get_uint("trials"));
  if (kv.has("seed")) rc.env.seed = kv.get_uint("seed");
  if (kv.has("design")) {
    const std::string d = kv.get_string("design");
    if (d == "parallel") {
      rc.env.design = SimDesign::parallel;
    } else if (d == "joint") {
      rc.env.design = SimDesign::joint;
    } else {
      throw InvalidInputError("design must be parallel or joint, got: " + d);
    }
  }
  if (kv.has("s1")) rc.design.s1 = parse_sign(kv.get_string("s1"), "s1");
  if (kv.has("s2")) rc.design.s2 = parse_sign(kv.get_string("s2"), "s2");

  rc.env.validate();
  return rc;
}

namespace {

void put_two_stage(KvWriter& w, const std::string& prefix,
                   const TwoStageReport& r) {
  w.put(prefix + "tau", r.tau);
  w.put(prefix + "se", r.se);
  w.put(prefix + "first_stage_beta", r.first_stage_beta);
  w.put(prefix + "first_stage_f", r.first_stage_f);
  w.put(prefix + "n", static_cast<std::uint64_t>(r.n));
}

// Intercept + listed covariates; shared by the companion estimators.
std::vector<NamedColumn> companion_included(const ObservationTable& t,
                                            const std::vector<std::string>& covs) {
  std::vector<NamedColumn> inc;
  inc.push_back(NamedColumn{"const", std::vector<double>(t.n(), 1.0)});
  for (const auto& name : covs) {
    const NamedColumn* c = t.find_covariate(name);
    if (c != nullptr) inc.push_back(*c);
  }
  return inc;
}

void companion_report(KvWriter& w, const std::string& prefix,
                      const ObservationTable& table, TableMode mode,
                      const std::vector<std::string>& covs, SeKind se_kind,
                      bool pooled) {
  try {
    std::vector<double> d(table.d.begin(), table.d.end());
    if (mode == TableMode::parallel && !pooled) {
      // Single instrument: frame-1 subsample, assignment as instrument.
      ObservationTable sub;
      for (std::size_t i = 0; i < table.n(); ++i) {
        if ((*table.h)[i] != 1) continue;
        sub.y.push_back(table.y[i]);
        sub.d.push_back(table.d[i]);
        sub.z1.push_back(table.z1[i]);
      }
      sub.h = BinaryColumn(sub.y.size(), 1);
      for (const auto& name : covs) {
        const NamedColumn* c = table.find_covariate(name);
        if (c == nullptr) continue;
        NamedColumn copy{name, {}};
        for (std::size_t i = 0; i < table.n(); ++i) {
          if ((*table.h)[i] == 1) copy.values.push_back(c->values[i]);
        }
        sub.covariates.push_back(std::move(copy));
      }
      if (sub.y.empty()) throw MissingCellError("frame 1 is empty");
      std::vector<double> dsub(sub.d.begin(), sub.d.end());
      auto inc = companion_included(sub, covs);
      NamedColumn inst{"z1", std::vector<double>(sub.z1.begin(), sub.z1.end())};
      put_two_stage(w, prefix,
                    two_stage_single(sub.y, dsub, inc, inst, se_kind,
                                     TwoStageMethod::parallel_xor));
      return;
    }
    auto inc = companion_included(table, covs);
    NamedColumn inst{"", {}};
    if (mode == TableMode::parallel) {
      // Pooled assignment across both frames.
      inst.name = "z_pool";
      inst.values.assign(table.z1.begin(), table.z1.end());
    } else if (!pooled) {
      inst.name = "z1";
      inst.values.assign(table.z1.begin(), table.z1.end());
    } else {
      // max{z1, z2} pooled encouragement.
      inst.name = "z_pool";
      inst.values.resize(table.n());
      for (std::size_t i = 0; i < table.n(); ++i) {
        inst.values[i] = std::max(table.z1[i], (*table.z2)[i]);
      }
    }
    put_two_stage(w, prefix,
                  two_stage_single(table.y, d, inc, inst, se_kind,
                                   mode == TableMode::parallel
                                       ? TwoStageMethod::parallel_xor
                                       : TwoStageMethod::joint_delta));
  } catch (const Error& e) {
    w.put(prefix + "error", e.code());
  }
}

}  // namespace

int cmd_estimate(const EstimateOptions& opt, std::ostream& out) {
  KvWriter w;
  int code = kExitOk;
  try {
    const CsvData csv = read_csv(opt.csv_path);
    LoadedTable loaded = table_from_csv(csv, opt.design, opt.covariates);
    const ObservationTable& table = loaded.table;
    const TableMode mode = loaded.mode;
    DirectedDesign design;
    design.s1 = opt.s1;
    design.s2 = opt.s2;

    TwoStageReport report =
        mode == TableMode::parallel
            ? two_stage_parallel(table, opt.se_kind, opt.covariates)
            : two_stage_joint(table, design, opt.se_kind, opt.covariates,
                              opt.drop_cross);

    // Cell-mean ratio path alongside the regression path.
    std::optional<DiivResult> ratio;
    std::string ratio_error;
    try {
      DiivResult r = diiv_estimate(table, mode, design);
      ratio = r;
    } catch (const Error& e) {
      ratio_error = e.code();
    }

    w.put("method", to_string(report.method));
    w.put("design", mode == TableMode::parallel ? "parallel" : "joint");
    if (mode == TableMode::joint) {
      w.put("s1", static_cast<std::int64_t>(design.s1));
      w.put("s2", static_cast<std::int64_t>(design.s2));
    }
    w.put("tau", report.tau);
    w.put("se", report.se);
    w.put("se_kind", to_string(report.se_kind));
    w.put("first_stage_beta", report.first_stage_beta);
    w.put("first_stage_f", report.first_stage_f);
    w.put("n", static_cast<std::uint64_t>(table.n()));

    // Raw cell counts.
    std::int64_t cells[2][2] = {{0, 0}, {0, 0}};
    if (mode == TableMode::parallel) {
      for (std::size_t i = 0; i < table.n(); ++i) {
        cells[table.z1[i]][(*table.h)[i]] += 1;
      }
      w.put("cells.z0_h0", cells[0][0]);
      w.put("cells.z1_h0", cells[1][0]);
      w.put("cells.z0_h1", cells[0][1]);
      w.put("cells.z1_h1", cells[1][1]);
    } else {
      for (std::size_t i = 0; i < table.n(); ++i) {
        cells[table.z1[i]][(*table.z2)[i]] += 1;
      }
      w.put("cells.z00", cells[0][0]);
      w.put("cells.z10", cells[1][0]);
      w.put("cells.z01", cells[0][1]);
      w.put("cells.z11", cells[1][1]);
    }

    std::string warnings;
    for (Warning warn : report.warnings) {
      if (!warnings.empty()) warnings += ',';
      warnings += to_string(warn);
    }
    if (ratio && ratio->ordering_violation) {
      if (!warnings.empty()) warnings += ',';
      warnings += to_string(Warning::ordering_violation);
    }
    w.put("warnings", warnings);

    if (ratio) {
      w.put("ratio.tau", ratio->tau);
      w.put("ratio.numerator", ratio->numerator);
      w.put("ratio.denominator", ratio->denominator);
    } else {
      w.put("ratio.error", ratio_error);
    }

    companion_report(w, "companion.single.", table, mode, opt.covariates,
                     opt.se_kind, /*pooled=*/false);
    companion_report(w, "companion.pool.", table, mode, opt.covariates,
                     opt.se_kind, /*pooled=*/true);
  } catch (const Error& e) {
    w.put("error", e.code());
    w.put("message", std::string(e.what()));
    code = exit_code_for(e);
  }

  out << w.text();
  if (opt.out_dir) {
    std::filesystem::create_directories(*opt.out_dir);
    write_file(*opt.out_dir + "/estimate_report.txt", w.text());
  }
  return code;
}

int cmd_simulate(const SimulateOptions& opt, std::ostream& out) {
  RunConfig rc;
  try {
    rc = load_run_config(opt.config_path);
    if (opt.seed_override) rc.env.seed = *opt.seed_override;
  } catch (const Error& e) {
    out << "error = " << e.code() << "\nmessage = " << e.what() << "\n";
    return kExitInput;
  }

  try {
    const MonteCarloSummary mc = run_monte_carlo(rc.env, opt.threads);

    std::string trials_csv = "trial,diiv,overidentified_iv,flagged\n";
    for (std::size_t t = 0; t < mc.trials.size(); ++t) {
      trials_csv += std::to_string(t);
      trials_csv += ',';
      trials_csv += format_double(mc.trials[t].diiv);
      trials_csv += ',';
      trials_csv += format_double(mc.trials[t].overid);
      trials_csv += ',';
      trials_csv += mc.trials[t].flagged ? '1' : '0';
      trials_csv += '\n';
    }

    KvWriter s;
    s.put("design", to_string(rc.env.design));
    if (rc.preset) s.put("preset", to_string(*rc.preset));
    s.put("n", static_cast<std::uint64_t>(rc.env.n));
    s.put("trials", static_cast<std::uint64_t>(rc.env.trials));
    s.put("seed", rc.env.seed);
    try {
      const AnalyticShares a = analytic_shares(rc.env);
      s.put("analytic.p_C1", a.p_c1);
      s.put("analytic.p_C2", a.p_c2);
      s.put("analytic.p_F1", a.p_f1);
      s.put("analytic.p_F2", a.p_f2);
      s.put("analytic.lambda", a.lambda);
      s.put("analytic.target_tau", a.target_tau);
      s.put("analytic.ordering", a.ordering_satisfied ? "satisfied" : "violated");
    } catch (const Error& e) {
      s.put("analytic.error", e.code());
    }
    const auto put_stats = [&s](const std::string& p, const SummaryStats& st) {
      s.put(p + ".mean", st.mean);
      s.put(p + ".sd", st.sd);
      const char* names[7] = {"q01", "q05", "q25", "q50", "q75", "q95", "q99"};
      for (int q = 0; q < 7; ++q) s.put(p + "." + names[q], st.quantiles[q]);
      s.put(p + ".trimmed_mean", st.trimmed_mean);
      s.put(p + ".trimmed_sd", st.trimmed_sd);
    };
    put_stats("diiv", mc.diiv);
    put_stats("overid", mc.overid);
    s.put("flagged", static_cast<std::uint64_t>(mc.flagged_count));

    std::string hist_csv = "estimator,bin_lo,bin_hi,count\n";
    const auto append_hist = [&hist_csv](const std::string& name,
                                         const Histogram& h) {
      for (std::size_t b = 0; b < h.counts.size(); ++b) {
        const double lo =
            static_cast<double>(h.first_bin + static_cast<std::int64_t>(b)) *
            h.bin_width;
        hist_csv += name;
        hist_csv += ',';
        hist_csv += format_double(lo);
        hist_csv += ',';
        hist_csv += format_double(lo + h.bin_width);
        hist_csv += ',';
        hist_csv += std::to_string(h.counts[b]);
        hist_csv += '\n';
      }
    };
    append_hist("diiv", mc.diiv_hist);
    append_hist("overid", mc.overid_hist);

    std::filesystem::create_directories(opt.out_dir);
    write_file(opt.out_dir + "/trials.csv", trials_csv);
    write_file(opt.out_dir + "/summary.txt", s.text());
    write_file(opt.out_dir + "/histogram.csv", hist_csv);
    out << s.text();
    return kExitOk;
  } catch (const Error& e) {
    out << "error = " << e.code() << "\nmessage = " << e.what() << "\n";
    return exit_code_for(e);
  }
}

int cmd_shares(const SharesOptions& opt, std::ostream& out) {
  RunConfig rc;
  try {
    rc = load_run_config(opt.config_path);
  } catch (const Error& e) {
    out << "error = " << e.code() << "\nmessage = " << e.what() << "\n";
    return kExitInput;
  }
  KvWriter w;
  try {
    const AnalyticShares a = analytic_shares(rc.env);
    w.put("p_C1", a.p_c1);
    w.put("p_C2", a.p_c2);
    w.put("p_F1", a.p_f1);
    w.put("p_F2", a.p_f2);
    w.put("lambda", a.lambda);
    w.put("target_tau", a.target_tau);
    w.put("ordering", a.ordering_satisfied ? "satisfied" : "violated");
    out << w.text();
    return kExitOk;
  } catch (const Error& e) {
    w.put("error", e.code());
    w.put("message", std::string(e.what()));
    out << w.text();
    return exit_code_for(e);
  }
}

}  // namespace diiv::cli
