#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <doctest.h>

#include "commands.hpp"
#include "csv.hpp"
#include "diiv/errors.hpp"
#include "diiv/microsim.hpp"
#include "diiv/twostage.hpp"
#include "kvio.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace diiv;
using namespace diiv::cli;

namespace {

fs::path temp_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("diiv_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

KvFile run_kv(int (*cmd)(const SharesOptions&, std::ostream&),
              const SharesOptions& opt, int expect_code) {
  std::ostringstream out;
  const int code = cmd(opt, out);
  CHECK(code == expect_code);
  return KvFile::parse_text(out.str());
}

}  // namespace

TEST_CASE("key/value parser essentials") {
  KvFile kv = KvFile::parse_text("# comment\na = 1\nb.c = -2.5\n\nname = env-a\n");
  CHECK(kv.get_int("a") == 1);
  CHECK(kv.get_double("b.c") == -2.5);
  CHECK(kv.get_string("name") == "env-a");
  CHECK_FALSE(kv.has("missing"));
  CHECK_THROWS_AS(kv.get_double("name"), InvalidInputError);
  CHECK_THROWS_AS(KvFile::parse_text("a = 1\na = 2\n"), InvalidInputError);
  CHECK_THROWS_AS(KvFile::parse_text("just text\n"), InvalidInputError);
}

TEST_CASE("double serialization round-trips exactly") {
  std::mt19937_64 g(83);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 500; ++i) {
    const double x = u(g) * std::pow(10.0, int(g() % 13) - 6);
    const std::string s = format_double(x);
    CHECK(std::stod(s) == x);
  }
  CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("run config: presets fix the environment block") {
  const fs::path dir = temp_dir("cfg");
  spit(dir / "ok.cfg", "preset = env-c\ntrials = 7\nn = 50\nseed = 9\n");
  RunConfig rc = load_run_config((dir / "ok.cfg").string());
  CHECK(rc.preset.has_value());
  CHECK(rc.env.response.sigma == 1.0);
  CHECK(rc.env.trials == 7);
  CHECK(rc.env.seed == 9);

  spit(dir / "mix.cfg", "preset = env-a\nsigma = 3\n");
  CHECK_THROWS_AS(load_run_config((dir / "mix.cfg").string()), InvalidInputError);
  spit(dir / "mix2.cfg", "preset = env-a\nshares.pi_C = 0.25\n");
  CHECK_THROWS_AS(load_run_config((dir / "mix2.cfg").string()), InvalidInputError);
  spit(dir / "unknown.cfg", "preset = env-a\nnope = 1\n");
  CHECK_THROWS_AS(load_run_config((dir / "unknown.cfg").string()), InvalidInputError);
  spit(dir / "badpreset.cfg", "preset = env-z\n");
  CHECK_THROWS_AS(load_run_config((dir / "badpreset.cfg").string()), InvalidInputError);
}

TEST_CASE("run config: explicit environments need the full block") {
  const fs::path dir = temp_dir("cfg2");
  const char* full =
      "design = joint\n"
      "shares.pi_A = 0.1\nshares.pi_N = 0.1\nshares.pi_C = 0.4\nshares.pi_F = 0.4\n"
      "effects.tau_A = 4\neffects.tau_N = 1\neffects.tau_C = 3\neffects.tau_F = 2\n"
      "kappa.C1 = 2.0\nkappa.C2 = 0.5\nkappa.F1 = -0.2\nkappa.F2 = -0.5\n"
      "sigma = 2\nrho = -0.45\nn = 100\ntrials = 3\nseed = 5\n";
  spit(dir / "full.cfg", full);
  RunConfig rc = load_run_config((dir / "full.cfg").string());
  CHECK(rc.env.response.kappa[0][0] == 2.0);
  CHECK(rc.env.response.kappa[1][1] == -0.5);

  spit(dir / "partial.cfg", "shares.pi_A = 0.1\nsigma = 2\n");
  CHECK_THROWS_AS(load_run_config((dir / "partial.cfg").string()),
                  InvalidInputError);
}

TEST_CASE("csv parsing is strict") {
  CHECK_THROWS_AS(parse_csv(""), InvalidInputError);
  CHECK_THROWS_AS(parse_csv("y,d\n"), InvalidInputError);
  CHECK_THROWS_AS(parse_csv("y,d\n1\n"), InvalidInputError);          // ragged
  CHECK_THROWS_AS(parse_csv("y,d\n1,x\n"), InvalidInputError);        // non-numeric
  CHECK_THROWS_AS(parse_csv("y,d\n1,\n"), InvalidInputError);         // empty field
  CsvData ok = parse_csv("y,d\n1.5,0\n2.5,1\n");
  CHECK(ok.rows() == 2);
  CHECK((*ok.find("y"))[1] == 2.5);
}

TEST_CASE("csv to table: schema rules") {
  CsvData missing_d = parse_csv("y,z1,h\n1,0,1\n");
  CHECK_THROWS_WITH_AS(table_from_csv(missing_d, std::nullopt, {}),
                       "missing column: d", InvalidInputError);
  CsvData no_design = parse_csv("y,d,z1\n1,0,1\n");
  CHECK_THROWS_AS(table_from_csv(no_design, std::nullopt, {}), InvalidInputError);
  CsvData nonbin = parse_csv("y,d,z1,h\n1,0.5,1,0\n");
  CHECK_THROWS_AS(table_from_csv(nonbin, std::nullopt, {}), NonBinaryError);

  CsvData joint = parse_csv("y,d,z1,z2,age\n1,0,1,0,33\n2,1,0,1,44\n");
  LoadedTable lt = table_from_csv(joint, std::nullopt, {});
  CHECK(lt.mode == TableMode::joint);
  CHECK(lt.table.covariates.empty());  // unlisted extras ignored
  LoadedTable with_cov = table_from_csv(joint, std::nullopt, {"age"});
  CHECK(with_cov.table.covariates.size() == 1);
  CHECK_THROWS_AS(table_from_csv(joint, std::nullopt, {"weight"}),
                  InvalidInputError);
  // forcing parallel without h fails
  CHECK_THROWS_AS(table_from_csv(joint, TableMode::parallel, {}),
                  InvalidInputError);
}

TEST_CASE("table CSV round-trip preserves every bit") {
  EnvironmentConfig cfg = preset_config(Preset::env_a);
  cfg.n = 300;
  TrialData t = simulate_trial(cfg, 2);
  const std::string text = table_to_csv(t.table);
  LoadedTable back = table_from_csv(parse_csv(text), std::nullopt, {});
  CHECK(back.table.y == t.table.y);
  CHECK(back.table.d == t.table.d);
  CHECK(back.table.z1 == t.table.z1);
  CHECK(*back.table.z2 == *t.table.z2);
}

TEST_CASE("cmd_estimate equals the library on a simulated trial") {
  const fs::path dir = temp_dir("est");
  EnvironmentConfig cfg = preset_config(Preset::env_a);
  cfg.n = 400;
  TrialData t = simulate_trial(cfg, 5);
  spit(dir / "trial.csv", table_to_csv(t.table));

  EstimateOptions opt;
  opt.csv_path = (dir / "trial.csv").string();
  std::ostringstream out;
  const int code = cmd_estimate(opt, out);
  CHECK(code == kExitOk);
  KvFile kv = KvFile::parse_text(out.str());

  const TwoStageReport direct =
      two_stage_joint(t.table, DirectedDesign{}, SeKind::robust_hc1);
  CHECK(std::fabs(kv.get_double("tau") - direct.tau) <= 1e-9);
  CHECK(kv.get_double("se") == direct.se);
  CHECK(kv.get_string("method") == "joint-delta");
  CHECK(kv.get_uint("n") == 400);

  const DiivResult ratio = diiv_estimate(t.table, TableMode::joint);
  CHECK(std::fabs(kv.get_double("ratio.tau") - ratio.tau) <= 1e-9);
  CHECK(kv.has("companion.single.tau"));
  CHECK(kv.has("companion.pool.tau"));

  // Report file written when --out is set.
  EstimateOptions opt2 = opt;
  opt2.out_dir = (dir / "rep").string();
  std::ostringstream out2;
  cmd_estimate(opt2, out2);
  CHECK(slurp(dir / "rep" / "estimate_report.txt") == out2.str());
}

TEST_CASE("cmd_estimate on a parallel CSV reproduces the ratio path") {
  const fs::path dir = temp_dir("estp");
  const auto pop = oracles::enumerated_population();
  spit(dir / "pop.csv", table_to_csv(pop.table));
  EstimateOptions opt;
  opt.csv_path = (dir / "pop.csv").string();
  std::ostringstream out;
  CHECK(cmd_estimate(opt, out) == kExitOk);
  KvFile kv = KvFile::parse_text(out.str());
  CHECK(kv.get_string("method") == "parallel-xor");
  CHECK(kv.get_double("ratio.tau") == 2.5);  // balanced dyadic table
  CHECK(std::fabs(kv.get_double("tau") - 2.5) <= 1e-9);
  CHECK(kv.get_uint("cells.z1_h1") == 16);
}

TEST_CASE("cmd_estimate surfaces estimation failures as exit 1") {
  const fs::path dir = temp_dir("est2");
  // Identical first stages in both arms: d tracks z exactly.
  spit(dir / "flat.csv",
       "y,d,z1,h\n"
       "1,1,1,1\n0.4,0,0,1\n0.8,1,1,1\n0.1,0,0,1\n"
       "0.9,1,1,0\n0.2,0,0,0\n0.7,1,1,0\n0.3,0,0,0\n");
  EstimateOptions opt;
  opt.csv_path = (dir / "flat.csv").string();
  std::ostringstream out;
  CHECK(cmd_estimate(opt, out) == kExitEstimation);
  KvFile kv = KvFile::parse_text(out.str());
  CHECK(kv.get_string("error") == "ZeroDenominator");
}

TEST_CASE("cmd_estimate surfaces schema failures as exit 2") {
  const fs::path dir = temp_dir("est3");
  spit(dir / "bad.csv", "y,z1,h\n1,0,1\n");
  EstimateOptions opt;
  opt.csv_path = (dir / "bad.csv").string();
  std::ostringstream out;
  CHECK(cmd_estimate(opt, out) == kExitInput);
  KvFile kv = KvFile::parse_text(out.str());
  CHECK(kv.get_string("error") == "InvalidInput");
  CHECK(kv.get_string("message") == "missing column: d");
}

TEST_CASE("cmd_simulate writes deterministic files") {
  const fs::path dir = temp_dir("sim");
  spit(dir / "run.cfg", "preset = env-b\ntrials = 5\nn = 120\nseed = 3\n");

  SimulateOptions opt;
  opt.config_path = (dir / "run.cfg").string();
  opt.out_dir = (dir / "out1").string();
  opt.threads = 3;
  std::ostringstream out1;
  CHECK(cmd_simulate(opt, out1) == kExitOk);

  opt.out_dir = (dir / "out2").string();
  opt.threads = 1;
  std::ostringstream out2;
  CHECK(cmd_simulate(opt, out2) == kExitOk);

  for (const char* f : {"trials.csv", "summary.txt", "histogram.csv"}) {
    CHECK(slurp(dir / "out1" / f) == slurp(dir / "out2" / f));
  }
  CHECK(out1.str() == out2.str());

  // Per-trial file has exactly `trials` data rows.
  std::istringstream trials(slurp(dir / "out1" / "trials.csv"));
  std::string line;
  int rows = -1;  // header
  while (std::getline(trials, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 5);

  KvFile summary = KvFile::parse_text(slurp(dir / "out1" / "summary.txt"));
  CHECK(summary.get_uint("trials") == 5);
  CHECK(summary.get_uint("seed") == 3);
  CHECK(summary.get_double("analytic.lambda") ==
        doctest::Approx(0.195).epsilon(6e-3));

  // Seed override changes the draw stream.
  SimulateOptions reseeded = opt;
  reseeded.out_dir = (dir / "out3").string();
  reseeded.seed_override = 99;
  std::ostringstream out3;
  CHECK(cmd_simulate(reseeded, out3) == kExitOk);
  CHECK(slurp(dir / "out3" / "trials.csv") != slurp(dir / "out1" / "trials.csv"));

  // Config errors exit 2.
  SimulateOptions bad = opt;
  bad.config_path = (dir / "missing.cfg").string();
  std::ostringstream sink;
  CHECK(cmd_simulate(bad, sink) == kExitInput);
}

TEST_CASE("cmd_shares prints reference weights and the ordering verdict") {
  const fs::path dir = temp_dir("shares");
  spit(dir / "c.cfg", "preset = env-c\n");
  SharesOptions opt{(dir / "c.cfg").string()};
  KvFile kv = run_kv(&cmd_shares, opt, kExitOk);
  CHECK(kv.get_double("lambda") == doctest::Approx(0.718).epsilon(2e-3));
  CHECK(kv.get_string("ordering") == "satisfied");

  spit(dir / "b.cfg", "preset = env-b\n");
  KvFile kvb = run_kv(&cmd_shares, SharesOptions{(dir / "b.cfg").string()}, kExitOk);
  CHECK(kvb.get_double("lambda") == doctest::Approx(0.195).epsilon(3e-3));

  // All-zero responsiveness: relevance fails, exit 1.
  spit(dir / "zero.cfg",
       "shares.pi_A = 0.1\nshares.pi_N = 0.1\nshares.pi_C = 0.4\nshares.pi_F = 0.4\n"
       "effects.tau_A = 4\neffects.tau_N = 1\neffects.tau_C = 3\neffects.tau_F = 2\n"
       "kappa.C1 = 0\nkappa.C2 = 0\nkappa.F1 = 0\nkappa.F2 = 0\nsigma = 1\n");
  KvFile kvz =
      run_kv(&cmd_shares, SharesOptions{(dir / "zero.cfg").string()}, kExitEstimation);
  CHECK(kvz.get_string("error") == "RelevanceViolated");
}

#ifdef DIIV_CLI_PATH
TEST_CASE("binary exit codes match the contract") {
  const fs::path dir = temp_dir("bin");
  spit(dir / "bad.csv", "y,z1,h\n1,0,1\n");
  const std::string base = std::string(DIIV_CLI_PATH);
  auto run = [](const std::string& cmd) {
    const int status = std::system((cmd + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
  };
  CHECK(run(base + " estimate " + (dir / "bad.csv").string()) == 2);

  spit(dir / "flat.csv",
       "y,d,z1,h\n"
       "1,1,1,1\n0.4,0,0,1\n0.8,1,1,1\n0.1,0,0,1\n"
       "0.9,1,1,0\n0.2,0,0,0\n0.7,1,1,0\n0.3,0,0,0\n");
  CHECK(run(base + " estimate " + (dir / "flat.csv").string()) == 1);

  spit(dir / "ok.cfg", "preset = env-a\ntrials = 2\nn = 80\n");
  CHECK(run(base + " shares " + (dir / "ok.cfg").string()) == 0);
  CHECK(run(base + " simulate " + (dir / "ok.cfg").string() + " --out " +
            (dir / "out").string()) == 0);
  CHECK(run(base + " nonsense") == 2);
}
#endif
