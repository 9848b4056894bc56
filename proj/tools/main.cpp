#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

diiv::TableMode mode_from_string(const std::string& s) {
  return s == "parallel" ? diiv::TableMode::parallel : diiv::TableMode::joint;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DIIV toolkit: two-instrument estimation, analytic shares and "
               "Monte Carlo studies"};
  app.require_subcommand(1);

  // estimate
  auto* est = app.add_subcommand("estimate", "Estimate from a CSV dataset");
  std::string csv_path;
  std::string design_str;
  std::string s1_str = "+1", s2_str = "+1";
  std::string covariates_str;
  std::string se_str = "robust";
  bool drop_cross = false;
  std::string est_out;
  est->add_option("csv", csv_path, "input CSV file")->required();
  est->add_option("--design", design_str, "table layout")
      ->check(CLI::IsMember({"parallel", "joint"}));
  est->add_option("--s1", s1_str, "directive of instrument 1 (+1|-1)");
  est->add_option("--s2", s2_str, "directive of instrument 2 (+1|-1)");
  est->add_option("--covariates", covariates_str,
                  "comma-separated covariate column names");
  est->add_option("--se", se_str, "standard-error kind")
      ->check(CLI::IsMember({"classical", "robust"}));
  est->add_flag("--drop-cross", drop_cross,
                "exclude the product regressor from the joint system");
  est->add_option("--out", est_out, "directory for estimate_report.txt");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run a Monte Carlo study");
  std::string sim_config;
  std::string sim_out;
  std::uint64_t sim_seed = 0;
  bool sim_seed_set = false;
  int threads = 0;
  sim->add_option("config", sim_config, "run configuration file")->required();
  sim->add_option("--out", sim_out, "output directory")->required();
  sim->add_option("--seed", sim_seed, "override the config seed")
      ->each([&](const std::string&) { sim_seed_set = true; });
  sim->add_option("--threads", threads, "worker threads (0 = hardware)");

  // shares
  auto* sh = app.add_subcommand("shares", "Analytic shares and convex weight");
  std::string shares_config;
  sh->add_option("config", shares_config, "run configuration file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return diiv::cli::kExitInput;
  }

  if (est->parsed()) {
    diiv::cli::EstimateOptions opt;
    opt.csv_path = csv_path;
    if (!design_str.empty()) opt.design = mode_from_string(design_str);
    opt.s1 = (s1_str == "-1") ? -1 : +1;
    opt.s2 = (s2_str == "-1") ? -1 : +1;
    if ((s1_str != "-1" && s1_str != "+1" && s1_str != "1") ||
        (s2_str != "-1" && s2_str != "+1" && s2_str != "1")) {
      std::cerr << "error: --s1/--s2 must be +1 or -1\n";
      return diiv::cli::kExitInput;
    }
    if (!covariates_str.empty()) {
      std::size_t start = 0;
      for (;;) {
        const std::size_t comma = covariates_str.find(',', start);
        opt.covariates.push_back(covariates_str.substr(
            start, comma == std::string::npos ? comma : comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
    }
    opt.se_kind = (se_str == "classical") ? diiv::SeKind::classical
                                          : diiv::SeKind::robust_hc1;
    opt.drop_cross = drop_cross;
    if (!est_out.empty()) opt.out_dir = est_out;
    return diiv::cli::cmd_estimate(opt, std::cout);
  }

  if (sim->parsed()) {
    diiv::cli::SimulateOptions opt;
    opt.config_path = sim_config;
    opt.out_dir = sim_out;
    if (sim_seed_set) opt.seed_override = sim_seed;
    opt.threads = threads;
    return diiv::cli::cmd_simulate(opt, std::cout);
  }

  diiv::cli::SharesOptions opt;
  opt.config_path = shares_config;
  return diiv::cli::cmd_shares(opt, std::cout);
}
