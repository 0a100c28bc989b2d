#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dpmeter/cli.hpp"
#include "dpmeter/kernels.hpp"
#include "dpmeter/util.hpp"

namespace {

void apply_kernel_choice(const std::string& kernel) {
  if (kernel == "auto") return;
  if (kernel == "scalar") {
    dpmeter::kernels::set_backend(dpmeter::kernels::Backend::kScalar);
    return;
  }
  dpmeter::kernels::set_backend(dpmeter::kernels::Backend::kAvx2);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"differentially private smart metering on a proof-of-stake ledger"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "flat key=value config file; flags override file values");

  std::string epsilon = "0.01,0.05,0.1,0.3,0.7,1.0";
  std::string delta = "0.01,0.02,0.05,0.1,0.25,0.5";
  std::string mechanism = "laplace,gaussian,uniform,geometric";
  std::string meters = "meter-0";
  std::string stakes;
  std::string profile;
  std::string out_dir = "out";
  std::string kernel = "auto";
  std::string chain_path;
  std::uint64_t seed = 42;
  double mean_wh = 872.0;
  double delta_db = 1.0;
  int days = 0;
  int nodes = 0;
  bool with_ground_truth = false;

  app.add_option("--seed", seed, "master seed; every output is a pure function of it");
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--epsilon", epsilon,
                 "comma-separated epsilon grid (simulate uses the first value)")
      ->capture_default_str();
  app.add_option("--delta", delta,
                 "comma-separated uniform-mechanism delta grid (simulate uses the first value)")
      ->capture_default_str();
  app.add_option("--mechanism", mechanism,
                 "comma-separated mechanisms: laplace,gaussian,uniform,geometric "
                 "(simulate uses the first entry)")
      ->capture_default_str();
  app.add_option("--days", days, "simulated days (default: 1 for simulate, 100 for sweep)");
  app.add_option("--meters", meters, "comma-separated meter ids")->capture_default_str();
  app.add_option("--mean-wh", mean_wh, "synthetic profile daily mean per reading, Wh")
      ->capture_default_str();
  app.add_option("--profile", profile, "meter profile CSV (timestamp_min,wh); omit for synthetic");
  app.add_option("--stakes", stakes, "stake table, id=tokens pairs: node-a=50,node-b=30");
  app.add_option("--nodes", nodes, "synthetic staker count when --stakes is not given");
  app.add_option("--delta-db", delta_db, "dataset sensitivity, Wh")->capture_default_str();
  app.add_option("--kernel", kernel, "kernel backend")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}))
      ->capture_default_str();
  app.add_flag("--with-ground-truth", with_ground_truth,
               "include original_wh and abs_error columns in the protected CSV");

  CLI::App* ingest = app.add_subcommand("ingest", "validate a profile CSV and write it back normalized");
  CLI::App* simulate = app.add_subcommand(
      "simulate", "perturb, submit, elect, mine, verify, append; export chain and readings");
  CLI::App* sweep = app.add_subcommand("sweep", "mechanism/parameter error sweep with report files");
  CLI::App* verify = app.add_subcommand("verify-chain", "re-verify an exported chain");
  verify->add_option("chain", chain_path, "chain JSONL file")->required();
  (void)ingest;
  (void)simulate;

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    apply_kernel_choice(kernel);
    if (app.got_subcommand(verify)) return dpmeter::cli::cmd_verify_chain(chain_path);

    dpmeter::cli::RunConfig config;
    config.profile_csv = profile;
    config.meters = dpmeter::split_csv_list(meters);
    config.mean_wh = mean_wh;
    config.experiment.epsilon_grid = dpmeter::cli::parse_double_list(epsilon);
    config.experiment.delta_reading_grid = dpmeter::cli::parse_double_list(delta);
    config.experiment.mechanisms = dpmeter::cli::parse_mechanism_list(mechanism);
    config.experiment.master_seed = seed;
    config.experiment.delta_db = delta_db;
    config.experiment.days =
        app.count("--days") > 0 ? days : (app.got_subcommand(sweep) ? 100 : 1);
    if (!stakes.empty()) config.stakes = dpmeter::cli::parse_stake_list(stakes);
    config.nodes = nodes;
    config.out_dir = out_dir;
    config.with_ground_truth = with_ground_truth;

    if (app.got_subcommand(ingest)) return dpmeter::cli::cmd_ingest(config);
    if (app.got_subcommand(simulate)) return dpmeter::cli::cmd_simulate(config);
    return dpmeter::cli::cmd_sweep(config);
  } catch (const dpmeter::Error& e) {
    std::cerr << "dpmeter: " << e.what() << "\n";
    return dpmeter::cli::exit_code_for(e.code());
  }
}
