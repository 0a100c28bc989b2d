#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dpmeter/error.hpp"
#include "dpmeter/eval.hpp"

namespace dpmeter::cli {

// Settings shared by every subcommand, assembled from the config file and
// command-line flags (flags override file values).
struct RunConfig {
  std::string profile_csv;  // when empty, profiles are generated synthetically
  std::vector<std::string> meters{"meter-0"};
  double mean_wh = 872.0;  // synthetic daily mean per reading, Wh
  eval::ExperimentConfig experiment;
  std::vector<std::pair<std::string, std::uint64_t>> stakes;
  int nodes = 0;  // synthetic stakers node-1..node-N when stakes is empty
  std::string out_dir = "out";
  bool with_ground_truth = false;
};

// List flags arrive as comma-separated strings.
std::vector<double> parse_double_list(const std::string& text);
std::vector<dp::Mechanism> parse_mechanism_list(const std::string& text);
// Stake entries are written id=tokens, e.g. "node-a=50,node-b=30".
std::vector<std::pair<std::string, std::uint64_t>> parse_stake_list(const std::string& text);

// 0 success, 1 domain failure (validation/verification), 2 usage/parse.
int exit_code_for(Errc code);

// Subcommand bodies. Each validates everything before writing anything,
// prints a short summary to stdout on success, and on failure prints a
// message to stderr and returns the matching exit status.
int cmd_ingest(const RunConfig& config);
int cmd_simulate(const RunConfig& config);
int cmd_sweep(const RunConfig& config);
int cmd_verify_chain(const std::string& chain_path);

}  // namespace dpmeter::cli
