#include "dpmeter/cli.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "dpmeter/kernels.hpp"
#include "dpmeter/ledger.hpp"
#include "dpmeter/metering.hpp"
#include "dpmeter/rng.hpp"
#include "dpmeter/util.hpp"

namespace dpmeter::cli {
namespace {

namespace fs = std::filesystem;

const char* error_label(Errc code) {
  switch (code) {
    case Errc::kInvalidParameter: return "invalid parameter";
    case Errc::kInvalidArgument: return "invalid argument";
    case Errc::kUnsupportedMechanism: return "unsupported mechanism";
    case Errc::kParse: return "parse error";
    case Errc::kIo: return "io error";
    case Errc::kValidation: return "validation error";
    case Errc::kDuplicateTransaction: return "duplicate transaction";
    case Errc::kNothingToMine: return "nothing to mine";
    case Errc::kNoStake: return "no stake";
    case Errc::kNotVerified: return "not verified";
  }
  return "error";
}

int report_failure(const char* command, const Error& e) {
  std::cerr << "dpmeter " << command << ": " << error_label(e.code()) << ": "
            << e.what() << "\n";
  return exit_code_for(e.code());
}

void check_meters(const std::vector<std::string>& meters) {
  if (meters.empty()) fail(Errc::kInvalidArgument, "no meters configured");
  std::set<std::string> seen;
  for (const std::string& id : meters) {
    if (id.empty()) fail(Errc::kInvalidArgument, "meter id must be nonempty");
    if (id.find('/') != std::string::npos)
      fail(Errc::kInvalidArgument, "meter id must not contain '/': '" + id + "'");
    if (!seen.insert(id).second)
      fail(Errc::kInvalidArgument, "duplicate meter id '" + id + "'");
  }
}

metering::DailyProfile load_profile(const RunConfig& config, const std::string& meter_id) {
  if (!config.profile_csv.empty())
    return metering::ingest_profile(config.profile_csv, meter_id);
  return metering::generate_synthetic_profile(
      derive_seed(config.experiment.master_seed, "profile/" + meter_id),
      config.mean_wh, meter_id);
}

ledger::StakeTable stake_table_for(const RunConfig& config) {
  ledger::StakeTable table;
  if (!config.stakes.empty()) {
    for (const auto& [id, tokens] : config.stakes) table.entries[id] = tokens;
  } else if (config.nodes > 0) {
    for (int i = 1; i <= config.nodes; ++i)
      table.entries["node-" + std::to_string(i)] = 1;
  } else {
    for (const std::string& id : config.meters) table.entries[id] = 1;
  }
  return table;
}

std::uint64_t parse_u64(const std::string& item) {
  if (item.empty() || item[0] == '-' || item[0] == '+')
    fail(Errc::kParse, "not an unsigned integer: '" + item + "'");
  errno = 0;
  char* end = nullptr;
  unsigned long long value = std::strtoull(item.c_str(), &end, 10);
  if (end != item.c_str() + item.size() || errno == ERANGE)
    fail(Errc::kParse, "not an unsigned integer: '" + item + "'");
  return static_cast<std::uint64_t>(value);
}

void run_simulate(const RunConfig& config) {
  check_meters(config.meters);
  if (!config.profile_csv.empty() && config.meters.size() != 1)
    fail(Errc::kInvalidArgument, "a profile file drives exactly one meter");
  if (config.experiment.days < 1)
    fail(Errc::kInvalidParameter, "days must be at least 1");
  if (config.experiment.mechanisms.empty())
    fail(Errc::kInvalidParameter, "no mechanism configured");

  dp::Mechanism mechanism = config.experiment.mechanisms.front();
  dp::PrivacyParams params;
  params.delta_db = config.experiment.delta_db;
  if (mechanism == dp::Mechanism::kUniform) {
    if (config.experiment.delta_reading_grid.empty())
      fail(Errc::kInvalidParameter, "uniform mechanism needs a delta value");
    params.delta_reading = config.experiment.delta_reading_grid.front();
  } else {
    if (config.experiment.epsilon_grid.empty())
      fail(Errc::kInvalidParameter, "no epsilon configured");
    params.epsilon = config.experiment.epsilon_grid.front();
  }
  dp::validate_params(mechanism, params);

  std::vector<metering::SmartMeterNode> nodes;
  for (const std::string& id : config.meters) {
    metering::SmartMeterNode node;
    node.meter_id = id;
    node.profile = load_profile(config, id);
    node.mechanism = mechanism;
    node.params = params;
    node.stake_tokens = 1;
    nodes.push_back(std::move(node));
  }

  ledger::LedgerSim sim(stake_table_for(config));
  std::vector<metering::ProtectedReading> protected_rows;
  std::vector<metering::MeterReading> original_rows;
  for (int day = 0; day < config.experiment.days; ++day) {
    const std::string day_tag = "simulate/day/" + std::to_string(day);
    for (const metering::SmartMeterNode& node : nodes) {
      Rng rng(derive_seed(config.experiment.master_seed,
                          day_tag + "/meter/" + node.meter_id));
      std::vector<metering::ProtectedReading> readings =
          metering::perturb_profile(node, rng);
      for (const metering::ProtectedReading& r : readings)
        sim.submit_reading(r.meter_id, r.timestamp_min, r.protected_wh);
      protected_rows.insert(protected_rows.end(), readings.begin(), readings.end());
      original_rows.insert(original_rows.end(), node.profile.readings.begin(),
                           node.profile.readings.end());
    }
    Rng election(derive_seed(config.experiment.master_seed, day_tag + "/election"));
    sim.run_round(election);
  }

  fs::path out(config.out_dir);
  fs::create_directories(out);
  ledger::write_chain_jsonl(out / "chain.jsonl", sim.chain());
  metering::write_protected_csv(out / "protected_readings.csv", protected_rows,
                                original_rows, config.with_ground_truth);

  std::size_t tx_total = 0;
  for (const ledger::Block& block : sim.chain().blocks) tx_total += block.tx_list.size();
  std::cout << "mechanism " << dp::to_string(mechanism) << ", " << nodes.size()
            << " meter(s), " << config.experiment.days << " day(s): chain height "
            << sim.chain().blocks.size() - 1 << ", " << tx_total << " transactions\n"
            << "wrote " << (out / "chain.jsonl").string() << "\n"
            << "wrote " << (out / "protected_readings.csv").string() << "\n";
}

void run_sweep_command(const RunConfig& config) {
  check_meters(config.meters);
  if (config.meters.size() != 1)
    fail(Errc::kInvalidArgument, "sweep drives exactly one meter");
  metering::DailyProfile profile = load_profile(config, config.meters.front());
  eval::MaeReport report = eval::run_sweep(config.experiment, profile);
  eval::emit_report(report, config.out_dir);
  std::cout << "wrote " << report.traces.size() + 2 << " report files to "
            << config.out_dir << "\n"
            << "mae decreases monotonically: "
            << (report.mae_monotone_decreasing ? "yes" : "no") << "\n";
}

void run_ingest(const RunConfig& config) {
  if (config.profile_csv.empty())
    fail(Errc::kInvalidArgument, "ingest requires a profile file");
  check_meters(config.meters);
  const std::string& meter_id = config.meters.front();
  metering::DailyProfile profile = metering::ingest_profile(config.profile_csv, meter_id);

  std::vector<double> wh(profile.readings.size());
  for (std::size_t i = 0; i < wh.size(); ++i) wh[i] = profile.readings[i].wh;
  double total = kernels::active().sum(wh.data(), wh.size());

  fs::path out(config.out_dir);
  fs::create_directories(out);
  fs::path normalized = out / ("profile_" + meter_id + ".csv");
  metering::write_profile_csv(normalized, profile);
  std::cout << "meter " << meter_id << ": " << profile.readings.size()
            << " readings, total " << format_g6(total) << " Wh, mean "
            << format_g6(total / static_cast<double>(wh.size())) << " Wh\n"
            << "wrote " << normalized.string() << "\n";
}

}  // namespace

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const std::string& item : split_csv_list(text)) {
    errno = 0;
    char* end = nullptr;
    double value = std::strtod(item.c_str(), &end);
    if (end != item.c_str() + item.size() || !std::isfinite(value))
      fail(Errc::kParse, "not a number: '" + item + "'");
    out.push_back(value);
  }
  if (out.empty()) fail(Errc::kParse, "empty list");
  return out;
}

std::vector<dp::Mechanism> parse_mechanism_list(const std::string& text) {
  std::vector<dp::Mechanism> out;
  for (const std::string& item : split_csv_list(text))
    out.push_back(dp::parse_mechanism(item));
  if (out.empty()) fail(Errc::kParse, "empty list");
  return out;
}

std::vector<std::pair<std::string, std::uint64_t>> parse_stake_list(
    const std::string& text) {
  std::vector<std::pair<std::string, std::uint64_t>> out;
  std::set<std::string> seen;
  for (const std::string& item : split_csv_list(text)) {
    std::size_t eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      fail(Errc::kParse, "stake entries are written id=tokens: '" + item + "'");
    std::string id = item.substr(0, eq);
    if (!seen.insert(id).second) fail(Errc::kParse, "duplicate staker '" + id + "'");
    out.emplace_back(std::move(id), parse_u64(item.substr(eq + 1)));
  }
  if (out.empty()) fail(Errc::kParse, "empty stake table");
  return out;
}

int exit_code_for(Errc code) {
  return (code == Errc::kParse || code == Errc::kUnsupportedMechanism) ? 2 : 1;
}

int cmd_ingest(const RunConfig& config) {
  try {
    run_ingest(config);
    return 0;
  } catch (const Error& e) {
    return report_failure("ingest", e);
  }
}

int cmd_simulate(const RunConfig& config) {
  try {
    run_simulate(config);
    return 0;
  } catch (const Error& e) {
    return report_failure("simulate", e);
  }
}

int cmd_sweep(const RunConfig& config) {
  try {
    run_sweep_command(config);
    return 0;
  } catch (const Error& e) {
    return report_failure("sweep", e);
  }
}

int cmd_verify_chain(const std::string& chain_path) {
  try {
    ledger::Chain chain = ledger::read_chain_jsonl(chain_path);
    ledger::ChainReport report = ledger::validate_chain(chain);
    if (!report.ok) {
      std::cout << "chain INVALID at height " << report.first_bad_height << ": "
                << report.reason << "\n";
      return 1;
    }
    std::size_t tx_total = 0;
    for (const ledger::Block& block : chain.blocks) tx_total += block.tx_list.size();
    std::cout << "chain OK: " << chain.blocks.size() << " blocks, " << tx_total
              << " transactions\n";
    return 0;
  } catch (const Error& e) {
    return report_failure("verify-chain", e);
  }
}

}  // namespace dpmeter::cli
