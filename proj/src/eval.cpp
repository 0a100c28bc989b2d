#include "dpmeter/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

#include "dpmeter/error.hpp"
#include "dpmeter/kernels.hpp"
#include "dpmeter/ledger.hpp"
#include "dpmeter/util.hpp"

namespace dpmeter::eval {

namespace {

constexpr double kSqrtTwoOverPi = 0.79788456080286541;

dp::PrivacyParams grid_params(dp::Mechanism m, double value, double delta_db) {
  dp::PrivacyParams p;
  p.delta_db = delta_db;
  if (m == dp::Mechanism::kUniform) {
    p.delta_reading = value;
  } else {
    p.epsilon = value;
  }
  return p;
}

std::string param_name_of(dp::Mechanism m) {
  return m == dp::Mechanism::kUniform ? "delta" : "epsilon";
}

double sum_with_kernels(std::span<const double> values) {
  return kernels::active().sum(values.data(), values.size());
}

}  // namespace

void validate_config(const ExperimentConfig& config) {
  if (config.days < 1) fail(Errc::kInvalidParameter, "days must be >= 1");
  if (config.mechanisms.empty()) fail(Errc::kInvalidParameter, "mechanism list is empty");
  bool wants_epsilon = false;
  bool wants_delta = false;
  for (dp::Mechanism m : config.mechanisms)
    (m == dp::Mechanism::kUniform ? wants_delta : wants_epsilon) = true;
  if (wants_epsilon) {
    if (config.epsilon_grid.empty()) fail(Errc::kInvalidParameter, "epsilon grid is empty");
    for (double eps : config.epsilon_grid) {
      dp::PrivacyParams p = grid_params(dp::Mechanism::kLaplace, eps, config.delta_db);
      dp::validate_params(dp::Mechanism::kLaplace, p);
    }
  }
  if (wants_delta) {
    if (config.delta_reading_grid.empty())
      fail(Errc::kInvalidParameter, "delta grid is empty");
    for (double delta : config.delta_reading_grid) {
      dp::PrivacyParams p = grid_params(dp::Mechanism::kUniform, delta, config.delta_db);
      dp::validate_params(dp::Mechanism::kUniform, p);
    }
  }
}

double mae(std::span<const metering::ProtectedReading> readings) {
  if (readings.empty()) fail(Errc::kInvalidArgument, "mae of an empty reading list");
  std::vector<double> errors(readings.size());
  for (std::size_t i = 0; i < readings.size(); ++i) errors[i] = readings[i].abs_error;
  return sum_with_kernels(errors) / static_cast<double>(readings.size());
}

AbsMoments geometric_abs_moments(double alpha) {
  if (!(alpha > 0.0) || alpha >= 1.0)
    fail(Errc::kInvalidParameter, "alpha must be in (0, 1)");
  const double c = (1.0 - alpha) / (1.0 + alpha);
  AbsMoments m;
  double power = 1.0;
  for (std::int64_t k = 1;; ++k) {
    power *= alpha;
    double dk = static_cast<double>(k);
    double term_sq = 2.0 * c * dk * dk * power;
    m.mean_abs += 2.0 * c * dk * power;
    m.mean_sq += term_sq;
    // Beyond k the summand shrinks by at least ratio per step, so the tail
    // is below term_sq * ratio / (1 - ratio) once ratio < 1.
    double step = (dk + 1.0) / dk;
    double ratio = alpha * step * step;
    if (ratio < 1.0 && term_sq * ratio / (1.0 - ratio) < 1e-13) break;
    if (k > 100000000) fail(Errc::kInvalidParameter, "alpha too close to 1");
  }
  return m;
}

double analytic_mae(dp::Mechanism m, const dp::PrivacyParams& p) {
  dp::validate_params(m, p);
  switch (m) {
    case dp::Mechanism::kLaplace:
      return dp::laplace_scale(p);
    case dp::Mechanism::kGaussian:
      return dp::gaussian_stddev(p) * kSqrtTwoOverPi;
    case dp::Mechanism::kGeometric: {
      double alpha = dp::geometric_success_prob(p);
      return 2.0 * alpha / ((1.0 + alpha) * (1.0 - alpha));
    }
    case dp::Mechanism::kUniform: {
      std::int64_t w = dp::uniform_support_size(p);
      double sum = 0.0;
      for (std::int64_t k = -(w / 2); k <= w / 2 - 1; ++k)
        sum += std::fabs(static_cast<double>(k));
      return sum / static_cast<double>(w);
    }
  }
  fail(Errc::kUnsupportedMechanism, "unknown mechanism");
}

double analytic_abs_std(dp::Mechanism m, const dp::PrivacyParams& p) {
  dp::validate_params(m, p);
  switch (m) {
    case dp::Mechanism::kLaplace:
      return dp::laplace_scale(p);  // |X| is exponential with scale b
    case dp::Mechanism::kGaussian: {
      double sigma = dp::gaussian_stddev(p);
      return sigma * std::sqrt(1.0 - 2.0 / M_PI);
    }
    case dp::Mechanism::kGeometric: {
      AbsMoments moments = geometric_abs_moments(dp::geometric_success_prob(p));
      return std::sqrt(moments.mean_sq - moments.mean_abs * moments.mean_abs);
    }
    case dp::Mechanism::kUniform: {
      std::int64_t w = dp::uniform_support_size(p);
      double sum_abs = 0.0, sum_sq = 0.0;
      for (std::int64_t k = -(w / 2); k <= w / 2 - 1; ++k) {
        double dk = std::fabs(static_cast<double>(k));
        sum_abs += dk;
        sum_sq += dk * dk;
      }
      double mean_abs = sum_abs / static_cast<double>(w);
      return std::sqrt(sum_sq / static_cast<double>(w) - mean_abs * mean_abs);
    }
  }
  fail(Errc::kUnsupportedMechanism, "unknown mechanism");
}

MaeReport run_sweep(const ExperimentConfig& config, const metering::DailyProfile& profile) {
  validate_config(config);
  metering::validate_profile(profile);

  std::vector<double> original(profile.readings.size());
  for (std::size_t i = 0; i < original.size(); ++i) original[i] = profile.readings[i].wh;

  MaeReport report;
  report.mae_monotone_decreasing = true;

  for (dp::Mechanism mechanism : config.mechanisms) {
    const std::vector<double>& grid = mechanism == dp::Mechanism::kUniform
                                          ? config.delta_reading_grid
                                          : config.epsilon_grid;
    const std::string param_name = param_name_of(mechanism);
    double previous_mae = 0.0;
    bool first_point = true;

    for (double value : grid) {
      dp::PrivacyParams params = grid_params(mechanism, value, config.delta_db);

      metering::SmartMeterNode node;
      node.meter_id = profile.meter_id;
      node.profile = profile;
      node.mechanism = mechanism;
      node.params = params;
      node.stake_tokens = 1;

      double sum_abs = 0.0;
      double ledger_sum_abs = 0.0;
      std::int64_t n_readings = 0;
      Trace trace;
      trace.mechanism = mechanism;
      trace.param_name = param_name;
      trace.param_value = value;

      for (int day = 0; day < config.days; ++day) {
        std::string tag = "sweep/" + dp::to_string(mechanism) + "/" + param_name + "=" +
                          format_g17(value) + "/day/" + std::to_string(day);
        Rng rng(derive_seed(config.master_seed, tag));

        std::vector<metering::ProtectedReading> prot = metering::perturb_profile(node, rng);

        ledger::StakeTable stakes;
        stakes.entries[node.meter_id] = node.stake_tokens;
        ledger::LedgerSim sim(stakes);
        for (const metering::ProtectedReading& r : prot)
          sim.submit_reading(r.meter_id, r.timestamp_min, r.protected_wh);
        const ledger::Block& block = sim.run_round(rng);

        std::vector<double> day_errors(prot.size());
        for (std::size_t i = 0; i < prot.size(); ++i) day_errors[i] = prot[i].abs_error;
        sum_abs += sum_with_kernels(day_errors);
        n_readings += static_cast<std::int64_t>(prot.size());

        // Join the mined transactions back against ground truth. One meter
        // submitting in timestamp order means tx i covers reading i.
        std::vector<double> ledger_errors(block.tx_list.size());
        for (std::size_t i = 0; i < block.tx_list.size(); ++i) {
          const ledger::Transaction& tx = block.tx_list[i];
          if (tx.timestamp_min != profile.readings[i].timestamp_min)
            fail(Errc::kValidation, "mined block does not cover the submitted day");
          double ledger_wh = static_cast<double>(tx.protected_mwh) / 1000.0;
          ledger_errors[i] = std::fabs(ledger_wh - original[i]);
        }
        ledger_sum_abs += sum_with_kernels(ledger_errors);

        if (day == 0) {
          trace.points.reserve(prot.size());
          for (std::size_t i = 0; i < prot.size(); ++i)
            trace.points.push_back(
                {prot[i].timestamp_min, original[i], prot[i].protected_wh});
        }
      }

      MaeRow row;
      row.mechanism = mechanism;
      row.param_name = param_name;
      row.param_value = value;
      row.empirical_mae_wh = sum_abs / static_cast<double>(n_readings);
      row.analytic_mae_wh = analytic_mae(mechanism, params);
      row.std_error_wh =
          analytic_abs_std(mechanism, params) / std::sqrt(static_cast<double>(n_readings));
      row.n_readings = n_readings;
      row.ledger_mae_wh = ledger_sum_abs / static_cast<double>(n_readings);
      report.rows.push_back(row);
      report.traces.push_back(std::move(trace));

      if (!first_point && !(row.empirical_mae_wh < previous_mae))
        report.mae_monotone_decreasing = false;
      previous_mae = row.empirical_mae_wh;
      first_point = false;
    }
  }
  return report;
}

namespace {

double g6_value(double v) { return std::stod(format_g6(v)); }

}  // namespace

void emit_report(const MaeReport& report, const std::filesystem::path& out_dir) {
  if (report.rows.empty()) fail(Errc::kInvalidArgument, "report has no rows");
  std::filesystem::create_directories(out_dir);

  std::string csv =
      "mechanism,param_name,param_value,empirical_mae_wh,analytic_mae_wh,"
      "std_error_wh,n_readings\n";
  for (const MaeRow& row : report.rows) {
    csv += dp::to_string(row.mechanism);
    csv += ',';
    csv += row.param_name;
    csv += ',';
    csv += format_g6(row.param_value);
    csv += ',';
    csv += format_g6(row.empirical_mae_wh);
    csv += ',';
    csv += format_g6(row.analytic_mae_wh);
    csv += ',';
    csv += format_g6(row.std_error_wh);
    csv += ',';
    csv += std::to_string(row.n_readings);
    csv += '\n';
  }
  atomic_write_file((out_dir / "mae.csv").string(), csv);

  nlohmann::json j;
  j["mae_monotone_decreasing"] = report.mae_monotone_decreasing;
  nlohmann::json rows = nlohmann::json::array();
  for (const MaeRow& row : report.rows) {
    nlohmann::json r;
    r["mechanism"] = dp::to_string(row.mechanism);
    r["param_name"] = row.param_name;
    r["param_value"] = g6_value(row.param_value);
    r["empirical_mae_wh"] = g6_value(row.empirical_mae_wh);
    r["analytic_mae_wh"] = g6_value(row.analytic_mae_wh);
    r["std_error_wh"] = g6_value(row.std_error_wh);
    r["n_readings"] = row.n_readings;
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  atomic_write_file((out_dir / "mae.json").string(), j.dump(2) + "\n");

  for (const Trace& trace : report.traces) {
    std::string body = "timestamp_min,original_wh,protected_wh\n";
    for (const TracePoint& pt : trace.points) {
      body += std::to_string(pt.timestamp_min);
      body += ',';
      body += format_g6(pt.original_wh);
      body += ',';
      body += format_g6(pt.protected_wh);
      body += '\n';
    }
    std::string name = "trace_" + dp::to_string(trace.mechanism) + "_" + trace.param_name +
                       "_" + format_g6(trace.param_value) + ".csv";
    atomic_write_file((out_dir / name).string(), body);
  }
}

}  // namespace dpmeter::eval
