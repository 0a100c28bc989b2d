#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dpmeter/dp.hpp"
#include "dpmeter/metering.hpp"

namespace dpmeter::eval {

struct ExperimentConfig {
  std::vector<double> epsilon_grid = {0.01, 0.05, 0.1, 0.3, 0.7, 1.0};
  // The uniform mechanism sweeps its reading-sensitivity delta instead of
  // epsilon; every delta must divide delta_db into an even support size.
  std::vector<double> delta_reading_grid = {0.01, 0.02, 0.05, 0.1, 0.25, 0.5};
  std::vector<dp::Mechanism> mechanisms = {dp::Mechanism::kLaplace, dp::Mechanism::kGaussian,
                                           dp::Mechanism::kUniform, dp::Mechanism::kGeometric};
  int days = 100;  // independent seeded replications per grid point
  std::uint64_t master_seed = 42;
  double delta_db = 1.0;
};

// Checks every module precondition up front (grids nonempty and positive,
// uniform support sizes even, days >= 1). Throws invalid-parameter.
void validate_config(const ExperimentConfig& config);

// Arithmetic mean of abs_error. Throws invalid-argument on an empty list.
double mae(std::span<const metering::ProtectedReading> readings);

// Closed-form expected |noise| per mechanism; the uniform value is computed
// by direct support enumeration.
double analytic_mae(dp::Mechanism m, const dp::PrivacyParams& p);
// Standard deviation of |noise|; the geometric value comes from the
// truncated-summation moment oracle below.
double analytic_abs_std(dp::Mechanism m, const dp::PrivacyParams& p);

// E|X| and E[X^2] of two-sided geometric noise by pmf summation, truncated
// once the rigorous geometric tail bound drops below 1e-13.
struct AbsMoments {
  double mean_abs = 0.0;
  double mean_sq = 0.0;
};
AbsMoments geometric_abs_moments(double alpha);

struct MaeRow {
  dp::Mechanism mechanism = dp::Mechanism::kLaplace;
  std::string param_name;  // "epsilon", or "delta" for uniform
  double param_value = 0.0;
  double empirical_mae_wh = 0.0;
  double analytic_mae_wh = 0.0;
  double std_error_wh = 0.0;  // analytic_abs_std / sqrt(n_readings)
  std::int64_t n_readings = 0;
  // MAE recomputed by joining ledger transactions against ground truth;
  // kept for pipeline-equivalence checks, not serialized into reports.
  double ledger_mae_wh = 0.0;
};

struct TracePoint {
  int timestamp_min = 0;
  double original_wh = 0.0;
  double protected_wh = 0.0;
};

struct Trace {
  dp::Mechanism mechanism = dp::Mechanism::kLaplace;
  std::string param_name;
  double param_value = 0.0;
  std::vector<TracePoint> points;  // day 0 of the grid point
};

struct MaeReport {
  std::vector<MaeRow> rows;
  std::vector<Trace> traces;
  // True when every mechanism's MAE strictly decreases across its grid.
  bool mae_monotone_decreasing = false;
};

// Runs days x grid x mechanisms through the full meter -> ledger pipeline.
// Each day uses a fresh single-node ledger and the RNG stream
// derive_seed(master_seed, "sweep/<mech>/<param>=<value>/day/<d>").
// All-or-nothing: any failure propagates and no partial report is returned.
MaeReport run_sweep(const ExperimentConfig& config, const metering::DailyProfile& profile);

// Writes mae.csv, mae.json, and one trace CSV per grid point into out_dir.
// Deterministic bytes; throws invalid-argument on an empty report.
void emit_report(const MaeReport& report, const std::filesystem::path& out_dir);

}  // namespace dpmeter::eval
