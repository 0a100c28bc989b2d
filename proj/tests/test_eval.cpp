#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpmeter/error.hpp"
#include "dpmeter/eval.hpp"
#include "dpmeter/metering.hpp"
#include "dpmeter/rng.hpp"
#include "dpmeter/util.hpp"

using namespace dpmeter;
using namespace dpmeter::eval;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("dpmeter-eval-" + std::to_string(Rng(std::random_device{}()).next_u64()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

dp::PrivacyParams params_eps(double eps) {
  dp::PrivacyParams p;
  p.epsilon = eps;
  return p;
}

dp::PrivacyParams params_delta(double delta) {
  dp::PrivacyParams p;
  p.delta_reading = delta;
  return p;
}

std::vector<metering::ProtectedReading> constant_error_readings(double abs_error, int n) {
  std::vector<metering::ProtectedReading> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)].timestamp_min = i * 10;
    out[static_cast<std::size_t>(i)].abs_error = abs_error;
  }
  return out;
}

}  // namespace

TEST_CASE("analytic_mae oracle values") {
  CHECK(analytic_mae(dp::Mechanism::kLaplace, params_eps(0.05)) == 20.0);
  CHECK(analytic_mae(dp::Mechanism::kLaplace, params_eps(0.01)) == 100.0);
  CHECK(analytic_mae(dp::Mechanism::kGaussian, params_eps(0.05)) ==
        doctest::Approx(15.957691216057308).epsilon(1e-12));
  CHECK(analytic_mae(dp::Mechanism::kGaussian, params_eps(0.01)) ==
        doctest::Approx(79.788456080286538).epsilon(1e-12));
  CHECK(analytic_mae(dp::Mechanism::kGeometric, params_eps(0.05)) ==
        doctest::Approx(19.991669).epsilon(1e-6));
  CHECK(analytic_mae(dp::Mechanism::kGeometric, params_eps(0.01)) ==
        doctest::Approx(99.998333).epsilon(1e-6));
  CHECK(analytic_mae(dp::Mechanism::kUniform, params_delta(0.5)) == 0.5);
  CHECK(analytic_mae(dp::Mechanism::kUniform, params_delta(0.01)) == 25.0);
  CHECK_THROWS_AS(analytic_mae(dp::Mechanism::kLaplace, params_eps(0.0)), Error);
}

TEST_CASE("analytic_abs_std oracle values") {
  CHECK(analytic_abs_std(dp::Mechanism::kLaplace, params_eps(0.01)) == 100.0);
  CHECK(analytic_abs_std(dp::Mechanism::kGaussian, params_eps(0.01)) ==
        doctest::Approx(60.28103).epsilon(1e-6));
  CHECK(analytic_abs_std(dp::Mechanism::kUniform, params_delta(0.01)) ==
        doctest::Approx(std::sqrt(208.5)).epsilon(1e-12));
  // geometric: summation oracle against the closed-form second moment
  double got = analytic_abs_std(dp::Mechanism::kGeometric, params_eps(0.01));
  CHECK(got == doctest::Approx(100.000833).epsilon(1e-6));
}

TEST_CASE("geometric_abs_moments matches closed forms") {
  // alpha = 1/2: E|X| = 4/3, E[X^2] = 4
  AbsMoments half = geometric_abs_moments(0.5);
  CHECK(half.mean_abs == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(half.mean_sq == doctest::Approx(4.0).epsilon(1e-12));

  for (double eps : {0.01, 0.05, 1.0}) {
    double alpha = std::exp(-eps);
    AbsMoments m = geometric_abs_moments(alpha);
    double closed_abs = 2.0 * alpha / ((1.0 + alpha) * (1.0 - alpha));
    double closed_sq = 2.0 * alpha / ((1.0 - alpha) * (1.0 - alpha));
    CHECK(m.mean_abs == doctest::Approx(closed_abs).epsilon(1e-9));
    CHECK(m.mean_sq == doctest::Approx(closed_sq).epsilon(1e-9));
  }
  CHECK_THROWS_AS(geometric_abs_moments(0.0), Error);
  CHECK_THROWS_AS(geometric_abs_moments(1.0), Error);
}

TEST_CASE("mae is the arithmetic mean of abs errors") {
  CHECK(mae(constant_error_readings(0.0, 144)) == 0.0);
  CHECK(mae(constant_error_readings(5.0, 144)) == 5.0);
  auto two = constant_error_readings(0.0, 2);
  two[0].abs_error = 3.0;
  two[1].abs_error = 5.0;
  CHECK(mae(two) == 4.0);
  std::vector<metering::ProtectedReading> empty;
  CHECK_THROWS_AS(mae(empty), Error);
}

TEST_CASE("validate_config rejects broken configurations") {
  metering::DailyProfile profile = metering::generate_synthetic_profile(1, 872.0);

  ExperimentConfig ok;
  validate_config(ok);

  ExperimentConfig bad_days = ok;
  bad_days.days = 0;
  CHECK_THROWS_AS(validate_config(bad_days), Error);

  ExperimentConfig no_mech = ok;
  no_mech.mechanisms.clear();
  CHECK_THROWS_AS(validate_config(no_mech), Error);

  ExperimentConfig no_eps = ok;
  no_eps.epsilon_grid.clear();
  CHECK_THROWS_AS(validate_config(no_eps), Error);

  ExperimentConfig bad_eps = ok;
  bad_eps.epsilon_grid = {0.05, -1.0};
  CHECK_THROWS_AS(validate_config(bad_eps), Error);

  ExperimentConfig odd_delta = ok;
  odd_delta.delta_reading_grid = {0.3};  // support 10/3 is not an even integer
  CHECK_THROWS_AS(validate_config(odd_delta), Error);

  // the odd delta is fine when uniform is not swept
  odd_delta.mechanisms = {dp::Mechanism::kLaplace};
  validate_config(odd_delta);

  ExperimentConfig fine = ok;
  metering::DailyProfile short_profile = profile;
  short_profile.readings.pop_back();
  CHECK_THROWS_AS(run_sweep(fine, short_profile), Error);
}

TEST_CASE("run_sweep shape, determinism, and pipeline equivalence") {
  metering::DailyProfile profile = metering::generate_synthetic_profile(7, 872.0, "home-7");
  ExperimentConfig config;
  config.epsilon_grid = {0.05, 1.0};
  config.delta_reading_grid = {0.25, 0.5};
  config.days = 2;
  config.master_seed = 7;

  MaeReport a = run_sweep(config, profile);
  MaeReport b = run_sweep(config, profile);

  REQUIRE(a.rows.size() == 8);
  REQUIRE(a.traces.size() == 8);
  CHECK(a.mae_monotone_decreasing);

  const char* expected_mech[] = {"laplace", "laplace", "gaussian", "gaussian",
                                 "uniform", "uniform", "geometric", "geometric"};
  const char* expected_param[] = {"epsilon", "epsilon", "epsilon", "epsilon",
                                  "delta",   "delta",   "epsilon", "epsilon"};
  const double expected_value[] = {0.05, 1.0, 0.05, 1.0, 0.25, 0.5, 0.05, 1.0};
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const MaeRow& row = a.rows[i];
    CHECK(dp::to_string(row.mechanism) == expected_mech[i]);
    CHECK(row.param_name == expected_param[i]);
    CHECK(row.param_value == expected_value[i]);
    CHECK(row.n_readings == 288);
    CHECK(row.empirical_mae_wh > 0.0);
    CHECK(row.std_error_wh > 0.0);
    CHECK(row.analytic_mae_wh ==
          analytic_mae(row.mechanism, row.param_name == "delta"
                                          ? params_delta(row.param_value)
                                          : params_eps(row.param_value)));
    CHECK(std::fabs(row.ledger_mae_wh - row.empirical_mae_wh) <= 0.0005);

    const MaeRow& row_b = b.rows[i];
    CHECK(row.empirical_mae_wh == row_b.empirical_mae_wh);
    CHECK(row.ledger_mae_wh == row_b.ledger_mae_wh);

    REQUIRE(a.traces[i].points.size() == 144);
    for (std::size_t t = 0; t < 144; ++t) {
      CHECK(a.traces[i].points[t].timestamp_min == static_cast<int>(t) * 10);
      CHECK(a.traces[i].points[t].original_wh == profile.readings[t].wh);
      CHECK(a.traces[i].points[t].protected_wh == b.traces[i].points[t].protected_wh);
    }
  }
}

TEST_CASE("epsilon 1 sweeps sit within 2 Wh of the truth") {
  metering::DailyProfile profile = metering::generate_synthetic_profile(9, 872.0);
  ExperimentConfig config;
  config.epsilon_grid = {1.0};
  config.mechanisms = {dp::Mechanism::kLaplace, dp::Mechanism::kGaussian,
                       dp::Mechanism::kGeometric};
  config.days = 100;
  config.master_seed = 11;
  MaeReport report = run_sweep(config, profile);
  REQUIRE(report.rows.size() == 3);
  for (const MaeRow& row : report.rows) CHECK(row.empirical_mae_wh <= 2.0);
}

TEST_CASE("mae decreases strictly across the default grids over 100 days") {
  metering::DailyProfile profile = metering::generate_synthetic_profile(13, 872.0);
  ExperimentConfig config;
  config.days = 100;
  config.master_seed = 13;
  MaeReport report = run_sweep(config, profile);
  CHECK(report.mae_monotone_decreasing);
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    if (report.rows[i].mechanism != report.rows[i - 1].mechanism) continue;
    CHECK(report.rows[i].empirical_mae_wh < report.rows[i - 1].empirical_mae_wh);
  }
}

TEST_CASE("emit_report writes the full deterministic file set") {
  metering::DailyProfile profile = metering::generate_synthetic_profile(7, 872.0, "home-7");
  ExperimentConfig config;
  config.epsilon_grid = {0.05, 1.0};
  config.delta_reading_grid = {0.25, 0.5};
  config.days = 2;
  config.master_seed = 7;
  MaeReport report = run_sweep(config, profile);

  TempDir dir;
  fs::path first = dir.path / "first";
  emit_report(report, first);

  std::set<std::string> names;
  for (const auto& entry : fs::directory_iterator(first))
    names.insert(entry.path().filename().string());
  std::set<std::string> expected = {
      "mae.csv",
      "mae.json",
      "trace_laplace_epsilon_0.05.csv",
      "trace_laplace_epsilon_1.csv",
      "trace_gaussian_epsilon_0.05.csv",
      "trace_gaussian_epsilon_1.csv",
      "trace_uniform_delta_0.25.csv",
      "trace_uniform_delta_0.5.csv",
      "trace_geometric_epsilon_0.05.csv",
      "trace_geometric_epsilon_1.csv",
  };
  CHECK(names == expected);

  std::string csv = read_file((first / "mae.csv").string());
  CHECK(csv.rfind("mechanism,param_name,param_value,empirical_mae_wh,analytic_mae_wh,"
                  "std_error_wh,n_readings\n",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);
  CHECK(csv.find("laplace,epsilon,0.05,") != std::string::npos);
  CHECK(csv.find("uniform,delta,0.25,") != std::string::npos);
  CHECK(csv.find(",288\n") != std::string::npos);

  nlohmann::json j = nlohmann::json::parse(read_file((first / "mae.json").string()));
  CHECK(j["mae_monotone_decreasing"].is_boolean());
  REQUIRE(j["rows"].size() == 8);
  CHECK(j["rows"][0]["mechanism"] == "laplace");
  CHECK(j["rows"][0]["n_readings"] == 288);

  std::string trace = read_file((first / "trace_laplace_epsilon_1.csv").string());
  CHECK(trace.rfind("timestamp_min,original_wh,protected_wh\n", 0) == 0);
  CHECK(std::count(trace.begin(), trace.end(), '\n') == 145);
  CHECK(trace.find("\n0," + format_g6(profile.readings[0].wh) + ",") != std::string::npos);

  // byte-identical on re-emission
  fs::path second = dir.path / "second";
  emit_report(report, second);
  for (const std::string& name : expected)
    CHECK(read_file((first / name).string()) == read_file((second / name).string()));

  MaeReport empty;
  CHECK_THROWS_AS(emit_report(empty, dir.path / "third"), Error);
}

TEST_CASE("default configuration emits 26 files") {
  metering::DailyProfile profile = metering::generate_synthetic_profile(3, 872.0);
  ExperimentConfig config;
  config.days = 1;
  MaeReport report = run_sweep(config, profile);
  REQUIRE(report.rows.size() == 24);

  TempDir dir;
  emit_report(report, dir.path / "out");
  std::size_t count = 0;
  for (const auto& entry : fs::directory_iterator(dir.path / "out")) {
    (void)entry;
    count++;
  }
  CHECK(count == 26);
}
