#include "dpmeter/metering.hpp"

#include <array>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "dpmeter/error.hpp"
#include "dpmeter/kernels.hpp"
#include "dpmeter/util.hpp"

namespace dpmeter::metering {

namespace {

[[noreturn]] void fail_at(Errc code, std::size_t line_no, const std::string& what) {
  fail(code, "line " + std::to_string(line_no) + ": " + what);
}

int parse_timestamp(const std::string& field, std::size_t line_no) {
  errno = 0;
  char* end = nullptr;
  long v = std::strtol(field.c_str(), &end, 10);
  if (field.empty() || errno != 0 || end != field.c_str() + field.size())
    fail_at(Errc::kParse, line_no, "invalid timestamp '" + field + "'");
  if (v < 0 || v > 1430)
    fail_at(Errc::kValidation, line_no, "timestamp out of range [0, 1430]: " + field);
  return static_cast<int>(v);
}

double parse_wh(const std::string& field, std::size_t line_no) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(field.c_str(), &end);
  if (field.empty() || errno != 0 || end != field.c_str() + field.size() || !std::isfinite(v))
    fail_at(Errc::kParse, line_no, "invalid consumption '" + field + "'");
  if (v < 0.0) fail_at(Errc::kValidation, line_no, "negative consumption: " + field);
  return v;
}

}  // namespace

void validate_profile(const DailyProfile& profile) {
  if (profile.readings.size() != static_cast<std::size_t>(kReadingsPerDay))
    fail(Errc::kValidation, "expected 144 readings, got " +
                                std::to_string(profile.readings.size()));
  for (int i = 0; i < kReadingsPerDay; ++i) {
    const MeterReading& r = profile.readings[static_cast<std::size_t>(i)];
    if (r.timestamp_min != i * kIntervalMinutes)
      fail(Errc::kValidation,
           "timestamps must run 0, 10, ..., 1430; reading " + std::to_string(i) +
               " has timestamp " + std::to_string(r.timestamp_min));
    if (!std::isfinite(r.wh) || r.wh < 0.0)
      fail(Errc::kValidation, "consumption must be finite and nonnegative at timestamp " +
                                  std::to_string(r.timestamp_min));
  }
}

DailyProfile ingest_profile(const std::filesystem::path& path, std::string meter_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::kIo, "cannot open profile file: " + path.string());

  DailyProfile profile;
  profile.meter_id = std::move(meter_id);

  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) fail_at(Errc::kParse, line_no, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "timestamp_min,wh")
    fail_at(Errc::kParse, line_no, "expected header 'timestamp_min,wh'");

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
      fail_at(Errc::kParse, line_no, "expected 2 comma-separated fields");
    MeterReading r;
    r.timestamp_min = parse_timestamp(line.substr(0, comma), line_no);
    r.wh = parse_wh(line.substr(comma + 1), line_no);
    profile.readings.push_back(r);
  }
  validate_profile(profile);
  return profile;
}

void write_profile_csv(const std::filesystem::path& path, const DailyProfile& profile) {
  validate_profile(profile);
  std::string out = "timestamp_min,wh\n";
  char buf[64];
  for (const MeterReading& r : profile.readings) {
    std::snprintf(buf, sizeof(buf), "%d,%.3f\n", r.timestamp_min, r.wh);
    out += buf;
  }
  atomic_write_file(path.string(), out);
}

DailyProfile generate_synthetic_profile(std::uint64_t seed, double mean_wh,
                                        std::string meter_id) {
  if (!std::isfinite(mean_wh) || mean_wh <= 0.0)
    fail(Errc::kInvalidParameter, "mean_wh must be positive and finite");

  Rng rng(seed);
  std::array<double, kReadingsPerDay> shape{};
  double total = 0.0;
  for (int i = 0; i < kReadingsPerDay; ++i) {
    double hours = (static_cast<double>(i) * kIntervalMinutes + 5.0) / 60.0;
    auto hump = [hours](double center, double width) {
      double z = (hours - center) / width;
      return std::exp(-0.5 * z * z);
    };
    double base = 0.38 + 0.25 * hump(8.0, 2.0) + 1.05 * hump(13.0, 2.6) +
                  0.35 * hump(19.5, 1.8);
    double jitter = 1.0 + 0.04 * (2.0 * rng.unit_open() - 1.0);
    shape[static_cast<std::size_t>(i)] = base * jitter;
    total += base * jitter;
  }

  DailyProfile profile;
  profile.meter_id = std::move(meter_id);
  profile.readings.resize(kReadingsPerDay);
  double scale = mean_wh * kReadingsPerDay / total;
  for (int i = 0; i < kReadingsPerDay; ++i) {
    double wh = std::nearbyint(shape[static_cast<std::size_t>(i)] * scale * 1000.0) / 1000.0;
    profile.readings[static_cast<std::size_t>(i)] = {i * kIntervalMinutes, wh};
  }
  return profile;
}

double absolute_error(double protected_wh, double original_wh) {
  if (!std::isfinite(protected_wh) || !std::isfinite(original_wh))
    fail(Errc::kInvalidArgument, "absolute_error requires finite inputs");
  return std::fabs(protected_wh - original_wh);
}

std::vector<ProtectedReading> perturb_profile(const SmartMeterNode& node, Rng& rng) {
  validate_profile(node.profile);
  dp::validate_params(node.mechanism, node.params);

  const std::size_t n = node.profile.readings.size();
  std::vector<double> original(n), noise(n), perturbed(n), err(n);
  for (std::size_t i = 0; i < n; ++i) original[i] = node.profile.readings[i].wh;
  for (std::size_t i = 0; i < n; ++i)
    noise[i] = dp::select_mechanism(node.mechanism, node.params, original[i], rng).value;

  const kernels::Ops& ops = kernels::active();
  ops.add(original.data(), noise.data(), n, perturbed.data());
  ops.abs_diff(perturbed.data(), original.data(), n, err.data());

  double epsilon_used =
      node.mechanism == dp::Mechanism::kUniform ? 0.0 : node.params.epsilon;
  std::vector<ProtectedReading> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = {node.meter_id,   node.profile.readings[i].timestamp_min,
              perturbed[i],    node.mechanism,
              epsilon_used,    err[i]};
  }
  return out;
}

void write_protected_csv(const std::filesystem::path& path,
                         std::span<const ProtectedReading> readings,
                         std::span<const MeterReading> originals,
                         bool with_ground_truth) {
  if (with_ground_truth && originals.size() != readings.size())
    fail(Errc::kInvalidArgument,
         "ground-truth span must align with protected readings");

  std::string out =
      with_ground_truth
          ? "meter_id,timestamp_min,mechanism,epsilon,protected_wh,original_wh,abs_error\n"
          : "meter_id,timestamp_min,mechanism,epsilon,protected_wh\n";
  for (std::size_t i = 0; i < readings.size(); ++i) {
    const ProtectedReading& r = readings[i];
    out += r.meter_id;
    out += ',';
    out += std::to_string(r.timestamp_min);
    out += ',';
    out += dp::to_string(r.mechanism);
    out += ',';
    out += format_g6(r.epsilon_used);
    out += ',';
    out += format_g6(r.protected_wh);
    if (with_ground_truth) {
      out += ',';
      out += format_g6(originals[i].wh);
      out += ',';
      out += format_g6(r.abs_error);
    }
    out += '\n';
  }
  atomic_write_file(path.string(), out);
}

}  // namespace dpmeter::metering
