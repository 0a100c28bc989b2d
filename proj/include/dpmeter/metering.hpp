#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dpmeter/dp.hpp"
#include "dpmeter/rng.hpp"

namespace dpmeter::metering {

inline constexpr int kReadingsPerDay = 144;
inline constexpr int kIntervalMinutes = 10;

// Wh consumed in the 10-minute interval ending at timestamp_min.
struct MeterReading {
  int timestamp_min = 0;  // minutes since midnight: 0, 10, ..., 1430
  double wh = 0.0;        // nonnegative, finite
};

struct DailyProfile {
  std::string meter_id;
  std::vector<MeterReading> readings;  // exactly 144, timestamps stepping by 10
};

struct ProtectedReading {
  std::string meter_id;
  int timestamp_min = 0;
  double protected_wh = 0.0;  // may be negative
  dp::Mechanism mechanism = dp::Mechanism::kLaplace;
  double epsilon_used = 0.0;  // 0 for the uniform mechanism, which ignores epsilon
  double abs_error = 0.0;     // |protected_wh - original wh|; never serialized to the ledger
};

struct SmartMeterNode {
  std::string meter_id;
  DailyProfile profile;
  dp::Mechanism mechanism = dp::Mechanism::kLaplace;
  dp::PrivacyParams params;
  std::uint64_t stake_tokens = 0;
};

// Throws validation-error naming the violated invariant.
void validate_profile(const DailyProfile& profile);

// CSV contract: header `timestamp_min,wh`, 144 data rows, LF endings.
DailyProfile ingest_profile(const std::filesystem::path& path, std::string meter_id);
void write_profile_csv(const std::filesystem::path& path, const DailyProfile& profile);

// Day-shaped demand (overnight trough, morning shoulder, early-afternoon peak,
// evening shoulder), +-4% per-reading jitter, rescaled so the profile mean hits
// mean_wh before rounding to 3 decimals. Deterministic in seed.
DailyProfile generate_synthetic_profile(std::uint64_t seed, double mean_wh,
                                        std::string meter_id = "meter-0");

double absolute_error(double protected_wh, double original_wh);

// One ProtectedReading per input reading, in order; noise drawn per reading
// through dp::select_mechanism on the caller's stream.
std::vector<ProtectedReading> perturb_profile(const SmartMeterNode& node, Rng& rng);

// Protected-reading CSV. With ground truth, `originals` must align 1:1 with
// `readings` and the original_wh/abs_error columns are appended.
void write_protected_csv(const std::filesystem::path& path,
                         std::span<const ProtectedReading> readings,
                         std::span<const MeterReading> originals,
                         bool with_ground_truth);

}  // namespace dpmeter::metering
