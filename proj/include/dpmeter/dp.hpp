#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "dpmeter/rng.hpp"

namespace dpmeter::dp {

enum class Mechanism { kLaplace, kGaussian, kUniform, kGeometric };

inline constexpr std::array<Mechanism, 4> kAllMechanisms = {
    Mechanism::kLaplace,
    Mechanism::kGaussian,
    Mechanism::kUniform,
    Mechanism::kGeometric,
};

// Serialized tags are the exact lowercase strings.
const std::string& to_string(Mechanism m);
std::optional<Mechanism> mechanism_from_string(std::string_view s);
Mechanism parse_mechanism(std::string_view s);  // throws unsupported-mechanism

struct PrivacyParams {
  double epsilon = 1.0;         // privacy budget; ignored by the uniform mechanism
  double delta_reading = 0.01;  // reading sensitivity delta (uniform support granularity)
  double delta_db = 1.0;        // dataset sensitivity Delta, Wh
};

void validate_params(Mechanism m, const PrivacyParams& p);  // throws invalid-parameter

// Uniform support size W = delta_db / delta_reading; must be a positive even
// integer (the support is {-W/2, ..., W/2 - 1}). Throws invalid-parameter.
std::int64_t uniform_support_size(const PrivacyParams& p);

double laplace_scale(const PrivacyParams& p);           // b = Delta / eps
double gaussian_stddev(const PrivacyParams& p);         // sigma = Delta / eps
double geometric_success_prob(const PrivacyParams& p);  // alpha = exp(-eps / Delta)

struct NoiseSample {
  double value = 0.0;  // Wh, signed; integral for the discrete mechanisms
};

NoiseSample sample_laplace(const PrivacyParams& p, Rng& rng);
NoiseSample sample_gaussian(const PrivacyParams& p, Rng& rng);
NoiseSample sample_uniform(const PrivacyParams& p, Rng& rng);
NoiseSample sample_geometric(const PrivacyParams& p, Rng& rng);

// Fills out with iid noise through the active kernel backend. The
// single-sample ops above are batches of one: for laplace/geometric a batch
// of n is bit-identical to n single draws on the same stream. The gaussian
// batch consumes 2*ceil(n/2) draws (Box-Muller pairs), so its stream layout
// differs from repeated singles while the distribution is identical.
void sample_batch(Mechanism m, const PrivacyParams& p, Rng& rng, std::span<double> out);

// pdf (continuous) or pmf (discrete, integer x required) at x, noise mean 0.
double density(Mechanism m, const PrivacyParams& p, double x);

// Mechanism dispatch: draws one noise sample for the given reading's
// perturbation using the tagged sampler.
NoiseSample select_mechanism(Mechanism m, const PrivacyParams& p, double reading_wh, Rng& rng);

enum class AggregateQuery { kSum, kMean, kMax };

const std::string& to_string(AggregateQuery q);
std::optional<AggregateQuery> query_from_string(std::string_view s);

// Aggregate of a dataset; the empty dataset aggregates to 0 by convention.
double aggregate(std::span<const double> dataset, AggregateQuery q);

// Max over all remove-one neighbors of |F(db) - F(neighbor)| by exhaustive
// enumeration. Throws invalid-argument on an empty dataset.
double compute_sensitivity(std::span<const double> dataset, AggregateQuery q);

}  // namespace dpmeter::dp
