#include "dpmeter/dp.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dpmeter/error.hpp"
#include "dpmeter/kernels.hpp"

namespace dpmeter::dp {

namespace {

constexpr double kSqrt2Pi = 2.50662827463100050242;

// Single draws are the common production case; avoid heap traffic for them.
constexpr std::size_t kStackBatch = 8;

double* fill_units(std::size_t n, double* stack, std::vector<double>& heap, Rng& rng) {
  double* u = stack;
  if (n > kStackBatch * 2) {
    heap.resize(n);
    u = heap.data();
  }
  for (std::size_t i = 0; i < n; ++i) u[i] = rng.unit_open();
  return u;
}

void require_integer(double x) {
  if (!std::isfinite(x) || std::nearbyint(x) != x)
    fail(Errc::kInvalidArgument, "discrete mechanism requires integer x, got " +
                                     std::to_string(x));
}

kernels::GeometricParams geometric_params(const PrivacyParams& p) {
  double alpha = std::exp(-(p.epsilon / p.delta_db));
  kernels::GeometricParams gp;
  gp.log_alpha = -(p.epsilon / p.delta_db);  // exact, avoids log(exp(x)) round-trip
  gp.one_plus_alpha = 1.0 + alpha;
  gp.thresh_neg = alpha / (1.0 + alpha);
  gp.thresh_pos = 1.0 / (1.0 + alpha);
  return gp;
}

}  // namespace

const std::string& to_string(Mechanism m) {
  static const std::string kNames[4] = {"laplace", "gaussian", "uniform", "geometric"};
  return kNames[static_cast<int>(m)];
}

std::optional<Mechanism> mechanism_from_string(std::string_view s) {
  for (Mechanism m : kAllMechanisms)
    if (s == to_string(m)) return m;
  return std::nullopt;
}

Mechanism parse_mechanism(std::string_view s) {
  if (auto m = mechanism_from_string(s)) return *m;
  fail(Errc::kUnsupportedMechanism, "unknown mechanism \"" + std::string(s) +
                                        "\" (expected laplace, gaussian, uniform or geometric)");
}

void validate_params(Mechanism m, const PrivacyParams& p) {
  if (!(p.delta_db > 0.0) || !std::isfinite(p.delta_db))
    fail(Errc::kInvalidParameter, "delta_db must be positive and finite");
  if (m == Mechanism::kUniform) {
    uniform_support_size(p);  // validates delta_reading and the support rule
    return;                   // epsilon deliberately not consulted
  }
  if (!(p.epsilon > 0.0) || !std::isfinite(p.epsilon))
    fail(Errc::kInvalidParameter, "epsilon must be positive and finite");
}

std::int64_t uniform_support_size(const PrivacyParams& p) {
  if (!(p.delta_reading > 0.0) || !std::isfinite(p.delta_reading))
    fail(Errc::kInvalidParameter, "delta_reading must be positive and finite");
  if (!(p.delta_db > 0.0) || !std::isfinite(p.delta_db))
    fail(Errc::kInvalidParameter, "delta_db must be positive and finite");
  double q = p.delta_db / p.delta_reading;
  double w = std::nearbyint(q);
  if (!(w >= 2.0) || w > 9.007199254740992e15 || std::fabs(q - w) > 1e-9 * w ||
      std::fmod(w, 2.0) != 0.0) {
    fail(Errc::kInvalidParameter,
         "delta_db / delta_reading must be a positive even integer, got " + std::to_string(q));
  }
  return static_cast<std::int64_t>(w);
}

double laplace_scale(const PrivacyParams& p) {
  validate_params(Mechanism::kLaplace, p);
  return p.delta_db / p.epsilon;
}

double gaussian_stddev(const PrivacyParams& p) {
  validate_params(Mechanism::kGaussian, p);
  return p.delta_db / p.epsilon;
}

double geometric_success_prob(const PrivacyParams& p) {
  validate_params(Mechanism::kGeometric, p);
  return std::exp(-(p.epsilon / p.delta_db));
}

void sample_batch(Mechanism m, const PrivacyParams& p, Rng& rng, std::span<double> out) {
  validate_params(m, p);
  if (out.empty()) return;
  const kernels::Ops& k = kernels::active();
  double stack[kStackBatch * 2];
  std::vector<double> heap;
  switch (m) {
    case Mechanism::kLaplace: {
      double* u = fill_units(out.size(), stack, heap, rng);
      k.laplace_from_unit(u, out.size(), laplace_scale(p), out.data());
      return;
    }
    case Mechanism::kGaussian: {
      std::size_t pairs = (out.size() + 1) / 2;
      double* u = fill_units(2 * pairs, stack, heap, rng);
      if (out.size() % 2 == 0) {
        k.gaussian_from_unit(u, pairs, gaussian_stddev(p), out.data());
      } else {
        std::vector<double> z(2 * pairs);
        k.gaussian_from_unit(u, pairs, gaussian_stddev(p), z.data());
        std::copy_n(z.begin(), out.size(), out.begin());
      }
      return;
    }
    case Mechanism::kUniform: {
      std::int64_t w = uniform_support_size(p);
      std::int64_t lo = -(w / 2);
      for (double& o : out)
        o = static_cast<double>(lo + static_cast<std::int64_t>(
                                         rng.below(static_cast<std::uint64_t>(w))));
      return;
    }
    case Mechanism::kGeometric: {
      double* u = fill_units(out.size(), stack, heap, rng);
      k.geometric_from_unit(u, out.size(), geometric_params(p), out.data());
      return;
    }
  }
  fail(Errc::kUnsupportedMechanism, "unknown mechanism tag");
}

NoiseSample sample_laplace(const PrivacyParams& p, Rng& rng) {
  double v = 0.0;
  sample_batch(Mechanism::kLaplace, p, rng, {&v, 1});
  return {v};
}

NoiseSample sample_gaussian(const PrivacyParams& p, Rng& rng) {
  double v = 0.0;
  sample_batch(Mechanism::kGaussian, p, rng, {&v, 1});
  return {v};
}

NoiseSample sample_uniform(const PrivacyParams& p, Rng& rng) {
  double v = 0.0;
  sample_batch(Mechanism::kUniform, p, rng, {&v, 1});
  return {v};
}

NoiseSample sample_geometric(const PrivacyParams& p, Rng& rng) {
  double v = 0.0;
  sample_batch(Mechanism::kGeometric, p, rng, {&v, 1});
  return {v};
}

double density(Mechanism m, const PrivacyParams& p, double x) {
  validate_params(m, p);
  if (!std::isfinite(x)) fail(Errc::kInvalidArgument, "density requires finite x");
  switch (m) {
    case Mechanism::kLaplace: {
      double b = laplace_scale(p);
      return std::exp(-std::fabs(x) / b) / (2.0 * b);
    }
    case Mechanism::kGaussian: {
      double s = gaussian_stddev(p);
      double t = x / s;
      return std::exp(-0.5 * t * t) / (s * kSqrt2Pi);
    }
    case Mechanism::kUniform: {
      require_integer(x);
      std::int64_t w = uniform_support_size(p);
      auto kx = static_cast<std::int64_t>(std::llrint(x));
      if (kx < -(w / 2) || kx > w / 2 - 1) return 0.0;
      return p.delta_reading / p.delta_db;
    }
    case Mechanism::kGeometric: {
      require_integer(x);
      double alpha = geometric_success_prob(p);
      double log_alpha = -(p.epsilon / p.delta_db);
      return (1.0 - alpha) / (1.0 + alpha) * std::exp(std::fabs(x) * log_alpha);
    }
  }
  fail(Errc::kUnsupportedMechanism, "unknown mechanism tag");
}

NoiseSample select_mechanism(Mechanism m, const PrivacyParams& p, double reading_wh, Rng& rng) {
  if (!std::isfinite(reading_wh))
    fail(Errc::kInvalidArgument, "reading must be finite");
  switch (m) {
    case Mechanism::kLaplace:
      return sample_laplace(p, rng);
    case Mechanism::kGaussian:
      return sample_gaussian(p, rng);
    case Mechanism::kUniform:
      return sample_uniform(p, rng);
    case Mechanism::kGeometric:
      return sample_geometric(p, rng);
  }
  fail(Errc::kUnsupportedMechanism, "unknown mechanism tag");
}

const std::string& to_string(AggregateQuery q) {
  static const std::string kNames[3] = {"sum", "mean", "max"};
  return kNames[static_cast<int>(q)];
}

std::optional<AggregateQuery> query_from_string(std::string_view s) {
  if (s == "sum") return AggregateQuery::kSum;
  if (s == "mean") return AggregateQuery::kMean;
  if (s == "max") return AggregateQuery::kMax;
  return std::nullopt;
}

double aggregate(std::span<const double> dataset, AggregateQuery q) {
  if (dataset.empty()) return 0.0;
  switch (q) {
    case AggregateQuery::kSum: {
      double s = 0.0;
      for (double v : dataset) s += v;
      return s;
    }
    case AggregateQuery::kMean: {
      double s = 0.0;
      for (double v : dataset) s += v;
      return s / static_cast<double>(dataset.size());
    }
    case AggregateQuery::kMax: {
      double mx = dataset[0];
      for (double v : dataset) mx = std::max(mx, v);
      return mx;
    }
  }
  fail(Errc::kInvalidArgument, "unknown aggregate query");
}

double compute_sensitivity(std::span<const double> dataset, AggregateQuery q) {
  if (dataset.empty())
    fail(Errc::kInvalidArgument, "compute_sensitivity requires a nonempty dataset");
  for (double v : dataset)
    if (!std::isfinite(v)) fail(Errc::kInvalidArgument, "dataset values must be finite");
  double full = aggregate(dataset, q);
  double best = 0.0;
  std::vector<double> neighbor(dataset.size() - 1);
  for (std::size_t skip = 0; skip < dataset.size(); ++skip) {
    std::size_t j = 0;
    for (std::size_t i = 0; i < dataset.size(); ++i)
      if (i != skip) neighbor[j++] = dataset[i];
    best = std::max(best, std::fabs(full - aggregate(neighbor, q)));
  }
  return best;
}

}  // namespace dpmeter::dp
