#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "dpmeter/error.hpp"
#include "dpmeter/kernels.hpp"
#include "dpmeter/rng.hpp"
#include "kernels/transforms.hpp"
#include "kernels/vec_scalar.hpp"

using dpmeter::Rng;
namespace k = dpmeter::kernels;

namespace {

double vlog1(double x) { return k::vlog(k::VecD1{x}).v; }

std::vector<double> units(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> u(n);
  rng.fill_unit_open(u);
  return u;
}

}  // namespace

TEST_CASE("vlog matches std::log to a few ulp on the production domain") {
  // Production inputs are in (0, 2): laplace feeds 1-2|v|, geometric u*(1+a).
  for (int i = 0; i <= 20000; ++i) {
    double x = std::exp2(-52.0 + 53.0 * i / 20000.0);  // 2^-52 .. 2
    double want = std::log(x);
    double got = vlog1(x);
    CHECK(std::fabs(got - want) <= 1e-14 * std::max(1.0, std::fabs(want)));
  }
  for (int i = 0; i <= 20000; ++i) {
    double x = 0.5 + 1.5 * i / 20000.0;  // dense around the m-fold boundary and 1
    double want = std::log(x);
    double got = vlog1(x);
    CHECK(std::fabs(got - want) <= 1e-15 * std::max(1.0, std::fabs(want)));
  }
  CHECK(vlog1(1.0) == 0.0);
  CHECK(vlog1(2.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(vlog1(0.5) == doctest::Approx(-std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("vsincos matches libm within 1e-13 on [0, 2pi)") {
  for (int i = 0; i < 40000; ++i) {
    double theta = k::kTwoPi * i / 40000.0;
    auto sc = k::vsincos(k::VecD1{theta});
    CHECK(std::fabs(sc.sin.v - std::sin(theta)) <= 1e-13);
    CHECK(std::fabs(sc.cos.v - std::cos(theta)) <= 1e-13);
  }
  // quadrant boundaries, both sides
  const double kPio2 = 1.5707963267948966;
  for (int q = 0; q <= 4; ++q) {
    for (double off : {-1e-9, 0.0, 1e-9}) {
      double theta = q * kPio2 + off;
      if (theta < 0.0 || theta >= k::kTwoPi) continue;
      auto sc = k::vsincos(k::VecD1{theta});
      CHECK(std::fabs(sc.sin.v - std::sin(theta)) <= 1e-13);
      CHECK(std::fabs(sc.cos.v - std::cos(theta)) <= 1e-13);
    }
  }
}

TEST_CASE("laplace transform implements the inverse CDF") {
  const double b = 100.0;
  auto one = [&](double u) {
    double out = 0.0;
    k::ops_for(k::Backend::kScalar).laplace_from_unit(&u, 1, b, &out);
    return out;
  };
  CHECK(one(0.75) == doctest::Approx(b * std::log(2.0)).epsilon(1e-13));
  CHECK(one(0.25) == doctest::Approx(-b * std::log(2.0)).epsilon(1e-13));
  CHECK(std::fabs(one(0.5)) == 0.0);
  // reference formula with libm
  for (double u : {0.001, 0.1, 0.4999, 0.5001, 0.9, 0.999}) {
    double v = u - 0.5;
    double want = -b * (v >= 0.0 ? 1.0 : -1.0) * std::log(1.0 - 2.0 * std::fabs(v));
    CHECK(one(u) == doctest::Approx(want).epsilon(1e-12));
  }
  // skew-symmetry of the transform
  for (double u : {0.6, 0.77, 0.9999}) CHECK(one(u) == doctest::Approx(-one(1.0 - u)).epsilon(1e-12));
}

TEST_CASE("gaussian transform implements Box-Muller") {
  const double sigma = 3.0;
  double u[2];
  double z[2];
  auto pair = [&](double u1, double u2) {
    u[0] = u1;
    u[1] = u2;
    k::ops_for(k::Backend::kScalar).gaussian_from_unit(u, 1, sigma, z);
  };
  pair(0.5, 0.25);
  double r = std::sqrt(-2.0 * std::log(0.5));
  CHECK(z[0] == doctest::Approx(sigma * r * std::cos(k::kTwoPi * 0.25)).epsilon(1e-10));
  CHECK(z[1] == doctest::Approx(sigma * r * std::sin(k::kTwoPi * 0.25)).epsilon(1e-10));
  for (double u1 : {0.01, 0.37, 0.93}) {
    for (double u2 : {0.05, 0.33, 0.62, 0.98}) {
      pair(u1, u2);
      double rr = std::sqrt(-2.0 * std::log(u1));
      CHECK(z[0] == doctest::Approx(sigma * rr * std::cos(k::kTwoPi * u2)).epsilon(1e-10));
      CHECK(z[1] == doctest::Approx(sigma * rr * std::sin(k::kTwoPi * u2)).epsilon(1e-10));
    }
  }
}

TEST_CASE("geometric transform returns the inverse-CDF integers") {
  // alpha = 0.5: CDF(-1) = 1/3, CDF(0) = 2/3.
  k::GeometricParams gp;
  gp.log_alpha = std::log(0.5);
  gp.one_plus_alpha = 1.5;
  gp.thresh_neg = 0.5 / 1.5;
  gp.thresh_pos = 1.0 / 1.5;
  auto one = [&](double u) {
    double out = 0.0;
    k::ops_for(k::Backend::kScalar).geometric_from_unit(&u, 1, gp, &out);
    return out;
  };
  CHECK(one(0.5) == 0.0);
  CHECK(one(0.34) == 0.0);
  CHECK(one(0.66) == 0.0);
  CHECK(one(0.2) == -1.0);
  CHECK(one(0.333333333333) == -1.0);
  CHECK(one(0.1) == -2.0);  // CDF(-2) = 1/6 >= 0.1 > CDF(-3) = 1/12
  CHECK(one(0.9) == 2.0);   // CDF(1) = 5/6 < 0.9 <= CDF(2) = 11/12
  CHECK(one(0.99) == 6.0);  // 1 - CDF(5) = 1/96 > 0.01 >= 1 - CDF(6) = 1/192
  // integrality over a batch
  auto u = units(4096, 7);
  std::vector<double> out(u.size());
  k::ops_for(k::Backend::kScalar).geometric_from_unit(u.data(), u.size(), gp, out.data());
  for (double x : out) CHECK(std::nearbyint(x) == x);
}

TEST_CASE("reductions use the fixed 4-lane accumulator order") {
  std::vector<double> x = {1e16, 1.0, -1e16, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0};
  // lanes: acc0 = 1e16 + 3 + 7, acc1 = 1 + 4, acc2 = -1e16 + 5, acc3 = 2 + 6
  double acc0 = 1e16 + 3.0 + 7.0;
  double acc1 = 1.0 + 4.0 + 0.0;
  double acc2 = -1e16 + 5.0;
  double acc3 = 2.0 + 6.0;
  double want = (acc0 + acc2) + (acc1 + acc3);
  CHECK(k::ops_for(k::Backend::kScalar).sum(x.data(), x.size()) == want);
}

TEST_CASE("scalar and avx2 backends are bit-identical") {
  if (!k::avx2_supported()) {
    MESSAGE("avx2 not available; skipping equivalence checks");
    return;
  }
  const k::Ops& s = k::ops_for(k::Backend::kScalar);
  const k::Ops& a = k::ops_for(k::Backend::kAvx2);
  const std::size_t sizes[] = {1, 2, 3, 4, 5, 7, 8, 13, 144, 1000, 1001};

  for (std::size_t n : sizes) {
    auto u = units(n, 1000 + n);
    std::vector<double> o1(n), o2(n);

    s.laplace_from_unit(u.data(), n, 100.0, o1.data());
    a.laplace_from_unit(u.data(), n, 100.0, o2.data());
    CHECK(std::memcmp(o1.data(), o2.data(), n * sizeof(double)) == 0);

    for (double eps : {0.01, 0.3, 1.0, 3.0}) {
      double alpha = std::exp(-eps);
      k::GeometricParams gp{-eps, 1.0 + alpha, alpha / (1.0 + alpha), 1.0 / (1.0 + alpha)};
      s.geometric_from_unit(u.data(), n, gp, o1.data());
      a.geometric_from_unit(u.data(), n, gp, o2.data());
      CHECK(std::memcmp(o1.data(), o2.data(), n * sizeof(double)) == 0);
    }

    auto u2 = units(2 * n, 2000 + n);
    std::vector<double> g1(2 * n), g2(2 * n);
    s.gaussian_from_unit(u2.data(), n, 100.0, g1.data());
    a.gaussian_from_unit(u2.data(), n, 100.0, g2.data());
    CHECK(std::memcmp(g1.data(), g2.data(), 2 * n * sizeof(double)) == 0);

    // mixed-sign data for the elementwise ops and reductions
    std::vector<double> p(n), q(n);
    Rng rng(3000 + n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = (rng.unit_open() - 0.5) * 1e6;
      q[i] = (rng.unit_open() - 0.5) * 1e6;
    }
    s.add(p.data(), q.data(), n, o1.data());
    a.add(p.data(), q.data(), n, o2.data());
    CHECK(std::memcmp(o1.data(), o2.data(), n * sizeof(double)) == 0);
    s.abs_diff(p.data(), q.data(), n, o1.data());
    a.abs_diff(p.data(), q.data(), n, o2.data());
    CHECK(std::memcmp(o1.data(), o2.data(), n * sizeof(double)) == 0);

    double s1 = s.sum(p.data(), n);
    double s2 = a.sum(p.data(), n);
    CHECK(std::memcmp(&s1, &s2, sizeof(double)) == 0);
    s1 = s.sum_abs_diff(p.data(), q.data(), n);
    s2 = a.sum_abs_diff(p.data(), q.data(), n);
    CHECK(std::memcmp(&s1, &s2, sizeof(double)) == 0);
  }
}

TEST_CASE("backend selection") {
  k::Backend initial = k::active_backend();
  CHECK(k::backend_name(k::Backend::kScalar) == "scalar");
  CHECK(k::backend_name(k::Backend::kAvx2) == "avx2");
  k::set_backend(k::Backend::kScalar);
  CHECK(k::active_backend() == k::Backend::kScalar);
  if (k::avx2_supported()) {
    k::set_backend(k::Backend::kAvx2);
    CHECK(k::active_backend() == k::Backend::kAvx2);
  } else {
    CHECK_THROWS_AS(k::set_backend(k::Backend::kAvx2), dpmeter::Error);
  }
  k::set_backend(initial);
}
