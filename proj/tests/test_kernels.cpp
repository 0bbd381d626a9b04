#include <doctest.h>

#include <complex>
#include <random>
#include <vector>

#include "tdlab/kernels.hpp"

using namespace tdlab;
using kernels::Backend;
using kernels::cplx;

namespace {

std::vector<cplx> random_cvec(std::mt19937& rng, std::size_t n) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<cplx> v(n);
  for (auto& z : v) z = cplx(dist(rng), dist(rng));
  return v;
}

std::vector<double> random_rvec(std::mt19937& rng, std::size_t n) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

struct BackendGuard {
  ~BackendGuard() { kernels::force_backend(Backend::avx2); }
};

}  // namespace

// Every SIMD variant must agree with the scalar reference on the same data.
TEST_CASE("kernel backends are equivalent") {
  BackendGuard guard;
  std::mt19937 rng(1234);

  // test lengths straddle the vector width, including remainders
  for (std::size_t n : {1u, 2u, 3u, 7u, 64u, 1001u}) {
    auto a = random_cvec(rng, n);
    auto b = random_cvec(rng, n);
    auto w = random_rvec(rng, n);

    kernels::force_backend(Backend::scalar);
    auto a1 = a;
    kernels::cmul(a1.data(), b.data(), n);
    std::vector<cplx> o1(n);
    kernels::cmul_to(o1.data(), a.data(), b.data(), n);
    const double wa1 = kernels::weighted_abs2(w.data(), a.data(), n);
    const double s1 = kernels::abs2_sum(a.data(), n);
    const cplx d1 = kernels::weighted_dot(w.data(), a.data(), b.data(), n);
    const double dd1 = kernels::dist2_sum(a.data(), b.data(), n);
    auto ma1 = a, mb1 = b;
    kernels::mix2(ma1.data(), mb1.data(), 0.8, 0.6, n);

    kernels::force_backend(Backend::avx2);
    if (kernels::active_backend() != Backend::avx2) {
      MESSAGE("AVX2 not available on this host; scalar-only run");
      return;
    }
    auto a2 = a;
    kernels::cmul(a2.data(), b.data(), n);
    std::vector<cplx> o2(n);
    kernels::cmul_to(o2.data(), a.data(), b.data(), n);
    const double wa2 = kernels::weighted_abs2(w.data(), a.data(), n);
    const double s2 = kernels::abs2_sum(a.data(), n);
    const cplx d2 = kernels::weighted_dot(w.data(), a.data(), b.data(), n);
    const double dd2 = kernels::dist2_sum(a.data(), b.data(), n);
    auto ma2 = a, mb2 = b;
    kernels::mix2(ma2.data(), mb2.data(), 0.8, 0.6, n);

    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(a1[i] - a2[i]) < 1e-14);
      CHECK(std::abs(o1[i] - o2[i]) < 1e-14);
      CHECK(std::abs(ma1[i] - ma2[i]) < 1e-14);
      CHECK(std::abs(mb1[i] - mb2[i]) < 1e-14);
    }
    CHECK(wa1 == doctest::Approx(wa2).epsilon(1e-13));
    CHECK(s1 == doctest::Approx(s2).epsilon(1e-13));
    CHECK(std::abs(d1 - d2) < 1e-12);
    CHECK(dd1 == doctest::Approx(dd2).epsilon(1e-12));
  }
}

TEST_CASE("mix2 is the unitary exp(-i theta sigma_x)") {
  std::mt19937 rng(77);
  const std::size_t n = 33;
  auto a = random_cvec(rng, n);
  auto b = random_cvec(rng, n);
  const double theta = 0.37;
  const double norm_before = kernels::abs2_sum(a.data(), n) + kernels::abs2_sum(b.data(), n);

  auto am = a, bm = b;
  kernels::mix2(am.data(), bm.data(), std::cos(theta), std::sin(theta), n);
  const double norm_after = kernels::abs2_sum(am.data(), n) + kernels::abs2_sum(bm.data(), n);
  CHECK(norm_after == doctest::Approx(norm_before).epsilon(1e-14));

  // undo with the opposite angle
  kernels::mix2(am.data(), bm.data(), std::cos(theta), -std::sin(theta), n);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(std::abs(am[i] - a[i]) < 1e-14);
    CHECK(std::abs(bm[i] - b[i]) < 1e-14);
  }

  // reference formula
  kernels::mix2(am.data(), bm.data(), std::cos(theta), std::sin(theta), n);
  const cplx mi(0.0, -1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const cplx expect_a = std::cos(theta) * a[i] + mi * std::sin(theta) * b[i];
    const cplx expect_b = std::cos(theta) * b[i] + mi * std::sin(theta) * a[i];
    CHECK(std::abs(am[i] - expect_a) < 1e-14);
    CHECK(std::abs(bm[i] - expect_b) < 1e-14);
  }
}
