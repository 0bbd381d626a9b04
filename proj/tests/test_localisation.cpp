#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "tdlab/localisation.hpp"

using namespace tdlab;

TEST_CASE("profile construction and basic shape") {
  CHECK_THROWS_AS(make_profile(1.0, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_profile(-1.0, 2.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_profile(1.0, 2.0, 0), std::invalid_argument);

  const auto p = make_profile(1.0, 2.0, 1);
  CHECK(eval_f(p, {0.0}) == 1.0);
  CHECK(eval_f(p, {0.5}) == 1.0);
  CHECK(eval_f(p, {3.0}) == 0.0);
  CHECK(eval_f(p, {2.0}) == 0.0);
  const double mid = eval_f(p, {1.5});
  CHECK(mid > 0.0);
  CHECK(mid < 1.0);

  // evenness and range at random points
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    const double x = dist(rng);
    const double v = eval_f(p, {x});
    CHECK(v == eval_f(p, {-x}));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("f is smooth across the plateau and support edges") {
  const auto p = make_profile(1.0, 2.0, 1);
  // finite-difference first derivatives stay bounded through both edges
  const double h = 1e-5;
  for (double x : {0.9, 0.999, 1.0001, 1.5, 1.9999, 2.001}) {
    const double d = (eval_f(p, {x + h}) - eval_f(p, {x - h})) / (2.0 * h);
    CHECK(std::abs(d) < 5.0);
    // analytic derivative agrees with the finite difference
    CHECK(eval_f_prime_radial(p, x) == doctest::Approx(d).epsilon(1e-4).scale(1.0));
  }
}

TEST_CASE("R_f log-scaling and evenness") {
  const auto p = make_profile(1.0, 2.0, 1);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(0.05, 5.0);
  const double tol = 1e-10;
  for (int i = 0; i < 25; ++i) {
    double x = dist(rng);
    if (i % 2) x = -x;
    const double base = eval_Rf(p, {x}, tol);
    CHECK(eval_Rf(p, {-x}, tol) == doctest::Approx(base).epsilon(1e-12).scale(1.0));
    for (double t : {2.0, 10.0}) {
      const double scaled = eval_Rf(p, {t * x}, tol);
      CHECK(std::abs(scaled - (base - std::log(t))) < 10.0 * tol);
    }
  }
  CHECK_THROWS_AS(eval_Rf(p, {0.0}, tol), std::domain_error);
}

TEST_CASE("R_f sharp-transition limit vanishes at |x| = 1") {
  const double eps = 1e-6;
  const auto p = make_profile(1.0, 1.0 + eps, 1);
  CHECK(std::abs(eval_Rf(p, {1.0}, 1e-12)) < 2.0 * eps);
}

TEST_CASE("gradient identities") {
  const auto p = make_profile(1.0, 2.0, 1);
  CHECK(eval_grad_Rf(p, {2.0})[0] == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK_THROWS_AS(eval_grad_Rf(p, {0.0}), std::domain_error);

  std::mt19937 rng(99);
  std::uniform_real_distribution<double> dist(0.02, 8.0);
  for (int i = 0; i < 100; ++i) {
    double x = dist(rng);
    if (i % 2) x = -x;
    // homogeneity x . grad R_f(x) = -1
    CHECK(std::abs(x * eval_grad_Rf(p, {x})[0] + 1.0) < 1e-12);
  }
  // closed form vs quadrature path
  for (double x : {0.3, 1.0, -1.7, 4.0}) {
    const double closed = eval_grad_Rf(p, {x})[0];
    const double quad = eval_grad_Rf_quadrature(p, {x})[0];
    CHECK(std::abs(closed - quad) < 1e-8);
  }
}

TEST_CASE("F_f positivity, bounds, scaling, evenness") {
  const auto p = make_profile(1.0, 2.0, 1);
  const double at1 = eval_Ff(p, {1.0});
  CHECK(at1 >= 2.0);
  CHECK(at1 <= 4.0);
  CHECK(eval_Ff(p, {-1.0}) == doctest::Approx(at1).epsilon(1e-12));
  CHECK_THROWS_AS(eval_Ff(p, {0.0}), std::domain_error);

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> dist(0.1, 6.0);
  for (int i = 0; i < 50; ++i) {
    const double x = dist(rng);
    const double fx = eval_Ff(p, {x});
    for (double t : {0.5, 3.0}) {
      CHECK(fx == doctest::Approx(t * eval_Ff(p, {t * x})).epsilon(1e-10));
    }
  }

  // homogeneity shortcut used on fiber velocities
  for (double v : {0.5, 1.0, 2.7}) {
    CHECK(Ff_of_speed(p, v) == doctest::Approx(eval_Ff(p, {v})).epsilon(1e-10));
  }
}
