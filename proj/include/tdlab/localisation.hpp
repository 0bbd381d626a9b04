#pragma once

// The localisation function f and its derived averages.
//
// f is an even C^inf bump: 1 on |x| <= a, 0 on |x| >= b, with an
// exp(-1/x)-based smooth step in between. Compact support keeps every
// mu-integral below on a finite range.
//
//   R_f(x) = int_0^inf dmu/mu (f(mu x) - chi_[0,1](mu))   (x != 0)
//   F_f(x) = int_R dmu f(mu x)                            (x != 0)
//
// Key identities (tested): x . grad R_f(x) = -1, R_f(t x) = R_f(x) - ln t,
// F_f(x) = t F_f(t x), and for radial f grad R_f(x) = -x/|x|^2.

#include <vector>

namespace tdlab {

struct LocalisationProfile {
  int dimension = 1;
  double plateau_radius = 1.0;  // a
  double support_radius = 2.0;  // b
  double quadrature_tol = 1e-10;
};

// Throws std::invalid_argument unless 0 < a < b and dimension >= 1.
LocalisationProfile make_profile(double plateau_radius, double support_radius,
                                 int dimension, double quadrature_tol = 1e-10);

// The exp(-1/x)-based C^inf step: 0 for u <= 0, 1 for u >= 1.
double smoothstep01(double u);
double smoothstep01_prime(double u);

// Radial value f(s) for s = |x| >= 0, and its derivative df/ds.
double eval_f_radial(const LocalisationProfile& p, double s);
double eval_f_prime_radial(const LocalisationProfile& p, double s);

// f at a d-vector.
double eval_f(const LocalisationProfile& p, const std::vector<double>& x);

// R_f(x); throws std::domain_error at x = 0. The plateau part of the integral
// is evaluated in closed form (exact logs), only the transition band is
// integrated numerically.
double eval_Rf(const LocalisationProfile& p, const std::vector<double>& x,
               double quadrature_tol);
double eval_Rf(const LocalisationProfile& p, const std::vector<double>& x);

// grad R_f(x): radial closed form -x/|x|^2.
std::vector<double> eval_grad_Rf(const LocalisationProfile& p, const std::vector<double>& x);
// Independent quadrature path int_0^inf dmu (grad f)(mu x); agrees with the
// closed form for radial profiles.
std::vector<double> eval_grad_Rf_quadrature(const LocalisationProfile& p,
                                            const std::vector<double>& x);

// F_f(x) > 0; throws std::domain_error at x = 0.
double eval_Ff(const LocalisationProfile& p, const std::vector<double>& x);

// F_f evaluated on a speed via homogeneity: F_f(v) = F_f(1)/|v|. The unit
// value is computed once per call chain at tight tolerance.
double Ff_at_unit(const LocalisationProfile& p);
double Ff_of_speed(const LocalisationProfile& p, double speed);

}  // namespace tdlab
