#include "tdlab/localisation.hpp"

#include <cmath>
#include <stdexcept>

#include "tdlab/quadrature.hpp"

namespace tdlab {

namespace {

double norm_of(const std::vector<double>& x) {
  double s = 0.0;
  for (double xi : x) s += xi * xi;
  return std::sqrt(s);
}

// exp(-1/u) mollifier pieces
double sigma(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }
double sigma_prime(double u) { return u > 0.0 ? std::exp(-1.0 / u) / (u * u) : 0.0; }

}  // namespace

// C^inf step: 0 at u<=0, 1 at u>=1, strictly increasing in between.
double smoothstep01(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const double p = sigma(u), q = sigma(1.0 - u);
  return p / (p + q);
}

double smoothstep01_prime(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  const double p = sigma(u), q = sigma(1.0 - u);
  const double d = p + q;
  return (sigma_prime(u) * q + p * sigma_prime(1.0 - u)) / (d * d);
}

LocalisationProfile make_profile(double plateau_radius, double support_radius,
                                 int dimension, double quadrature_tol) {
  if (!(plateau_radius > 0.0) || !(support_radius > plateau_radius))
    throw std::invalid_argument(
        "make_profile: need 0 < plateau_radius < support_radius");
  if (dimension < 1) throw std::invalid_argument("make_profile: dimension >= 1");
  if (!(quadrature_tol > 0.0))
    throw std::invalid_argument("make_profile: quadrature_tol must be positive");
  return LocalisationProfile{dimension, plateau_radius, support_radius, quadrature_tol};
}

double eval_f_radial(const LocalisationProfile& p, double s) {
  s = std::abs(s);
  if (s <= p.plateau_radius) return 1.0;
  if (s >= p.support_radius) return 0.0;
  return smoothstep01((p.support_radius - s) / (p.support_radius - p.plateau_radius));
}

double eval_f_prime_radial(const LocalisationProfile& p, double s) {
  s = std::abs(s);
  if (s <= p.plateau_radius || s >= p.support_radius) return 0.0;
  const double w = p.support_radius - p.plateau_radius;
  return -smoothstep01_prime((p.support_radius - s) / w) / w;
}

double eval_f(const LocalisationProfile& p, const std::vector<double>& x) {
  return eval_f_radial(p, norm_of(x));
}

double eval_Rf(const LocalisationProfile& p, const std::vector<double>& x,
               double quadrature_tol) {
  const double s = norm_of(x);
  if (s == 0.0) throw std::domain_error("eval_Rf: undefined at x = 0");
  const double A = p.plateau_radius / s;  // f(mu x) = 1 for mu <= A
  const double B = p.support_radius / s;  // f(mu x) = 0 for mu >= B
  const double tol = 0.5 * quadrature_tol;

  double result = 0.0;

  // mu in (0, 1]: integrand (f(mu s) - 1)/mu, identically zero below A.
  if (A < 1.0) {
    const double hi = std::min(1.0, B);
    result += adaptive_simpson(
        [&](double mu) { return (eval_f_radial(p, mu * s) - 1.0) / mu; }, A, hi, tol);
    if (B < 1.0) result += std::log(B);  // exact: f = 0 on [B, 1]
  }

  // mu in [1, inf): integrand f(mu s)/mu, identically zero above B.
  if (B > 1.0) {
    if (A > 1.0) result += std::log(A);  // exact: f = 1 on [1, A]
    const double lo = std::max(1.0, A);
    result += adaptive_simpson(
        [&](double mu) { return eval_f_radial(p, mu * s) / mu; }, lo, B, tol);
  }
  return result;
}

double eval_Rf(const LocalisationProfile& p, const std::vector<double>& x) {
  return eval_Rf(p, x, p.quadrature_tol);
}

std::vector<double> eval_grad_Rf(const LocalisationProfile& p,
                                 const std::vector<double>& x) {
  const double s = norm_of(x);
  if (s == 0.0) throw std::domain_error("eval_grad_Rf: undefined at x = 0");
  (void)p;  // radial profiles: grad R_f(x) = -x/|x|^2 independent of f
  std::vector<double> g(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) g[j] = -x[j] / (s * s);
  return g;
}

std::vector<double> eval_grad_Rf_quadrature(const LocalisationProfile& p,
                                            const std::vector<double>& x) {
  const double s = norm_of(x);
  if (s == 0.0) throw std::domain_error("eval_grad_Rf_quadrature: undefined at x = 0");
  const double A = p.plateau_radius / s;
  const double B = p.support_radius / s;
  // (grad f)(mu x) = (x/s) f'(mu s); support is mu in [A, B].
  const double radial = adaptive_simpson(
      [&](double mu) { return eval_f_prime_radial(p, mu * s); }, A, B,
      p.quadrature_tol);
  std::vector<double> g(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) g[j] = x[j] / s * radial;
  return g;
}

double eval_Ff(const LocalisationProfile& p, const std::vector<double>& x) {
  const double s = norm_of(x);
  if (s == 0.0) throw std::domain_error("eval_Ff: undefined at x = 0 (divergent)");
  const double A = p.plateau_radius / s;
  const double B = p.support_radius / s;
  // Even integrand: 2 * (plateau part + transition quadrature).
  const double transition = adaptive_simpson(
      [&](double mu) { return eval_f_radial(p, mu * s); }, A, B, p.quadrature_tol);
  return 2.0 * (A + transition);
}

double Ff_at_unit(const LocalisationProfile& p) {
  const double transition = adaptive_simpson(
      [&](double u) { return eval_f_radial(p, u); }, p.plateau_radius,
      p.support_radius, 1e-13);
  return 2.0 * (p.plateau_radius + transition);
}

double Ff_of_speed(const LocalisationProfile& p, double speed) {
  const double v = std::abs(speed);
  if (v == 0.0) throw std::domain_error("Ff_of_speed: zero speed");
  return Ff_at_unit(p) / v;
}

}  // namespace tdlab
