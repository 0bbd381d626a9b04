#pragma once

// Analytic machinery for the Friedrichs-Lee scalar S-matrix:
//
//   S(lambda) = (lambda - e0 - g^2 F(lambda - i0)) / (lambda - e0 - g^2 F(lambda + i0)),
//   F(z) = int |v(x)|^2 / (z - x) dx,   F(lambda +- i0) = PV(lambda) -+ i pi |v(lambda)|^2,
//
// with PV by symmetric quadrature. Writing X = lambda - e0 - g^2 PV and
// Y = pi g^2 |v|^2 gives S = (X - iY)/(X + iY), phase theta = -2 atan2(Y, X).

#include <complex>

#include "tdlab/models.hpp"

namespace tdlab {

// PV integral P int |v(x)|^2/(lambda - x) dx via the symmetric form
// int_0^inf [g(lambda-u) - g(lambda+u)]/u du.
double friedrichs_pv(const ModelSpec& model, double lambda);

double friedrichs_absv2(const ModelSpec& model, double lambda);

cplx friedrichs_s(const ModelSpec& model, double lambda);

// d theta / d lambda from the closed form (PV' computed by the same
// symmetric quadrature applied to d|v|^2/dx).
double friedrichs_phase_derivative(const ModelSpec& model, double lambda);

struct ResonanceFit {
  double lambda_res = 0.0;  // zero of X
  double gamma_half = 0.0;  // |Im| of the S-matrix pole: Y(lambda_res)/X'(lambda_res)
};

// Locates the resonance from the stationary data. Throws if the coupling
// vanishes or no sign change of X is bracketed near the level.
ResonanceFit friedrichs_pole_fit(const ModelSpec& model);

}  // namespace tdlab
