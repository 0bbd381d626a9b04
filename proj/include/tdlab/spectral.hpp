#pragma once

// Operations in the spectral representation of H0: S-matrix action on
// packets, the Eisenbud-Wigner matrix -i S* dS/dlambda, the time-operator
// expectation in spectral and phase-space form, and the F_f(H0') commutator
// residual that gates the usual/symmetrized delay equality.

#include "tdlab/localisation.hpp"
#include "tdlab/models.hpp"

namespace tdlab {

// Fiber-wise product (S phi)(lambda) = S(lambda) phi(lambda). Grids must
// coincide or the S-matrix must carry an evaluator.
SpectralPacket apply_S(const FiberSMatrix& s, const SpectralPacket& phi);

// -i S(lambda)* dS/dlambda via centered differences with one Richardson step.
// Fills out (dim x dim, row-major). Requires s.eval.
void ew_fiber(const FiberSMatrix& s, double lambda, double step, cplx* out);

// -<phi, S*[T_f, S] phi> = int dlambda <phi(lambda), (-i S* dS/dlambda) phi(lambda)>.
// Asserts the imaginary residual stays below 1e-9 before discarding it.
double ew_expectation(const FiberSMatrix& s, const SpectralPacket& phi,
                      double step = 1e-3);

// Re int dlambda <phi(lambda), i dphi/dlambda> by centered differences on the
// packet grid; throws when the two-scale derivative estimate is unstable.
double tf_expectation_spectral(const SpectralPacket& phi);

// <phi, T phi> with the radial-f time operator, evaluated by alternating
// multiplications in the Phi- and H0'-representations.
double tf_expectation_phase_space(const SpectralPacket& phi, const ModelSpec& model,
                                  const LocalisationProfile& profile);

// || F_f(H0') S phi - S F_f(H0') phi || with F_f acting fiber-wise through
// F_f(v) = F_f(1)/|v|.
double ff_commutator_residual(const FiberSMatrix& s, const SpectralPacket& phi,
                              const LocalisationProfile& profile,
                              const ModelSpec& model);

// <phi, F_f(H0') phi> by fiber quadrature (free-sojourn scaling reference).
double ff_expectation(const SpectralPacket& phi, const LocalisationProfile& profile,
                      const ModelSpec& model);

}  // namespace tdlab
