#pragma once

// Data-parallel inner-loop kernels used by the propagators and quadratures.
// Every kernel has a scalar reference implementation and may have SIMD
// variants; the active variant is selected once at startup from CPU features
// and can be overridden (see force_backend) for equivalence testing.

#include <complex>
#include <cstddef>
#include <string>

namespace tdlab::kernels {

using cplx = std::complex<double>;

// z[i] *= w[i]  (phase application, S-matrix diagonal action, ...)
void cmul(cplx* z, const cplx* w, std::size_t n);

// out[i] = a[i] * w[i]
void cmul_to(cplx* out, const cplx* a, const cplx* w, std::size_t n);

// sum_i w[i] |z[i]|^2  (localisation expectations, quadrature norms)
double weighted_abs2(const double* w, const cplx* z, std::size_t n);

// sum_i |z[i]|^2
double abs2_sum(const cplx* z, std::size_t n);

// sum_i w[i] conj(a[i]) b[i]
cplx weighted_dot(const double* w, const cplx* a, const cplx* b, std::size_t n);

// sum_i |a[i] - b[i]|^2  (Moller / asymptotic-coupling residuals)
double dist2_sum(const cplx* a, const cplx* b, std::size_t n);

// In-place pointwise 2x2 unitary exp(-i theta sigma_x):
//   a[i] <- c*a[i] - i s*b[i],  b[i] <- c*b[i] - i s*a[i],  c=cos(theta), s=sin(theta)
void mix2(cplx* a, cplx* b, double c, double s, std::size_t n);

enum class Backend { scalar, avx2 };

Backend active_backend();
std::string backend_name();

// Test hook: pin the backend (falls back to scalar if unsupported).
void force_backend(Backend b);

}  // namespace tdlab::kernels
