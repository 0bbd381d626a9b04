// Scalar reference kernels. These define the semantics; SIMD variants must
// match them within floating-point reassociation tolerance.

#include "tdlab/kernels.hpp"

namespace tdlab::kernels::scalar {

void cmul(cplx* z, const cplx* w, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) z[i] *= w[i];
}

void cmul_to(cplx* out, const cplx* a, const cplx* w, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * w[i];
}

double weighted_abs2(const double* w, const cplx* z, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double re = z[i].real(), im = z[i].imag();
    acc += w[i] * (re * re + im * im);
  }
  return acc;
}

double abs2_sum(const cplx* z, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double re = z[i].real(), im = z[i].imag();
    acc += re * re + im * im;
  }
  return acc;
}

cplx weighted_dot(const double* w, const cplx* a, const cplx* b, std::size_t n) {
  double accr = 0.0, acci = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const cplx t = std::conj(a[i]) * b[i];
    accr += w[i] * t.real();
    acci += w[i] * t.imag();
  }
  return {accr, acci};
}

double dist2_sum(const cplx* a, const cplx* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double re = a[i].real() - b[i].real();
    const double im = a[i].imag() - b[i].imag();
    acc += re * re + im * im;
  }
  return acc;
}

void mix2(cplx* a, cplx* b, double c, double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const cplx ai = a[i], bi = b[i];
    a[i] = cplx(c * ai.real() + s * bi.imag(), c * ai.imag() - s * bi.real());
    b[i] = cplx(c * bi.real() + s * ai.imag(), c * bi.imag() - s * ai.real());
  }
}

}  // namespace tdlab::kernels::scalar
