// AVX2+FMA kernel variants. Compiled with -mavx2 -mfma in its own translation
// unit; only reached through the dispatch table when the CPU reports AVX2.

#include "tdlab/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

namespace tdlab::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

// [w0, w0, w1, w1] from two consecutive weights
inline __m256d expand_weights(const double* w) {
  __m256d t = _mm256_castpd128_pd256(_mm_loadu_pd(w));
  return _mm256_permute4x64_pd(t, 0x50);
}

inline __m256d cmul2(__m256d vz, __m256d vw) {
  __m256d wr = _mm256_movedup_pd(vw);                  // [c0,c0,c1,c1]
  __m256d wi = _mm256_permute_pd(vw, 0xF);             // [d0,d0,d1,d1]
  __m256d zs = _mm256_permute_pd(vz, 0x5);             // [b0,a0,b1,a1]
  return _mm256_fmaddsub_pd(vz, wr, _mm256_mul_pd(zs, wi));
}

}  // namespace

void cmul(cplx* z, const cplx* w, std::size_t n) {
  auto* zd = reinterpret_cast<double*>(z);
  const auto* wd = reinterpret_cast<const double*>(w);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d vz = _mm256_loadu_pd(zd + 2 * i);
    __m256d vw = _mm256_loadu_pd(wd + 2 * i);
    _mm256_storeu_pd(zd + 2 * i, cmul2(vz, vw));
  }
  for (; i < n; ++i) z[i] *= w[i];
}

void cmul_to(cplx* out, const cplx* a, const cplx* w, std::size_t n) {
  auto* od = reinterpret_cast<double*>(out);
  const auto* ad = reinterpret_cast<const double*>(a);
  const auto* wd = reinterpret_cast<const double*>(w);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d va = _mm256_loadu_pd(ad + 2 * i);
    __m256d vw = _mm256_loadu_pd(wd + 2 * i);
    _mm256_storeu_pd(od + 2 * i, cmul2(va, vw));
  }
  for (; i < n; ++i) out[i] = a[i] * w[i];
}

double weighted_abs2(const double* w, const cplx* z, std::size_t n) {
  const auto* zd = reinterpret_cast<const double*>(z);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d vz = _mm256_loadu_pd(zd + 2 * i);
    __m256d vw = expand_weights(w + i);
    acc = _mm256_fmadd_pd(_mm256_mul_pd(vz, vz), vw, acc);
  }
  double tail = 0.0;
  for (; i < n; ++i) {
    const double re = z[i].real(), im = z[i].imag();
    tail += w[i] * (re * re + im * im);
  }
  return hsum(acc) + tail;
}

double abs2_sum(const cplx* z, std::size_t n) {
  const auto* zd = reinterpret_cast<const double*>(z);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d vz = _mm256_loadu_pd(zd + 2 * i);
    acc = _mm256_fmadd_pd(vz, vz, acc);
  }
  double tail = 0.0;
  for (; i < n; ++i) {
    const double re = z[i].real(), im = z[i].imag();
    tail += re * re + im * im;
  }
  return hsum(acc) + tail;
}

cplx weighted_dot(const double* w, const cplx* a, const cplx* b, std::size_t n) {
  const auto* ad = reinterpret_cast<const double*>(a);
  const auto* bd = reinterpret_cast<const double*>(b);
  // conj(a)*b = (ar*br + ai*bi) + i (ar*bi - ai*br)
  __m256d accr = _mm256_setzero_pd();
  __m256d acci = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d va = _mm256_loadu_pd(ad + 2 * i);
    __m256d vb = _mm256_loadu_pd(bd + 2 * i);
    __m256d vw = expand_weights(w + i);
    accr = _mm256_fmadd_pd(_mm256_mul_pd(va, vb), vw, accr);
    __m256d bs = _mm256_permute_pd(vb, 0x5);  // [bi, br] pairs
    acci = _mm256_fmadd_pd(_mm256_mul_pd(va, bs), vw, acci);
  }
  // accr lanes hold w*ar*br, w*ai*bi -> plain sum.
  // acci lanes hold w*ar*bi, w*ai*br -> need (+,-) alternation.
  const __m256d sgn = _mm256_set_pd(-0.0, 0.0, -0.0, 0.0);
  acci = _mm256_xor_pd(acci, sgn);
  double re = hsum(accr), im = hsum(acci);
  for (; i < n; ++i) {
    const cplx t = std::conj(a[i]) * b[i];
    re += w[i] * t.real();
    im += w[i] * t.imag();
  }
  return {re, im};
}

double dist2_sum(const cplx* a, const cplx* b, std::size_t n) {
  const auto* ad = reinterpret_cast<const double*>(a);
  const auto* bd = reinterpret_cast<const double*>(b);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d vd = _mm256_sub_pd(_mm256_loadu_pd(ad + 2 * i), _mm256_loadu_pd(bd + 2 * i));
    acc = _mm256_fmadd_pd(vd, vd, acc);
  }
  double tail = 0.0;
  for (; i < n; ++i) {
    const double re = a[i].real() - b[i].real();
    const double im = a[i].imag() - b[i].imag();
    tail += re * re + im * im;
  }
  return hsum(acc) + tail;
}

void mix2(cplx* a, cplx* b, double c, double s, std::size_t n) {
  auto* ad = reinterpret_cast<double*>(a);
  auto* bd = reinterpret_cast<double*>(b);
  const __m256d vc = _mm256_set1_pd(c);
  const __m256d vs = _mm256_set_pd(-s, s, -s, s);  // [+s,-s] per complex
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d va = _mm256_loadu_pd(ad + 2 * i);
    __m256d vb = _mm256_loadu_pd(bd + 2 * i);
    __m256d bs = _mm256_permute_pd(vb, 0x5);
    __m256d as = _mm256_permute_pd(va, 0x5);
    _mm256_storeu_pd(ad + 2 * i, _mm256_fmadd_pd(vc, va, _mm256_mul_pd(vs, bs)));
    _mm256_storeu_pd(bd + 2 * i, _mm256_fmadd_pd(vc, vb, _mm256_mul_pd(vs, as)));
  }
  for (; i < n; ++i) {
    const cplx ai = a[i], bi = b[i];
    a[i] = cplx(c * ai.real() + s * bi.imag(), c * ai.imag() - s * bi.real());
    b[i] = cplx(c * bi.real() + s * ai.imag(), c * bi.imag() - s * ai.real());
  }
}

}  // namespace tdlab::kernels::avx2

#endif  // x86_64
