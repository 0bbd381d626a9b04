// Runtime backend selection. Chosen once from CPU features; stable for the
// lifetime of the process so reruns on one machine are bit-exact.

#include "tdlab/kernels.hpp"

namespace tdlab::kernels {

namespace scalar {
void cmul(cplx*, const cplx*, std::size_t);
void cmul_to(cplx*, const cplx*, const cplx*, std::size_t);
double weighted_abs2(const double*, const cplx*, std::size_t);
double abs2_sum(const cplx*, std::size_t);
cplx weighted_dot(const double*, const cplx*, const cplx*, std::size_t);
double dist2_sum(const cplx*, const cplx*, std::size_t);
void mix2(cplx*, cplx*, double, double, std::size_t);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define TDLAB_HAVE_AVX2_TU 1
namespace avx2 {
void cmul(cplx*, const cplx*, std::size_t);
void cmul_to(cplx*, const cplx*, const cplx*, std::size_t);
double weighted_abs2(const double*, const cplx*, std::size_t);
double abs2_sum(const cplx*, std::size_t);
cplx weighted_dot(const double*, const cplx*, const cplx*, std::size_t);
double dist2_sum(const cplx*, const cplx*, std::size_t);
void mix2(cplx*, cplx*, double, double, std::size_t);
}  // namespace avx2
#endif

namespace {

struct Vtable {
  void (*cmul)(cplx*, const cplx*, std::size_t);
  void (*cmul_to)(cplx*, const cplx*, const cplx*, std::size_t);
  double (*weighted_abs2)(const double*, const cplx*, std::size_t);
  double (*abs2_sum)(const cplx*, std::size_t);
  cplx (*weighted_dot)(const double*, const cplx*, const cplx*, std::size_t);
  double (*dist2_sum)(const cplx*, const cplx*, std::size_t);
  void (*mix2)(cplx*, cplx*, double, double, std::size_t);
  Backend backend;
};

constexpr Vtable kScalar{scalar::cmul,         scalar::cmul_to, scalar::weighted_abs2,
                         scalar::abs2_sum,     scalar::weighted_dot,
                         scalar::dist2_sum, scalar::mix2,  Backend::scalar};

#ifdef TDLAB_HAVE_AVX2_TU
constexpr Vtable kAvx2{avx2::cmul,         avx2::cmul_to, avx2::weighted_abs2,
                       avx2::abs2_sum,     avx2::weighted_dot,
                       avx2::dist2_sum, avx2::mix2,  Backend::avx2};
#endif

bool cpu_has_avx2() {
#if defined(TDLAB_HAVE_AVX2_TU) && defined(__GNUC__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Vtable* select_default() {
#ifdef TDLAB_HAVE_AVX2_TU
  if (cpu_has_avx2()) return &kAvx2;
#endif
  return &kScalar;
}

const Vtable* g_active = select_default();

}  // namespace

void cmul(cplx* z, const cplx* w, std::size_t n) { g_active->cmul(z, w, n); }
void cmul_to(cplx* out, const cplx* a, const cplx* w, std::size_t n) {
  g_active->cmul_to(out, a, w, n);
}
double weighted_abs2(const double* w, const cplx* z, std::size_t n) {
  return g_active->weighted_abs2(w, z, n);
}
double abs2_sum(const cplx* z, std::size_t n) { return g_active->abs2_sum(z, n); }
cplx weighted_dot(const double* w, const cplx* a, const cplx* b, std::size_t n) {
  return g_active->weighted_dot(w, a, b, n);
}
double dist2_sum(const cplx* a, const cplx* b, std::size_t n) {
  return g_active->dist2_sum(a, b, n);
}
void mix2(cplx* a, cplx* b, double c, double s, std::size_t n) {
  g_active->mix2(a, b, c, s, n);
}

Backend active_backend() { return g_active->backend; }

std::string backend_name() {
  switch (g_active->backend) {
    case Backend::avx2: return "avx2";
    default: return "scalar";
  }
}

void force_backend(Backend b) {
  if (b == Backend::scalar) {
    g_active = &kScalar;
    return;
  }
#ifdef TDLAB_HAVE_AVX2_TU
  if (b == Backend::avx2 && cpu_has_avx2()) {
    g_active = &kAvx2;
    return;
  }
#endif
  g_active = &kScalar;
}

}  // namespace tdlab::kernels
