// Stationary S-matrix computation for the three models.

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "tdlab/friedrichs.hpp"
#include "tdlab/models.hpp"
#include "tdlab/quadrature.hpp"

namespace tdlab {

namespace {

double sq(double x) { return x * x; }

// cos(sqrt(z) h) and sin(sqrt(z) h)/sqrt(z), entire in z (real argument).
double cos_sqrt(double z, double h) {
  if (z >= 0.0) return std::cos(std::sqrt(z) * h);
  return std::cosh(std::sqrt(-z) * h);
}

double sinc_sqrt(double z, double h) {
  const double w = z * h * h;
  if (std::abs(w) < 1e-8) return h * (1.0 - w / 6.0 + w * w / 120.0);
  if (z > 0.0) {
    const double q = std::sqrt(z);
    return std::sin(q * h) / q;
  }
  const double q = std::sqrt(-z);
  return std::sinh(q * h) / q;
}

struct Transfer2 {
  // real 2x2 with unit determinant: propagates (u, u') across a slab
  double m11 = 1.0, m12 = 0.0, m21 = 0.0, m22 = 1.0;
};

Transfer2 slab(double q2, double h) {
  // u'' = (V - lambda) u = -q2 u on a slab of width h
  Transfer2 t;
  t.m11 = t.m22 = cos_sqrt(q2, h);
  t.m12 = sinc_sqrt(q2, h);
  t.m21 = -q2 * t.m12;
  return t;
}

Transfer2 mul(const Transfer2& a, const Transfer2& b) {
  // result = a * b (b applied first)
  Transfer2 r;
  r.m11 = a.m11 * b.m11 + a.m12 * b.m21;
  r.m12 = a.m11 * b.m12 + a.m12 * b.m22;
  r.m21 = a.m21 * b.m11 + a.m22 * b.m21;
  r.m22 = a.m21 * b.m12 + a.m22 * b.m22;
  return r;
}

// Fiber S from a total transfer matrix over [0, L] at wavenumber k.
// Basis (right-mover, left-mover); S = [[t, r'], [r, t']].
void smatrix_from_transfer(const Transfer2& M, double k, double L, cplx* out) {
  const cplx I(0.0, 1.0);
  const cplx e_m = std::polar(1.0, -k * L);
  const cplx denom = I * k * (M.m11 + M.m22) + k * k * M.m12 - M.m21;
  const cplx t = 2.0 * I * k * e_m / denom;
  const cplx r = -(M.m21 - I * k * M.m11 + I * k * M.m22 + k * k * M.m12) /
                 (M.m21 - I * k * M.m11 - I * k * M.m22 - k * k * M.m12);
  const cplx tp = t;  // det M = 1
  const cplx rp = (tp * (M.m11 - I * k * M.m12) - e_m) * e_m;
  out[0] = t;
  out[1] = rp;
  out[2] = r;
  out[3] = tp;
}

void smatrix_b(const ModelSpec& model, double lambda, cplx* out);

}  // namespace

void smatrix_a_closed(const ModelSpec& model, double lambda, cplx* out) {
  const auto& p = model.schrodinger;
  if (p.potential == PotentialKind::none) {
    out[0] = out[3] = 1.0;
    out[1] = out[2] = 0.0;
    return;
  }
  if (p.potential != PotentialKind::square)
    throw std::logic_error("smatrix_a_closed: closed form only for the square barrier");
  if (!(lambda > 0.0)) throw std::domain_error("smatrix_a_closed: lambda <= 0");
  const double k = std::sqrt(lambda);
  const double L = p.barrier_length;
  const double q2 = lambda - p.v0;
  const cplx I(0.0, 1.0);
  const double C = cos_sqrt(q2, L);
  const double Ms = sinc_sqrt(q2, L);
  const cplx dtilde = 2.0 * I * k * C + (k * k + q2) * Ms;
  const cplx t = 2.0 * I * k * std::polar(1.0, -k * L) / dtilde;
  const cplx r = p.v0 * Ms / dtilde;  // (k^2 - q^2) = V0
  out[0] = t;
  out[1] = r * std::polar(1.0, -2.0 * k * L);
  out[2] = r;
  out[3] = t;
}

void smatrix_a_transfer(const ModelSpec& model, double lambda, cplx* out, double tol) {
  if (!(lambda > 0.0)) throw std::domain_error("smatrix_a_transfer: lambda <= 0");
  const double k = std::sqrt(lambda);
  const auto [lo, hi] = model.interaction_support();
  if (hi <= lo) {
    out[0] = out[3] = 1.0;
    out[1] = out[2] = 0.0;
    return;
  }

  // Transfer across [lo, hi] with midpoint-sampled slabs, count doubled until
  // the fiber stabilizes. Exact for piecewise-constant potentials once slab
  // edges align.
  auto total = [&](std::size_t slices) {
    const double h = (hi - lo) / static_cast<double>(slices);
    Transfer2 M;
    for (std::size_t i = 0; i < slices; ++i) {
      const double xm = lo + (static_cast<double>(i) + 0.5) * h;
      M = mul(slab(lambda - model.potential_at(xm), h), M);
    }
    return M;
  };

  // The scattering data is defined relative to waves referenced to x = 0 and
  // x = L of the interaction window; shift phases if the window is not [0,L].
  const double L = hi - lo;
  cplx cur[4];
  std::size_t slices = 8;
  smatrix_from_transfer(total(slices), k, L, cur);
  for (;;) {
    slices *= 2;
    cplx next[4];
    smatrix_from_transfer(total(slices), k, L, next);
    double diff = 0.0;
    for (int i = 0; i < 4; ++i) diff = std::max(diff, std::abs(next[i] - cur[i]));
    std::copy(next, next + 4, cur);
    if (diff < tol || slices >= (1u << 20)) break;
  }
  // Reflection phases are referenced to x = 0; shift them when the
  // interaction window does not start there. Transmission is unaffected.
  const cplx e2lo = std::polar(1.0, 2.0 * k * lo);
  out[0] = cur[0];
  out[1] = cur[1] * std::conj(e2lo);
  out[2] = cur[2] * e2lo;
  out[3] = cur[3];
}

namespace {

void smatrix_b(const ModelSpec& model, double lambda, cplx* out) {
  const auto& p = model.two_channel;
  if (lambda <= model.all_open_threshold())
    throw std::domain_error("smatrix_b: closed channel at lambda (not supported)");
  const double L = p.coupling_length;
  const double k1 = model.k_of_lambda(0, lambda);
  const double k2 = model.k_of_lambda(1, lambda);
  const double v1 = k1 / p.m1, v2 = k2 / p.m2;

  // u'' = K u inside the window, K real with positive discriminant.
  Eigen::Matrix2d K;
  K << 2.0 * p.m1 * (p.e1 - lambda), 2.0 * p.m1 * p.coupling,
      2.0 * p.m2 * p.coupling, 2.0 * p.m2 * (p.e2 - lambda);

  Eigen::Matrix2d W = Eigen::Matrix2d::Identity();
  Eigen::Vector2d mu(K(0, 0), K(1, 1));
  if (p.coupling != 0.0) {
    const double tr = K.trace(), det = K.determinant();
    const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
    mu(0) = 0.5 * tr - disc;
    mu(1) = 0.5 * tr + disc;
    for (int i = 0; i < 2; ++i) {
      // eigenvector of K for eigenvalue mu_i
      Eigen::Vector2d w;
      if (std::abs(K(0, 1)) > std::abs(K(1, 0)))
        w << K(0, 1), mu(i) - K(0, 0);
      else
        w << mu(i) - K(1, 1), K(1, 0);
      W.col(i) = w.normalized();
    }
  }
  if (mu.maxCoeff() * L * L > 1.4e6)
    throw std::domain_error("smatrix_b: transfer matrix overflow (strongly closed mode)");

  // 4x4 transfer in (u1, u2, u1', u2'): T = blkdiag(W,W) * [[C,S],[mu S,C]] * inv.
  Eigen::Matrix2d C = Eigen::Matrix2d::Zero(), S = Eigen::Matrix2d::Zero(),
                  MS = Eigen::Matrix2d::Zero();
  for (int i = 0; i < 2; ++i) {
    C(i, i) = cos_sqrt(-mu(i), L);   // q2 = -mu
    S(i, i) = sinc_sqrt(-mu(i), L);
    MS(i, i) = mu(i) * S(i, i);
  }
  const Eigen::Matrix2d Winv = W.inverse();
  Eigen::Matrix4d T;
  T.block<2, 2>(0, 0) = W * C * Winv;
  T.block<2, 2>(0, 2) = W * S * Winv;
  T.block<2, 2>(2, 0) = W * MS * Winv;
  T.block<2, 2>(2, 2) = W * C * Winv;

  // Match plane waves: unknowns y = (b1+, b2+, b1-, b2-).
  const cplx I(0.0, 1.0);
  Eigen::Matrix2cd Kd = Eigen::Matrix2cd::Zero(), E = Eigen::Matrix2cd::Zero();
  Kd(0, 0) = k1;
  Kd(1, 1) = k2;
  E(0, 0) = std::polar(1.0, k1 * L);
  E(1, 1) = std::polar(1.0, k2 * L);
  const Eigen::Matrix2cd T11 = T.block<2, 2>(0, 0).cast<cplx>();
  const Eigen::Matrix2cd T12 = T.block<2, 2>(0, 2).cast<cplx>();
  const Eigen::Matrix2cd T21 = T.block<2, 2>(2, 0).cast<cplx>();
  const Eigen::Matrix2cd T22 = T.block<2, 2>(2, 2).cast<cplx>();

  Eigen::Matrix4cd A = Eigen::Matrix4cd::Zero();
  Eigen::Matrix4cd R = Eigen::Matrix4cd::Zero();
  // E b+ - (T11 - i T12 K) b- = (T11 + i T12 K) a+ - conj(E) a-
  A.block<2, 2>(0, 0) = E;
  A.block<2, 2>(0, 2) = -(T11 - I * T12 * Kd);
  R.block<2, 2>(0, 0) = T11 + I * T12 * Kd;
  R.block<2, 2>(0, 2) = -E.conjugate();
  // i K E b+ - (T21 - i T22 K) b- = (T21 + i T22 K) a+ + i K conj(E) a-
  A.block<2, 2>(2, 0) = I * Kd * E;
  A.block<2, 2>(2, 2) = -(T21 - I * T22 * Kd);
  R.block<2, 2>(2, 0) = T21 + I * T22 * Kd;
  R.block<2, 2>(2, 2) = I * Kd * E.conjugate();

  const Eigen::Matrix4cd Y = A.partialPivLu().solve(R);

  // Flux normalization sqrt(v_out / v_in).
  const double v[4] = {v1, v2, v1, v2};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      out[i * 4 + j] = Y(i, j) * std::sqrt(v[i] / v[j]);
}

}  // namespace

// ---------------------------------------------------------------------------
// Friedrichs-Lee

double friedrichs_absv2(const ModelSpec& model, double lambda) {
  return sq(model.coupling_profile(lambda));
}

double friedrichs_pv(const ModelSpec& model, double lambda) {
  const double e0 = model.friedrichs.level;
  const double w = model.friedrichs.coupling_width;
  // |v|^2(x) = exp(-(x-e0)^2 / w^2); integrand of the symmetric form decays
  // once both λ±u are far from the profile.
  const double reach = std::abs(lambda - e0) + 9.0 * w;
  auto g = [&](double x) { return friedrichs_absv2(model, x); };
  auto gprime = [&](double x) {
    return -2.0 * (x - e0) / (w * w) * friedrichs_absv2(model, x);
  };
  auto integrand = [&](double u) {
    if (u < 1e-12) return -2.0 * gprime(lambda);
    return (g(lambda - u) - g(lambda + u)) / u;
  };
  return adaptive_simpson(integrand, 0.0, reach, 1e-12);
}

namespace {

// X = lambda - e0 - g^2 PV, Y = pi g^2 |v|^2
void friedrichs_xy(const ModelSpec& model, double lambda, double* X, double* Y) {
  const double g2 = sq(model.friedrichs.coupling);
  *X = lambda - model.friedrichs.level - g2 * friedrichs_pv(model, lambda);
  *Y = M_PI * g2 * friedrichs_absv2(model, lambda);
}

}  // namespace

cplx friedrichs_s(const ModelSpec& model, double lambda) {
  if (model.friedrichs.coupling == 0.0) return {1.0, 0.0};
  double X, Y;
  friedrichs_xy(model, lambda, &X, &Y);
  return cplx(X, -Y) / cplx(X, Y);
}

double friedrichs_phase_derivative(const ModelSpec& model, double lambda) {
  if (model.friedrichs.coupling == 0.0) return 0.0;
  const double e0 = model.friedrichs.level;
  const double w = model.friedrichs.coupling_width;
  const double g2 = sq(model.friedrichs.coupling);
  double X, Y;
  friedrichs_xy(model, lambda, &X, &Y);
  // PV' by the same symmetric quadrature applied to (|v|^2)'
  const double reach = std::abs(lambda - e0) + 9.0 * w;
  auto gp = [&](double x) {
    return -2.0 * (x - e0) / (w * w) * friedrichs_absv2(model, x);
  };
  auto gpp = [&](double x) {
    return (4.0 * sq(x - e0) / sq(w * w) - 2.0 / (w * w)) * friedrichs_absv2(model, x);
  };
  auto integrand = [&](double u) {
    if (u < 1e-12) return -2.0 * gpp(lambda);
    return (gp(lambda - u) - gp(lambda + u)) / u;
  };
  const double pv_prime = adaptive_simpson(integrand, 0.0, reach, 1e-12);
  const double Xp = 1.0 - g2 * pv_prime;
  const double Yp = M_PI * g2 * gp(lambda);
  // theta = -2 atan2(Y, X)
  return -2.0 * (X * Yp - Y * Xp) / (X * X + Y * Y);
}

ResonanceFit friedrichs_pole_fit(const ModelSpec& model) {
  if (model.friedrichs.coupling == 0.0)
    throw std::domain_error("friedrichs_pole_fit: no resonance at zero coupling");
  const double w = model.friedrichs.coupling_width;
  double lo = model.friedrichs.level - 3.0 * w;
  double hi = model.friedrichs.level + 3.0 * w;
  auto Xof = [&](double lam) {
    double X, Y;
    friedrichs_xy(model, lam, &X, &Y);
    return X;
  };
  double flo = Xof(lo), fhi = Xof(hi);
  if (flo * fhi >= 0.0)
    throw std::domain_error("friedrichs_pole_fit: resonance not bracketed");
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = Xof(mid);
    if (flo * fm <= 0.0) {
      hi = mid;
      fhi = fm;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  ResonanceFit fit;
  fit.lambda_res = 0.5 * (lo + hi);
  const double h = 1e-5;
  const double Xp = (Xof(fit.lambda_res + h) - Xof(fit.lambda_res - h)) / (2.0 * h);
  double X, Y;
  friedrichs_xy(model, fit.lambda_res, &X, &Y);
  fit.gamma_half = Y / Xp;
  return fit;
}

// ---------------------------------------------------------------------------

FiberSMatrix identity_smatrix(const std::vector<double>& lambda_grid, std::size_t dim) {
  FiberSMatrix s;
  s.lambda = lambda_grid;
  s.dim = dim;
  s.entries.assign(lambda_grid.size() * dim * dim, cplx{0.0, 0.0});
  for (std::size_t m = 0; m < lambda_grid.size(); ++m)
    for (std::size_t i = 0; i < dim; ++i) s.entries[m * dim * dim + i * dim + i] = 1.0;
  s.eval = [dim](double, cplx* out) {
    std::fill(out, out + dim * dim, cplx{0.0, 0.0});
    for (std::size_t i = 0; i < dim; ++i) out[i * dim + i] = 1.0;
  };
  return s;
}

FiberSMatrix stationary_smatrix(const ModelSpec& model,
                                const std::vector<double>& lambda_grid) {
  FiberSMatrix s;
  s.lambda = lambda_grid;
  s.dim = model.fiber_dim();

  std::function<void(double, cplx*)> fiber;
  switch (model.kind) {
    case ModelKind::schrodinger:
      if (model.schrodinger.potential == PotentialKind::square ||
          model.schrodinger.potential == PotentialKind::none)
        fiber = [model](double lam, cplx* out) { smatrix_a_closed(model, lam, out); };
      else
        fiber = [model](double lam, cplx* out) { smatrix_a_transfer(model, lam, out); };
      break;
    case ModelKind::two_channel:
      fiber = [model](double lam, cplx* out) { smatrix_b(model, lam, out); };
      break;
    case ModelKind::friedrichs:
      fiber = [model](double lam, cplx* out) { out[0] = friedrichs_s(model, lam); };
      break;
  }

  const std::size_t d2 = s.dim * s.dim;
  s.entries.resize(lambda_grid.size() * d2);
  for (std::size_t m = 0; m < lambda_grid.size(); ++m)
    fiber(lambda_grid[m], s.entries.data() + m * d2);
  s.eval = std::move(fiber);
  return s;
}

}  // namespace tdlab
