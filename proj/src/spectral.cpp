#include "tdlab/spectral.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tdlab/kernels.hpp"

namespace tdlab {

namespace {

bool grids_match(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > 1e-12 * std::max(1.0, std::abs(a[i]))) return false;
  return true;
}

void matvec(const cplx* m, const cplx* v, cplx* out, std::size_t dim) {
  for (std::size_t i = 0; i < dim; ++i) {
    cplx acc{0.0, 0.0};
    for (std::size_t j = 0; j < dim; ++j) acc += m[i * dim + j] * v[j];
    out[i] = acc;
  }
}

}  // namespace

SpectralPacket apply_S(const FiberSMatrix& s, const SpectralPacket& phi) {
  if (s.dim != phi.fiber_dim)
    throw std::invalid_argument("apply_S: fiber dimension mismatch");

  SpectralPacket out = phi;
  const std::size_t dim = s.dim;
  std::vector<cplx> fiber(dim * dim);
  const bool on_grid = grids_match(s.lambda, phi.lambda);
  if (!on_grid && !s.eval)
    throw std::invalid_argument("apply_S: incompatible grids and no S evaluator");

  for (std::size_t m = 0; m < phi.lambda.size(); ++m) {
    const cplx* sm;
    if (on_grid) {
      sm = s.at(m);
    } else {
      s.eval(phi.lambda[m], fiber.data());
      sm = fiber.data();
    }
    matvec(sm, phi.at(m), out.at(m), dim);
  }

  if (s.eval && phi.eval) {
    auto s_eval = s.eval;
    auto p_eval = phi.eval;
    out.eval = [s_eval, p_eval, dim](double lam, cplx* o) {
      std::vector<cplx> f(dim * dim), a(dim);
      s_eval(lam, f.data());
      p_eval(lam, a.data());
      matvec(f.data(), a.data(), o, dim);
    };
  } else {
    out.eval = nullptr;
  }
  return out;
}

void ew_fiber(const FiberSMatrix& s, double lambda, double step, cplx* out) {
  if (!s.eval)
    throw std::invalid_argument("ew_fiber: S-matrix carries no evaluator");
  if (!(step > 0.0)) throw std::invalid_argument("ew_fiber: step must be positive");
  if (s.lambda.size() >= 2 && step > (s.lambda.back() - s.lambda.front()))
    throw std::invalid_argument("ew_fiber: step too large for the stored grid");

  const std::size_t dim = s.dim, d2 = dim * dim;
  std::vector<cplx> sp(d2), sm(d2), dh(d2), dh2(d2), s0(d2);

  auto centered = [&](double h, cplx* d) {
    s.eval(lambda + h, sp.data());
    s.eval(lambda - h, sm.data());
    for (std::size_t i = 0; i < d2; ++i) d[i] = (sp[i] - sm[i]) / (2.0 * h);
  };
  centered(step, dh.data());
  centered(0.5 * step, dh2.data());
  s.eval(lambda, s0.data());

  // Richardson: D = (4 D_{h/2} - D_h)/3, then EW = -i S* D
  for (std::size_t i = 0; i < d2; ++i) dh[i] = (4.0 * dh2[i] - dh[i]) / 3.0;
  const cplx mi(0.0, -1.0);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) {
      cplx acc{0.0, 0.0};
      for (std::size_t l = 0; l < dim; ++l)
        acc += std::conj(s0[l * dim + i]) * dh[l * dim + j];
      out[i * dim + j] = mi * acc;
    }
}

double ew_expectation(const FiberSMatrix& s, const SpectralPacket& phi, double step) {
  if (s.dim != phi.fiber_dim)
    throw std::invalid_argument("ew_expectation: fiber dimension mismatch");
  const std::size_t dim = s.dim;
  std::vector<cplx> ew(dim * dim), tmp(dim);
  cplx acc{0.0, 0.0};
  for (std::size_t m = 0; m < phi.lambda.size(); ++m) {
    ew_fiber(s, phi.lambda[m], step, ew.data());
    matvec(ew.data(), phi.at(m), tmp.data(), dim);
    cplx e{0.0, 0.0};
    for (std::size_t c = 0; c < dim; ++c) e += std::conj(phi.at(m)[c]) * tmp[c];
    acc += phi.weight[m] * e;
  }
  if (std::abs(acc.imag()) > 1e-9)
    throw std::runtime_error("ew_expectation: imaginary residual " +
                             std::to_string(acc.imag()) + " exceeds 1e-9");
  return acc.real();
}

double tf_expectation_spectral(const SpectralPacket& phi) {
  const std::size_t n = phi.lambda.size();
  if (n < 8)
    throw std::invalid_argument("tf_expectation_spectral: grid too coarse");

  auto estimate = [&](std::size_t stride) {
    cplx acc{0.0, 0.0};
    for (std::size_t m = stride; m + stride < n; ++m) {
      const double hl = phi.lambda[m] - phi.lambda[m - stride];
      const double hr = phi.lambda[m + stride] - phi.lambda[m];
      const double denom = hl * hr * (hl + hr);
      for (std::size_t c = 0; c < phi.fiber_dim; ++c) {
        const cplx dp = (hl * hl * phi.at(m + stride)[c] -
                         hr * hr * phi.at(m - stride)[c] +
                         (hr * hr - hl * hl) * phi.at(m)[c]) /
                        denom;
        acc += phi.weight[m] * std::conj(phi.at(m)[c]) * cplx(0.0, 1.0) * dp;
      }
    }
    return acc.real();
  };

  const double v1 = estimate(1);
  const double v2 = estimate(2);
  if (std::abs(v1 - v2) > std::max(1e-6, 0.05 * std::abs(v1)))
    throw std::runtime_error(
        "tf_expectation_spectral: derivative estimate unstable (grid too coarse): " +
        std::to_string(v1) + " vs " + std::to_string(v2));
  return v1;
}

double tf_expectation_phase_space(const SpectralPacket& phi, const ModelSpec& model,
                                  const LocalisationProfile& profile) {
  if (profile.dimension != 1)
    throw std::invalid_argument("tf_expectation_phase_space: d = 1 profiles only");
  const auto& g = model.grid;
  GridTransform tr(g);

  auto grad_rf = [&](double v) { return eval_grad_Rf(profile, {v})[0]; };

  cplx total{0.0, 0.0};

  if (model.kind == ModelKind::friedrichs) {
    // Phi = P: Phi-representation is momentum space; H0' = -1 everywhere,
    // so both operator-ordered terms reduce to R_f'(-1) <phi, Phi phi>.
    const auto arrays = packet_to_channel_arrays(model, phi);
    std::vector<cplx> mom(g.n);
    tr.to_momentum(arrays[0].data(), mom.data());
    double p_expect = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) p_expect += g.k_at(j) * std::norm(mom[j]);
    p_expect *= g.dk();
    return -grad_rf(-1.0) * p_expect;  // H0'' = 0: no third term
  }

  // A/B: Phi = Q (position), H0' diagonal in momentum per channel.
  const auto arrays = packet_to_channel_arrays(model, phi);
  const std::size_t nch = arrays.size();
  std::vector<cplx> u(g.n), upos(g.n), ppos(g.n), back(g.n);
  cplx termA{0.0, 0.0}, termB{0.0, 0.0}, termC{0.0, 0.0};

  for (std::size_t ch = 0; ch < nch; ++ch) {
    const auto& mom = arrays[ch];
    const double hess = model.fiber_hessian(ch);  // channel H0'' entry
    // velocity of the signed-momentum state at FFT index j
    auto vel = [&](std::size_t j) {
      const double k = g.k_at(j);
      if (model.kind == ModelKind::schrodinger) return 2.0 * k;
      return k / (ch == 0 ? model.two_channel.m1 : model.two_channel.m2);
    };

    // phi in position space
    tr.to_position(mom.data(), ppos.data());

    // term A: R_f'(v) in momentum, then multiply by x, inner product in position
    for (std::size_t j = 0; j < g.n; ++j) {
      const double v = vel(j);
      u[j] = (mom[j] == cplx{0.0, 0.0}) ? cplx{0.0, 0.0} : grad_rf(v) * mom[j];
    }
    tr.to_position(u.data(), upos.data());
    cplx a{0.0, 0.0};
    for (std::size_t i = 0; i < g.n; ++i)
      a += std::conj(ppos[i]) * (g.x_at(i) * upos[i]);
    termA += a * g.dx();

    // term B: |v|^{-1} in momentum, x in position, R_f'(sgn v) back in momentum
    for (std::size_t j = 0; j < g.n; ++j) {
      const double v = vel(j);
      u[j] = (mom[j] == cplx{0.0, 0.0}) ? cplx{0.0, 0.0} : mom[j] / std::abs(v);
    }
    tr.to_position(u.data(), upos.data());
    for (std::size_t i = 0; i < g.n; ++i) upos[i] *= g.x_at(i);
    tr.to_momentum(upos.data(), back.data());
    cplx b{0.0, 0.0};
    for (std::size_t j = 0; j < g.n; ++j) {
      if (mom[j] == cplx{0.0, 0.0}) continue;
      b += std::conj(mom[j]) * (grad_rf(vel(j) > 0 ? 1.0 : -1.0) * back[j]);
    }
    termB += b * g.dk();

    // term C: i R_f'(sgn v) (H0'' v) |v|^{-3}, diagonal in momentum
    cplx c{0.0, 0.0};
    for (std::size_t j = 0; j < g.n; ++j) {
      if (mom[j] == cplx{0.0, 0.0}) continue;
      const double v = vel(j);
      const double av = std::abs(v);
      c += std::norm(mom[j]) * grad_rf(v > 0 ? 1.0 : -1.0) * hess * v / (av * av * av);
    }
    termC += cplx(0.0, 1.0) * c * g.dk();
  }

  total = -0.5 * (termA + termB + termC);
  if (std::abs(total.imag()) > 1e-6)
    throw std::runtime_error("tf_expectation_phase_space: imaginary residual " +
                             std::to_string(total.imag()));
  return total.real();
}

double ff_commutator_residual(const FiberSMatrix& s, const SpectralPacket& phi,
                              const LocalisationProfile& profile,
                              const ModelSpec& model) {
  if (s.dim != phi.fiber_dim)
    throw std::invalid_argument("ff_commutator_residual: fiber dimension mismatch");
  const std::size_t dim = s.dim;
  const double ff1 = Ff_at_unit(profile);
  const bool on_grid = grids_match(s.lambda, phi.lambda);
  if (!on_grid && !s.eval)
    throw std::invalid_argument("ff_commutator_residual: incompatible grids");

  std::vector<cplx> fiber(dim * dim), fphi(dim), sphi(dim), r(dim);
  double acc = 0.0;
  for (std::size_t m = 0; m < phi.lambda.size(); ++m) {
    const double lam = phi.lambda[m];
    const cplx* sm;
    if (on_grid) {
      sm = s.at(m);
    } else {
      s.eval(lam, fiber.data());
      sm = fiber.data();
    }
    for (std::size_t c = 0; c < dim; ++c) {
      const double v = model.fiber_velocity(c, lam);
      if (!(std::abs(v) > 0.0))
        throw std::runtime_error("ff_commutator_residual: vanishing fiber velocity");
      fphi[c] = (ff1 / std::abs(v)) * phi.at(m)[c];
    }
    matvec(sm, phi.at(m), sphi.data(), dim);
    matvec(sm, fphi.data(), r.data(), dim);  // S F phi
    double cell = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      const double v = model.fiber_velocity(c, lam);
      const cplx diff = (ff1 / std::abs(v)) * sphi[c] - r[c];
      cell += std::norm(diff);
    }
    acc += phi.weight[m] * cell;
  }
  return std::sqrt(acc);
}

double ff_expectation(const SpectralPacket& phi, const LocalisationProfile& profile,
                      const ModelSpec& model) {
  const double ff1 = Ff_at_unit(profile);
  double acc = 0.0;
  for (std::size_t m = 0; m < phi.lambda.size(); ++m) {
    const double lam = phi.lambda[m];
    double cell = 0.0;
    for (std::size_t c = 0; c < phi.fiber_dim; ++c) {
      const double a2 = std::norm(phi.at(m)[c]);
      if (a2 == 0.0) continue;
      cell += a2 * ff1 / std::abs(model.fiber_velocity(c, lam));
    }
    acc += phi.weight[m] * cell;
  }
  return acc;
}

}  // namespace tdlab
