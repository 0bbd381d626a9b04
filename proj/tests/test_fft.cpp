#include <doctest.h>

#include <cmath>
#include <random>

#include "tdlab/fft.hpp"
#include "tdlab/kernels.hpp"

using namespace tdlab;

TEST_CASE("grid transform is unitary and invertible") {
  const PositionGrid g = PositionGrid::centered(512, 40.0);
  GridTransform tr(g);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<cplx> pos(g.n);
  for (auto& z : pos) z = cplx(dist(rng), dist(rng));

  std::vector<cplx> mom(g.n), back(g.n);
  tr.to_momentum(pos.data(), mom.data());
  const double n_pos = kernels::abs2_sum(pos.data(), g.n) * g.dx();
  const double n_mom = kernels::abs2_sum(mom.data(), g.n) * g.dk();
  CHECK(n_mom == doctest::Approx(n_pos).epsilon(1e-13));

  tr.to_position(mom.data(), back.data());
  for (std::size_t i = 0; i < g.n; ++i) CHECK(std::abs(back[i] - pos[i]) < 1e-12);
}

// Continuum check: the transform of a Gaussian matches its analytic Fourier
// transform once the grid resolves it.
TEST_CASE("gaussian matches the analytic Fourier transform") {
  const PositionGrid g = PositionGrid::centered(2048, 80.0);
  GridTransform tr(g);
  const double sigma = 1.3, x0 = 2.5, k0 = 1.1;
  std::vector<cplx> pos(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    const double x = g.x_at(i);
    pos[i] = std::exp(-0.25 * (x - x0) * (x - x0) / (sigma * sigma)) *
             std::polar(1.0, k0 * x);
  }
  std::vector<cplx> mom(g.n);
  tr.to_momentum(pos.data(), mom.data());
  // FT of exp(-(x-x0)^2/(4 s^2)) e^{i k0 x} is s sqrt(2) exp(-s^2 (k-k0)^2) e^{-i (k-k0) x0}
  for (std::size_t j = 0; j < g.n; ++j) {
    const double k = g.k_at(j);
    if (std::abs(k - k0) > 4.0 / sigma) continue;
    const cplx expect = sigma * std::sqrt(2.0) *
                        std::exp(-sigma * sigma * (k - k0) * (k - k0)) *
                        std::polar(1.0, -(k - k0) * x0);
    CHECK(std::abs(mom[j] - expect) < 1e-10);
  }
}
