#include "tdlab/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <stdexcept>

#include "tdlab/kernels.hpp"

namespace tdlab {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
constexpr double kTwoPi = 6.283185307179586476925286766559;
}  // namespace

Fft::Fft(std::size_t n) : n_(n) {
  if (n == 0) throw std::invalid_argument("Fft: size must be positive");
  std::lock_guard<std::mutex> lock(planner_mutex());
  // FFTW_UNALIGNED lets the plans run on any caller buffer.
  fftw_complex* dummy = fftw_alloc_complex(n);
  plan_fwd_ = fftw_plan_dft_1d(static_cast<int>(n), dummy, dummy, FFTW_FORWARD,
                               FFTW_ESTIMATE | FFTW_UNALIGNED);
  plan_bwd_ = fftw_plan_dft_1d(static_cast<int>(n), dummy, dummy, FFTW_BACKWARD,
                               FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(dummy);
  if (!plan_fwd_ || !plan_bwd_) throw std::runtime_error("Fft: planning failed");
}

Fft::~Fft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

void Fft::forward(cplx* data) const {
  auto* d = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(plan_fwd_), d, d);
}

void Fft::backward(cplx* data) const {
  auto* d = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(plan_bwd_), d, d);
}

double PositionGrid::dk() const { return kTwoPi / extent; }

double PositionGrid::k_at(std::size_t j) const {
  const auto half = n / 2;
  const double jj = (j < half) ? static_cast<double>(j)
                               : static_cast<double>(j) - static_cast<double>(n);
  return jj * dk();
}

double PositionGrid::k_max() const { return static_cast<double>(n / 2) * dk(); }

PositionGrid PositionGrid::centered(std::size_t n, double extent) {
  PositionGrid g;
  g.n = n;
  g.extent = extent;
  g.x0 = -0.5 * extent;
  return g;
}

GridTransform::GridTransform(const PositionGrid& grid)
    : grid_(grid), fft_(std::make_shared<Fft>(grid.n)) {
  const double fwd_scale = grid_.dx() / std::sqrt(kTwoPi);
  const double bwd_scale = grid_.dk() / std::sqrt(kTwoPi);
  phase_fwd_.resize(grid_.n);
  phase_bwd_.resize(grid_.n);
  for (std::size_t j = 0; j < grid_.n; ++j) {
    const double ph = grid_.k_at(j) * grid_.x0;
    phase_fwd_[j] = fwd_scale * cplx(std::cos(ph), -std::sin(ph));
    phase_bwd_[j] = bwd_scale * cplx(std::cos(ph), std::sin(ph));
  }
}

void GridTransform::to_momentum(const cplx* pos, cplx* mom) const {
  if (mom != pos) std::copy(pos, pos + grid_.n, mom);
  fft_->forward(mom);
  kernels::cmul(mom, phase_fwd_.data(), grid_.n);
}

void GridTransform::to_position(const cplx* mom, cplx* pos) const {
  kernels::cmul_to(pos, mom, phase_bwd_.data(), grid_.n);
  fft_->backward(pos);
}

void GridTransform::to_momentum(std::vector<cplx>& inout) const {
  to_momentum(inout.data(), inout.data());
}

void GridTransform::to_position(std::vector<cplx>& inout) const {
  to_position(inout.data(), inout.data());
}

}  // namespace tdlab
