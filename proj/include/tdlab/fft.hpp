#pragma once

// FFTW-backed complex transforms plus the unitary position <-> momentum map
// on a uniform grid. Plans use FFTW_ESTIMATE so planning is deterministic.

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

namespace tdlab {

using cplx = std::complex<double>;

class Fft {
 public:
  explicit Fft(std::size_t n);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  // In-place, unnormalized: forward applies sum_j e^{-2 pi i jk/N},
  // backward applies the conjugate kernel.
  void forward(cplx* data) const;
  void backward(cplx* data) const;
  std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  void* plan_fwd_;
  void* plan_bwd_;
};

// Uniform grid x_i = x0 + i dx, i = 0..n-1, dx = extent/n. The conjugate
// momentum grid carries FFT ordering: k_j = 2 pi j / extent for j < n/2 and
// 2 pi (j - n) / extent otherwise.
struct PositionGrid {
  std::size_t n = 0;
  double extent = 0.0;
  double x0 = 0.0;

  double dx() const { return extent / static_cast<double>(n); }
  double dk() const;
  double x_at(std::size_t i) const { return x0 + static_cast<double>(i) * dx(); }
  double k_at(std::size_t j) const;
  double k_max() const;

  static PositionGrid centered(std::size_t n, double extent);
};

// Unitary transform pair on a PositionGrid:
//   psi_hat(k_j) = dx/sqrt(2 pi) sum_i e^{-i k_j x_i} psi(x_i)
//   psi(x_i)     = dk/sqrt(2 pi) sum_j e^{+i k_j x_i} psi_hat(k_j)
// so that sum |psi|^2 dx = sum |psi_hat|^2 dk exactly.
class GridTransform {
 public:
  explicit GridTransform(const PositionGrid& grid);

  void to_momentum(const cplx* pos, cplx* mom) const;
  void to_position(const cplx* mom, cplx* pos) const;
  void to_momentum(std::vector<cplx>& inout) const;
  void to_position(std::vector<cplx>& inout) const;

  const PositionGrid& grid() const { return grid_; }

 private:
  PositionGrid grid_;
  std::shared_ptr<Fft> fft_;
  std::vector<cplx> phase_fwd_;  // e^{-i k_j x0} * dx/sqrt(2 pi)
  std::vector<cplx> phase_bwd_;  // e^{+i k_j x0} (backward scale folded in)
};

}  // namespace tdlab
