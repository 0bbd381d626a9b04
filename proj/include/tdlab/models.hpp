#pragma once

// The three scattering systems.
//
//   A  1D Schrodinger:  H0 = P^2 on L^2(R), Phi = Q, compactly supported
//      potential (square barrier or truncated Gaussian on [0, L]).
//   B  two-channel Schrodinger: H0 = diag(P^2/2m_j + e_j), Phi = Q (x) 1,
//      constant off-diagonal coupling g on [0, L].
//   C  Friedrichs-Lee: H0 = multiplication by x on L^2(R), Phi = P,
//      H = H0 (+) level e0 with rank-one coupling through a Gaussian
//      profile v; J = inclusion, L(t) = J*.
//
// Fiber conventions (documented once, used everywhere):
//   A: dim 2, components (+k, -k) at lambda = k^2.
//   B: dim 4, components (ch1 +, ch2 +, ch1 -, ch2 -); S = [[t, r'], [r, t']]
//      in 2x2 blocks maps flux-normalized incoming to outgoing amplitudes.
//   C: dim 1, lambda = x.

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "tdlab/fft.hpp"
#include "tdlab/localisation.hpp"

namespace tdlab {

enum class ModelKind { schrodinger, two_channel, friedrichs };

enum class PotentialKind { none, square, gaussian };

struct SchrodingerParams {
  PotentialKind potential = PotentialKind::none;
  double v0 = 0.0;             // barrier height / gaussian peak
  double barrier_length = 0.0; // square barrier on [0, L]
  double gauss_center = 0.0;
  double gauss_width = 0.0;
  double gauss_support = 0.0;  // V truncated to |x - center| <= support
};

struct TwoChannelParams {
  double m1 = 1.0, m2 = 2.0;
  double e1 = 0.0, e2 = 1.0;
  double coupling = 0.0;        // g
  double coupling_length = 1.0; // on [0, L]
};

struct FriedrichsParams {
  double level = 0.0;          // e0
  double coupling = 0.0;       // g
  double coupling_width = 0.35;  // v(x) = exp(-(x - e0)^2 / (2 w^2))
};

struct ModelSpec {
  ModelKind kind = ModelKind::schrodinger;
  PositionGrid grid;
  SchrodingerParams schrodinger;
  TwoChannelParams two_channel;
  FriedrichsParams friedrichs;

  std::size_t channel_count() const;
  std::size_t fiber_dim() const;
  std::vector<double> kappa() const;

  // Signed fiber velocity H0' of component c at energy lambda.
  // Throws std::domain_error if the component is closed at lambda.
  double fiber_velocity(std::size_t c, double lambda) const;
  double fiber_hessian(std::size_t c) const;  // H0'' diagonal entry

  // Energy below which not every fiber component is open.
  double all_open_threshold() const;

  int channel_of_fiber(std::size_t c) const;
  int sign_of_fiber(std::size_t c) const;  // +1 / -1 movers; 0 for model C

  // Dispersion lambda(k) of a grid channel and the positive inverse root.
  double lambda_of_k(int channel, double k) const;
  double k_of_lambda(int channel, double lambda) const;

  // Model A/B potential profile at x (matrix entries where it applies).
  double potential_at(double x) const;          // A only
  double coupling_profile(double x) const;      // C: v(x)

  // Interaction support [lo, hi] in position (A/B); C has none.
  std::pair<double, double> interaction_support() const;
};

ModelSpec make_schrodinger(const PositionGrid& grid, const SchrodingerParams& p);
ModelSpec make_two_channel(const PositionGrid& grid, const TwoChannelParams& p);
ModelSpec make_friedrichs(const PositionGrid& grid, const FriedrichsParams& p);

// ---------------------------------------------------------------------------
// States

struct GridState {
  std::vector<std::vector<cplx>> channels;  // per channel, grid.n values
  cplx discrete{0.0, 0.0};                  // model C level amplitude
  double time = 0.0;
};

double state_norm2(const ModelSpec& model, const GridState& s);

struct SpectralPacket {
  std::vector<double> lambda;  // strictly increasing quadrature nodes
  std::vector<double> weight;  // d(lambda) weights
  std::size_t fiber_dim = 1;
  std::vector<cplx> amp;       // node-major: amp[m * fiber_dim + c]
  double support_lo = 0.0, support_hi = 0.0;
  double kappa_margin = 0.0;
  // Exact amplitude evaluator at arbitrary lambda (empty for packets that
  // were extracted from grid data).
  std::function<void(double, cplx*)> eval;

  double norm2() const;
  const cplx* at(std::size_t m) const { return amp.data() + m * fiber_dim; }
  cplx* at(std::size_t m) { return amp.data() + m * fiber_dim; }
};

// Gaussian-times-smooth-cutoff envelope on [center - 4 width, center + 4 width]
// distributed over fiber components by `weights`, with an optional spectral
// chirp e^{i chirp lambda}. Normalized; validates the kappa margin.
SpectralPacket make_packet(const ModelSpec& model, double center_energy, double width,
                           const std::vector<cplx>& fiber_weights, double chirp = 0.0);

struct FiberSMatrix {
  std::vector<double> lambda;
  std::size_t dim = 1;
  std::vector<cplx> entries;  // node-major, row-major dim x dim per node
  std::function<void(double, cplx*)> eval;  // S at arbitrary lambda

  const cplx* at(std::size_t m) const { return entries.data() + m * dim * dim; }
  double unitarity_defect() const;  // max_m ||S*S - 1||_F
};

// ---------------------------------------------------------------------------
// Operations

// Grid points of lambda_grid where an open fiber speed drops below 1e-6 or a
// fiber speed-squared changes sign inside a cell; equals kappa(H0) up to grid
// resolution.
std::vector<double> critical_values(const ModelSpec& model,
                                    const std::vector<double>& lambda_grid);

// Momentum-grid arrays (FFT ordering) per channel from the packet evaluator.
// For model C returns the position-space samples instead (lambda = x there).
std::vector<std::vector<cplx>> packet_to_channel_arrays(const ModelSpec& model,
                                                        const SpectralPacket& packet);

GridState packet_to_grid(const ModelSpec& model, const SpectralPacket& packet);

// Exact free evolution by fiber phases e^{-i lambda t}.
GridState free_evolve(const ModelSpec& model, const SpectralPacket& packet, double t);

// <s, f(Phi / r) s>: position weighting for A/B, momentum weighting for C.
double localisation_expectation(const ModelSpec& model, const GridState& s,
                                const LocalisationProfile& profile, double r);

// Stationary S-matrices on a lambda grid (plus arbitrary-lambda evaluator).
FiberSMatrix stationary_smatrix(const ModelSpec& model,
                                const std::vector<double>& lambda_grid);
FiberSMatrix identity_smatrix(const std::vector<double>& lambda_grid, std::size_t dim);

// Model A cross-validation paths: closed form vs adaptively refined
// transfer-matrix product. Both fill a 2x2 fiber.
void smatrix_a_closed(const ModelSpec& model, double lambda, cplx* out);
void smatrix_a_transfer(const ModelSpec& model, double lambda, cplx* out,
                        double tol = 1e-10);

// ---------------------------------------------------------------------------
// Full dynamics

// Strang split-step propagator for models A/B (position-first splitting, so
// states at sample times live in position space). dt fixed at construction.
class SplitStepPropagator {
 public:
  SplitStepPropagator(const ModelSpec& model, double dt);
  void step(GridState& s) const;       // t -> t + dt
  void step_back(GridState& s) const;  // t -> t - dt
  double dt() const { return dt_; }

 private:
  void apply_half_potential(GridState& s, bool forward) const;
  void apply_kinetic(GridState& s, bool forward) const;

  const ModelSpec model_;
  double dt_;
  GridTransform transform_;
  std::vector<std::vector<cplx>> kin_fwd_, kin_bwd_;  // per channel phase tables
  // model A potential phase table over the interaction range
  std::size_t pot_lo_ = 0;
  std::vector<cplx> pot_fwd_, pot_bwd_;
  // model B mixing angle per half step
  double mix_c_ = 1.0, mix_s_ = 0.0;
  std::size_t mix_lo_ = 0, mix_len_ = 0;
};

// Dense-eigendecomposition propagator for model C (diagonal plus rank one).
// Exact at any time; supports batched sampling.
class FriedrichsPropagator {
 public:
  explicit FriedrichsPropagator(const ModelSpec& model);

  // State at absolute time t relative to the anchor state.
  void set_anchor(const GridState& s);
  GridState at_time(double t) const;

  // Visit states at t = t0 + i dt, i = 0..count-1, ascending.
  void sample(double t0, double dt, std::size_t count,
              const std::function<void(std::size_t, const GridState&)>& visit) const;

  const std::vector<double>& eigenvalues() const { return evals_; }

 private:
  const ModelSpec model_;
  std::size_t n_;
  std::vector<double> evals_;
  std::vector<double> evecs_;   // column-major (n+1) x (n+1)
  std::vector<cplx> coeff_;     // eigenbasis coefficients of the anchor
  double anchor_time_ = 0.0;
};

// Cached propagation context: one split-step table set (A/B) or one
// eigendecomposition (C) reused across calls.
class Evolver {
 public:
  Evolver(const ModelSpec& model, double dt);
  GridState evolve(const GridState& s, double duration);
  const ModelSpec& model() const { return model_; }
  double dt() const { return dt_; }
  SplitStepPropagator* split() { return split_.get(); }          // null for C
  FriedrichsPropagator* friedrichs() { return friedrichs_.get(); }  // null for A/B

 private:
  ModelSpec model_;
  double dt_;
  std::shared_ptr<SplitStepPropagator> split_;
  std::shared_ptr<FriedrichsPropagator> friedrichs_;
};

// General full evolution by `duration` (either sign) from state `s`.
GridState full_evolve(const ModelSpec& model, const GridState& s, double duration,
                      double dt);

struct PreparedState {
  GridState state;                 // numerical W_- phi at t = 0
  double doubling_residual = 0.0;  // || prep(2T) - prep(T) ||
  bool converged = false;
};

// Moller preparation: free-evolve to -t_prep, inject with J, full-evolve back
// to t = 0. Checks the doubling residual when requested.
PreparedState prepare_minus_state(Evolver& evolver, const SpectralPacket& packet,
                                  double t_prep, bool check_doubling = true,
                                  double doubling_tol = 1e-4);
PreparedState prepare_minus_state(const ModelSpec& model, const SpectralPacket& packet,
                                  double t_prep, double dt, bool check_doubling = true,
                                  double doubling_tol = 1e-4);

// Outgoing spectral data extracted from the full dynamics: full-evolve the
// prepared state to t_post, undo the free phases, keep per-channel momentum
// arrays (position samples for model C).
struct OutgoingData {
  std::vector<std::vector<cplx>> channel_arrays;
  double residual_in_region = 0.0;  // interaction-region occupancy at t_post
  double norm2 = 0.0;
};

OutgoingData extract_S_timedomain(Evolver& evolver, const SpectralPacket& packet,
                                  double t_prep, double t_post);
OutgoingData extract_S_timedomain(const ModelSpec& model, const SpectralPacket& packet,
                                  double t_prep, double t_post, double dt);

// H0-norm distance between extracted outgoing data and a spectral packet
// (computed in the channel-array representation; no resampling).
double outgoing_distance(const ModelSpec& model, const OutgoingData& out,
                         const SpectralPacket& packet);

struct DecayRecord {
  std::vector<double> times_neg, g_minus;  // ||L e^{-itH} W_- phi - e^{-itH0} phi||
  std::vector<double> times_pos, g_plus;   // ... - e^{-itH0} S phi||
  double exponent_neg = 0.0, exponent_pos = 0.0;  // fitted |t|^-p decay
  double tail_sum_neg = 0.0, tail_sum_pos = 0.0;  // L1 proxy over sampled tail
  bool integrable = false;
};

DecayRecord asymptotic_coupling_check(Evolver& evolver, const SpectralPacket& packet,
                                      const SpectralPacket& s_packet,
                                      const GridState& prepared,
                                      const std::vector<double>& times);

// Smallest/largest open fiber speed over the packet support.
struct VelocityRange {
  double v_min = 0.0, v_max = 0.0;
};
VelocityRange velocity_range(const ModelSpec& model, const SpectralPacket& packet);

}  // namespace tdlab
