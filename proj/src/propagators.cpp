// Full dynamics: Strang split-step for models A/B, dense eigendecomposition
// for the diagonal-plus-rank-one model C, Moller preparation and time-domain
// S extraction on top.

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "tdlab/kernels.hpp"
#include "tdlab/models.hpp"

namespace tdlab {

namespace {

// Interaction-region occupancy (probability) of a position-space state.
double region_occupancy(const ModelSpec& model, const GridState& s, double margin) {
  const auto [lo, hi] = model.interaction_support();
  const auto& g = model.grid;
  double acc = 0.0;
  for (const auto& ch : s.channels)
    for (std::size_t i = 0; i < g.n; ++i) {
      const double x = g.x_at(i);
      if (x >= lo - margin && x <= hi + margin) acc += std::norm(ch[i]);
    }
  return acc * g.dx();
}

}  // namespace

// ---------------------------------------------------------------------------
// Split-step (A/B). Position-first Strang: V_half K V_half per step, so the
// state sits in position space at every sample time.

SplitStepPropagator::SplitStepPropagator(const ModelSpec& model, double dt)
    : model_(model), dt_(dt), transform_(model.grid) {
  if (model.kind == ModelKind::friedrichs)
    throw std::logic_error("SplitStepPropagator: use FriedrichsPropagator for model C");
  if (!(dt > 0.0)) throw std::invalid_argument("SplitStepPropagator: dt must be positive");

  const auto& g = model.grid;
  const std::size_t nch = model.channel_count();
  kin_fwd_.assign(nch, std::vector<cplx>(g.n));
  kin_bwd_.assign(nch, std::vector<cplx>(g.n));
  for (std::size_t ch = 0; ch < nch; ++ch) {
    for (std::size_t j = 0; j < g.n; ++j) {
      const double lam = model.lambda_of_k(static_cast<int>(ch), g.k_at(j));
      kin_fwd_[ch][j] = std::polar(1.0, -lam * dt);
      kin_bwd_[ch][j] = std::polar(1.0, +lam * dt);
    }
  }

  const auto [lo, hi] = model.interaction_support();
  if (model.kind == ModelKind::schrodinger &&
      model.schrodinger.potential != PotentialKind::none) {
    // stability guard (kinetic part is exact)
    if (dt * std::abs(model.schrodinger.v0) >= 0.1)
      throw std::invalid_argument("SplitStepPropagator: dt * max|V| must stay below 0.1");
    // barrier edges snap to grid points
    std::size_t i_lo = static_cast<std::size_t>(std::ceil((lo - g.x0) / g.dx()));
    std::size_t i_hi = static_cast<std::size_t>(std::floor((hi - g.x0) / g.dx()));
    i_hi = std::min(i_hi, g.n - 1);
    pot_lo_ = i_lo;
    pot_fwd_.resize(i_hi >= i_lo ? i_hi - i_lo + 1 : 0);
    pot_bwd_.resize(pot_fwd_.size());
    for (std::size_t i = 0; i < pot_fwd_.size(); ++i) {
      const double v = model.potential_at(g.x_at(pot_lo_ + i));
      pot_fwd_[i] = std::polar(1.0, -0.5 * v * dt);
      pot_bwd_[i] = std::polar(1.0, +0.5 * v * dt);
    }
  } else if (model.kind == ModelKind::two_channel) {
    const double gg = model.two_channel.coupling;
    if (dt * std::abs(gg) >= 0.1)
      throw std::invalid_argument("SplitStepPropagator: dt * |g| must stay below 0.1");
    std::size_t i_lo = static_cast<std::size_t>(std::ceil((lo - g.x0) / g.dx()));
    std::size_t i_hi = static_cast<std::size_t>(std::floor((hi - g.x0) / g.dx()));
    i_hi = std::min(i_hi, g.n - 1);
    mix_lo_ = i_lo;
    mix_len_ = i_hi >= i_lo ? i_hi - i_lo + 1 : 0;
    mix_c_ = std::cos(gg * 0.5 * dt);
    mix_s_ = std::sin(gg * 0.5 * dt);
  }
}

void SplitStepPropagator::apply_half_potential(GridState& s, bool forward) const {
  if (model_.kind == ModelKind::schrodinger) {
    if (pot_fwd_.empty()) return;
    const auto& tab = forward ? pot_fwd_ : pot_bwd_;
    kernels::cmul(s.channels[0].data() + pot_lo_, tab.data(), tab.size());
  } else {
    if (mix_len_ == 0 || (mix_c_ == 1.0 && mix_s_ == 0.0)) return;
    kernels::mix2(s.channels[0].data() + mix_lo_, s.channels[1].data() + mix_lo_,
                  mix_c_, forward ? mix_s_ : -mix_s_, mix_len_);
  }
}

void SplitStepPropagator::apply_kinetic(GridState& s, bool forward) const {
  for (std::size_t ch = 0; ch < s.channels.size(); ++ch) {
    auto& a = s.channels[ch];
    transform_.to_momentum(a);
    const auto& tab = forward ? kin_fwd_[ch] : kin_bwd_[ch];
    kernels::cmul(a.data(), tab.data(), a.size());
    transform_.to_position(a);
  }
}

void SplitStepPropagator::step(GridState& s) const {
  apply_half_potential(s, true);
  apply_kinetic(s, true);
  apply_half_potential(s, true);
  s.time += dt_;
}

void SplitStepPropagator::step_back(GridState& s) const {
  apply_half_potential(s, false);
  apply_kinetic(s, false);
  apply_half_potential(s, false);
  s.time -= dt_;
}

// ---------------------------------------------------------------------------
// Friedrichs-Lee propagator

FriedrichsPropagator::FriedrichsPropagator(const ModelSpec& model)
    : model_(model), n_(model.grid.n) {
  if (model.kind != ModelKind::friedrichs)
    throw std::logic_error("FriedrichsPropagator: model C only");
  const auto& g = model.grid;
  const double sdx = std::sqrt(g.dx());
  const std::size_t dim = n_ + 1;

  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t i = 0; i < n_; ++i) {
    H(i, i) = g.x_at(i);
    const double c = model.friedrichs.coupling * model.coupling_profile(g.x_at(i)) * sdx;
    H(i, n_) = c;
    H(n_, i) = c;
  }
  H(n_, n_) = model.friedrichs.level;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(H);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("FriedrichsPropagator: eigendecomposition failed");
  evals_.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + dim);
  evecs_.assign(solver.eigenvectors().data(), solver.eigenvectors().data() + dim * dim);
  coeff_.assign(dim, cplx{0.0, 0.0});
}

void FriedrichsPropagator::set_anchor(const GridState& s) {
  const std::size_t dim = n_ + 1;
  const double sdx = std::sqrt(model_.grid.dx());
  Eigen::VectorXd pre(dim), pim(dim);
  for (std::size_t i = 0; i < n_; ++i) {
    pre(i) = s.channels[0][i].real() * sdx;
    pim(i) = s.channels[0][i].imag() * sdx;
  }
  pre(n_) = s.discrete.real();
  pim(n_) = s.discrete.imag();
  Eigen::Map<const Eigen::MatrixXd> U(evecs_.data(), dim, dim);
  const Eigen::VectorXd cre = U.transpose() * pre;
  const Eigen::VectorXd cim = U.transpose() * pim;
  coeff_.resize(dim);
  for (std::size_t m = 0; m < dim; ++m) coeff_[m] = cplx(cre(m), cim(m));
  anchor_time_ = s.time;
}

GridState FriedrichsPropagator::at_time(double t) const {
  GridState out;
  sample(t, 1.0, 1, [&](std::size_t, const GridState& s) { out = s; });
  return out;
}

void FriedrichsPropagator::sample(
    double t0, double dt, std::size_t count,
    const std::function<void(std::size_t, const GridState&)>& visit) const {
  const std::size_t dim = n_ + 1;
  const double sdx = std::sqrt(model_.grid.dx());
  Eigen::Map<const Eigen::MatrixXd> U(evecs_.data(), dim, dim);

  constexpr std::size_t kChunk = 256;
  Eigen::MatrixXd Pre(dim, kChunk), Pim(dim, kChunk);
  Eigen::MatrixXd Sre(dim, kChunk), Sim(dim, kChunk);

  GridState state;
  state.channels.assign(1, std::vector<cplx>(n_));

  for (std::size_t base = 0; base < count; base += kChunk) {
    const std::size_t b = std::min(kChunk, count - base);
    for (std::size_t m = 0; m < dim; ++m) {
      const double dt_rel = t0 + static_cast<double>(base) * dt - anchor_time_;
      cplx ph = std::polar(1.0, -evals_[m] * dt_rel) * coeff_[m];
      const cplx mult = std::polar(1.0, -evals_[m] * dt);
      for (std::size_t j = 0; j < b; ++j) {
        Pre(m, j) = ph.real();
        Pim(m, j) = ph.imag();
        ph *= mult;
      }
    }
    Sre.leftCols(b).noalias() = U * Pre.leftCols(b);
    Sim.leftCols(b).noalias() = U * Pim.leftCols(b);
    for (std::size_t j = 0; j < b; ++j) {
      for (std::size_t i = 0; i < n_; ++i)
        state.channels[0][i] = cplx(Sre(i, j), Sim(i, j)) / sdx;
      state.discrete = cplx(Sre(n_, j), Sim(n_, j));
      state.time = t0 + static_cast<double>(base + j) * dt;
      visit(base + j, state);
    }
  }
}

// ---------------------------------------------------------------------------

Evolver::Evolver(const ModelSpec& model, double dt) : model_(model), dt_(dt) {
  if (model.kind == ModelKind::friedrichs)
    friedrichs_ = std::make_shared<FriedrichsPropagator>(model);
  else
    split_ = std::make_shared<SplitStepPropagator>(model, dt);
}

GridState Evolver::evolve(const GridState& s, double duration) {
  if (friedrichs_) {
    friedrichs_->set_anchor(s);
    return friedrichs_->at_time(s.time + duration);
  }
  const auto steps = static_cast<long>(std::llround(std::abs(duration) / dt_));
  if (std::abs(static_cast<double>(steps) * dt_ - std::abs(duration)) >
      1e-9 * std::max(1.0, std::abs(duration)))
    throw std::invalid_argument("Evolver: duration must be a multiple of dt");
  GridState out = s;
  for (long i = 0; i < steps; ++i) {
    if (duration >= 0.0)
      split_->step(out);
    else
      split_->step_back(out);
  }
  return out;
}

GridState full_evolve(const ModelSpec& model, const GridState& s, double duration,
                      double dt) {
  Evolver ev(model, dt);
  return ev.evolve(s, duration);
}

PreparedState prepare_minus_state(Evolver& evolver, const SpectralPacket& packet,
                                  double t_prep, bool check_doubling,
                                  double doubling_tol) {
  if (!(t_prep > 0.0)) throw std::invalid_argument("prepare_minus_state: t_prep > 0");
  const ModelSpec& model = evolver.model();

  auto prepare = [&](double T) {
    GridState past = free_evolve(model, packet, -T);
    // inject with J (model C: continuum inclusion, discrete amplitude zero)
    past.discrete = cplx{0.0, 0.0};
    return evolver.evolve(past, T);
  };

  PreparedState result;
  result.state = prepare(t_prep);
  result.state.time = 0.0;
  if (check_doubling) {
    GridState twice = prepare(2.0 * t_prep);
    double acc = 0.0;
    const double dx = model.grid.dx();
    for (std::size_t ch = 0; ch < result.state.channels.size(); ++ch)
      acc += dx * kernels::dist2_sum(result.state.channels[ch].data(),
                                     twice.channels[ch].data(),
                                     result.state.channels[ch].size());
    acc += std::norm(result.state.discrete - twice.discrete);
    result.doubling_residual = std::sqrt(acc);
    result.converged = result.doubling_residual < doubling_tol;
    if (!result.converged)
      throw std::runtime_error(
          "prepare_minus_state: Moller doubling test failed, residual " +
          std::to_string(result.doubling_residual));
  }
  return result;
}

PreparedState prepare_minus_state(const ModelSpec& model, const SpectralPacket& packet,
                                  double t_prep, double dt, bool check_doubling,
                                  double doubling_tol) {
  Evolver ev(model, dt);
  return prepare_minus_state(ev, packet, t_prep, check_doubling, doubling_tol);
}

OutgoingData extract_S_timedomain(Evolver& evolver, const SpectralPacket& packet,
                                  double t_prep, double t_post) {
  const ModelSpec& model = evolver.model();
  PreparedState prep = prepare_minus_state(evolver, packet, t_prep, false);
  GridState late = evolver.evolve(prep.state, t_post);

  OutgoingData out;
  const auto& g = model.grid;

  if (model.kind == ModelKind::friedrichs) {
    // residual: level occupation plus overlap with the (normalized) profile
    double vnorm2 = 0.0;
    cplx overlap{0.0, 0.0};
    for (std::size_t i = 0; i < g.n; ++i) {
      const double v = model.coupling_profile(g.x_at(i));
      vnorm2 += v * v * g.dx();
      overlap += v * late.channels[0][i] * g.dx();
    }
    out.residual_in_region = std::norm(late.discrete) + std::norm(overlap) / vnorm2;
    out.channel_arrays.assign(1, late.channels[0]);
    auto& arr = out.channel_arrays[0];
    for (std::size_t i = 0; i < g.n; ++i)
      arr[i] *= std::polar(1.0, +g.x_at(i) * t_post);
    out.norm2 = g.dx() * kernels::abs2_sum(arr.data(), arr.size());
    return out;
  }

  out.residual_in_region = region_occupancy(model, late, 0.0);
  if (out.residual_in_region > 1e-6)
    throw std::runtime_error("extract_S_timedomain: state has not exited the "
                             "interaction region, residual " +
                             std::to_string(out.residual_in_region));

  GridTransform tr(g);
  out.channel_arrays.resize(model.channel_count());
  for (std::size_t ch = 0; ch < out.channel_arrays.size(); ++ch) {
    auto& arr = out.channel_arrays[ch];
    arr.resize(g.n);
    tr.to_momentum(late.channels[ch].data(), arr.data());
    for (std::size_t j = 0; j < g.n; ++j) {
      const double lam = model.lambda_of_k(static_cast<int>(ch), g.k_at(j));
      arr[j] *= std::polar(1.0, +lam * t_post);
    }
    out.norm2 += g.dk() * kernels::abs2_sum(arr.data(), arr.size());
  }
  return out;
}

OutgoingData extract_S_timedomain(const ModelSpec& model, const SpectralPacket& packet,
                                  double t_prep, double t_post, double dt) {
  Evolver ev(model, dt);
  return extract_S_timedomain(ev, packet, t_prep, t_post);
}

double outgoing_distance(const ModelSpec& model, const OutgoingData& out,
                         const SpectralPacket& packet) {
  const auto ref = packet_to_channel_arrays(model, packet);
  if (ref.size() != out.channel_arrays.size())
    throw std::invalid_argument("outgoing_distance: channel count mismatch");
  const double cell = model.kind == ModelKind::friedrichs ? model.grid.dx()
                                                          : model.grid.dk();
  double acc = 0.0;
  for (std::size_t ch = 0; ch < ref.size(); ++ch)
    acc += cell * kernels::dist2_sum(ref[ch].data(), out.channel_arrays[ch].data(),
                                     ref[ch].size());
  return std::sqrt(acc);
}

DecayRecord asymptotic_coupling_check(Evolver& evolver, const SpectralPacket& packet,
                                      const SpectralPacket& s_packet,
                                      const GridState& prepared,
                                      const std::vector<double>& times) {
  const ModelSpec& model = evolver.model();
  const double dt = evolver.dt();
  DecayRecord rec;
  std::vector<double> neg, pos;
  for (double t : times) (t < 0.0 ? neg : pos).push_back(t);
  std::sort(neg.begin(), neg.end(), std::greater<double>());  // towards -inf
  std::sort(pos.begin(), pos.end());

  const double dx = model.grid.dx();
  auto state_distance = [&](const GridState& a, const GridState& b) {
    double acc = 0.0;
    for (std::size_t ch = 0; ch < a.channels.size(); ++ch)
      acc += dx * kernels::dist2_sum(a.channels[ch].data(), b.channels[ch].data(),
                                     a.channels[ch].size());
    return std::sqrt(acc);  // J* drops the discrete component
  };

  auto run_side = [&](const std::vector<double>& ts, const SpectralPacket& ref,
                      std::vector<double>& t_out, std::vector<double>& g_out) {
    if (ts.empty()) return;
    if (auto* fp = evolver.friedrichs()) {
      fp->set_anchor(prepared);
      for (double t : ts) {
        const GridState full = fp->at_time(t);
        const GridState free = free_evolve(model, ref, t);
        t_out.push_back(t);
        g_out.push_back(state_distance(full, free));
      }
      return;
    }
    auto* prop = evolver.split();
    GridState cur = prepared;
    for (double t : ts) {
      const auto steps = static_cast<long>(std::llround((t - cur.time) / dt));
      for (long i = 0; i < std::abs(steps); ++i) {
        if (steps > 0)
          prop->step(cur);
        else
          prop->step_back(cur);
      }
      const GridState free = free_evolve(model, ref, cur.time);
      t_out.push_back(cur.time);
      g_out.push_back(state_distance(cur, free));
    }
  };

  run_side(neg, packet, rec.times_neg, rec.g_minus);
  run_side(pos, s_packet, rec.times_pos, rec.g_plus);

  auto fit_exponent = [](const std::vector<double>& t, const std::vector<double>& g) {
    // log-log least squares over samples above the noise floor
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (g[i] < 1e-13 || std::abs(t[i]) < 1e-9) continue;
      const double x = std::log(std::abs(t[i])), y = std::log(g[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++n;
    }
    if (n < 3) return -99.0;  // decayed below floor almost immediately
    const double denom = static_cast<double>(n) * sxx - sx * sx;
    if (std::abs(denom) < 1e-30) return 0.0;
    return (static_cast<double>(n) * sxy - sx * sy) / denom;
  };
  auto tail_sum = [](const std::vector<double>& t, const std::vector<double>& g) {
    double acc = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i)
      acc += 0.5 * (g[i] + g[i - 1]) * std::abs(t[i] - t[i - 1]);
    return acc;
  };

  rec.exponent_neg = fit_exponent(rec.times_neg, rec.g_minus);
  rec.exponent_pos = fit_exponent(rec.times_pos, rec.g_plus);
  rec.tail_sum_neg = tail_sum(rec.times_neg, rec.g_minus);
  rec.tail_sum_pos = tail_sum(rec.times_pos, rec.g_plus);
  rec.integrable = (rec.exponent_neg < -1.05 || rec.exponent_neg == -99.0) &&
                   (rec.exponent_pos < -1.05 || rec.exponent_pos == -99.0);
  return rec;
}

}  // namespace tdlab
