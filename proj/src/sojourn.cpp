#include "tdlab/sojourn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tdlab/kernels.hpp"
#include "tdlab/spectral.hpp"

namespace tdlab {

namespace {

// f(.) weights over the localisation support, cell measure folded in.
// Position support is one contiguous index range; momentum support (model C)
// wraps around the FFT ordering, hence segments.
struct WeightSegments {
  std::vector<std::pair<std::size_t, std::vector<double>>> segs;

  double apply(const cplx* data) const {
    double acc = 0.0;
    for (const auto& [off, w] : segs)
      acc += kernels::weighted_abs2(w.data(), data + off, w.size());
    return acc;
  }
};

WeightSegments position_weights(const PositionGrid& g, const LocalisationProfile& p,
                                double r) {
  const double reach = p.support_radius * r;
  if (reach >= 0.5 * g.extent)
    throw std::invalid_argument("sojourn: b*r exceeds the position grid");
  WeightSegments ws;
  std::size_t i0 = g.n, i1 = 0;
  for (std::size_t i = 0; i < g.n; ++i) {
    if (std::abs(g.x_at(i)) < reach) {
      i0 = std::min(i0, i);
      i1 = std::max(i1, i);
    }
  }
  if (i0 > i1) return ws;
  std::vector<double> w(i1 - i0 + 1);
  for (std::size_t i = i0; i <= i1; ++i)
    w[i - i0] = eval_f_radial(p, std::abs(g.x_at(i)) / r) * g.dx();
  ws.segs.emplace_back(i0, std::move(w));
  return ws;
}

WeightSegments momentum_weights(const PositionGrid& g, const LocalisationProfile& p,
                                double r) {
  const double reach = p.support_radius * r;
  if (reach >= g.k_max())
    throw std::invalid_argument("sojourn: b*r exceeds the momentum grid");
  WeightSegments ws;
  // non-negative frequencies live at the front, negative at the back
  std::vector<double> lo, hi;
  for (std::size_t j = 0; j < g.n / 2; ++j) {
    if (std::abs(g.k_at(j)) >= reach) break;
    lo.push_back(eval_f_radial(p, std::abs(g.k_at(j)) / r) * g.dk());
  }
  std::size_t j_hi = g.n;
  for (std::size_t j = g.n - 1; j >= g.n / 2; --j) {
    if (std::abs(g.k_at(j)) >= reach) break;
    j_hi = j;
    if (j == g.n / 2) break;
  }
  if (!lo.empty()) ws.segs.emplace_back(0, std::move(lo));
  if (j_hi < g.n) {
    std::vector<double> w(g.n - j_hi);
    for (std::size_t j = j_hi; j < g.n; ++j)
      w[j - j_hi] = eval_f_radial(p, std::abs(g.k_at(j)) / r) * g.dk();
    ws.segs.emplace_back(j_hi, std::move(w));
  }
  return ws;
}

// Exact free-evolution marcher: cumulative phase multiplication on the
// spectral-side arrays plus a transform into the representation where
// f(Phi/r) is diagonal.
class FreeMarcher {
 public:
  FreeMarcher(const ModelSpec& model, const GridTransform& tr,
              const SpectralPacket& pkt, double dt)
      : model_(model), tr_(tr), base_(packet_to_channel_arrays(model, pkt)) {
    cur_ = base_;
    scratch_.assign(model.grid.n, cplx{0.0, 0.0});
    const auto& g = model.grid;
    const std::size_t nch = base_.size();
    fwd_.assign(nch, std::vector<cplx>(g.n));
    bwd_.assign(nch, std::vector<cplx>(g.n));
    for (std::size_t ch = 0; ch < nch; ++ch) {
      for (std::size_t j = 0; j < g.n; ++j) {
        const double lam = model.kind == ModelKind::friedrichs
                               ? g.x_at(j)
                               : model.lambda_of_k(static_cast<int>(ch), g.k_at(j));
        fwd_[ch][j] = std::polar(1.0, -lam * dt);
        bwd_[ch][j] = std::polar(1.0, +lam * dt);
      }
    }
  }

  void reset() { cur_ = base_; }

  void advance(bool forward) {
    for (std::size_t ch = 0; ch < cur_.size(); ++ch)
      kernels::cmul(cur_[ch].data(), (forward ? fwd_ : bwd_)[ch].data(), cur_[ch].size());
  }

  // Expectation of every weight combo on the current state.
  void evaluate(const std::vector<WeightSegments>& combos, double* out) {
    if (model_.kind == ModelKind::friedrichs) {
      // state arrays are position-space; f is diagonal in momentum
      tr_.to_momentum(cur_[0].data(), scratch_.data());
      for (std::size_t c = 0; c < combos.size(); ++c) out[c] = combos[c].apply(scratch_.data());
      return;
    }
    for (std::size_t c = 0; c < combos.size(); ++c) out[c] = 0.0;
    for (std::size_t ch = 0; ch < cur_.size(); ++ch) {
      tr_.to_position(cur_[ch].data(), scratch_.data());
      for (std::size_t c = 0; c < combos.size(); ++c)
        out[c] += combos[c].apply(scratch_.data());
    }
  }

 private:
  const ModelSpec& model_;
  const GridTransform& tr_;
  std::vector<std::vector<cplx>> base_, cur_;
  std::vector<std::vector<cplx>> fwd_, bwd_;
  std::vector<cplx> scratch_;
};

}  // namespace

SojournStreams compute_streams(const ModelSpec& model, Evolver* evolver,
                               const SpectralPacket& phi, const SpectralPacket* sphi,
                               const GridState* prepared,
                               const std::vector<LocalisationProfile>& profiles,
                               const std::vector<double>& r_list,
                               const TimeIntegrationPolicy& policy) {
  if (profiles.empty() || r_list.empty())
    throw std::invalid_argument("compute_streams: need at least one profile and r");
  if (prepared && !evolver)
    throw std::invalid_argument("compute_streams: full stream needs an evolver");

  const VelocityRange vr = velocity_range(model, phi);
  SojournStreams st;
  st.dt = policy.dt;
  st.has_full = prepared != nullptr;
  st.has_sphi = sphi != nullptr;

  const std::size_t ncombo = profiles.size() * r_list.size();
  st.r_values.resize(ncombo);
  st.profile_of.resize(ncombo);
  st.t_max.resize(ncombo);
  std::vector<WeightSegments> combos(ncombo);
  double t_max_global = 0.0;
  for (std::size_t p = 0; p < profiles.size(); ++p) {
    for (std::size_t ri = 0; ri < r_list.size(); ++ri) {
      const std::size_t c = p * r_list.size() + ri;
      st.r_values[c] = r_list[ri];
      st.profile_of[c] = p;
      st.t_max[c] = policy.t_max_factor * r_list[ri] / vr.v_min;
      t_max_global = std::max(t_max_global, st.t_max[c]);
      combos[c] = model.kind == ModelKind::friedrichs
                      ? momentum_weights(model.grid, profiles[p], r_list[ri])
                      : position_weights(model.grid, profiles[p], r_list[ri]);
    }
  }

  st.n_half = static_cast<std::size_t>(std::ceil(t_max_global / policy.dt - 1e-12));
  const std::size_t total = 2 * st.n_half + 1;
  const std::size_t center = st.n_half;

  st.free_phi.assign(ncombo, std::vector<double>(total, 0.0));
  if (sphi) st.free_sphi.assign(ncombo, std::vector<double>(total, 0.0));
  if (prepared) {
    st.full.assign(ncombo, std::vector<double>(total, 0.0));
    if (model.kind == ModelKind::friedrichs) st.t2.assign(total, 0.0);
  }

  GridTransform tr(model.grid);
  FreeMarcher march_phi(model, tr, phi, policy.dt);
  std::optional<FreeMarcher> march_sphi;
  if (sphi) march_sphi.emplace(model, tr, *sphi, policy.dt);

  std::vector<double> vals(ncombo);
  auto eval_free = [&](std::size_t sample) {
    march_phi.evaluate(combos, vals.data());
    for (std::size_t c = 0; c < ncombo; ++c) st.free_phi[c][sample] = vals[c];
    if (march_sphi) {
      march_sphi->evaluate(combos, vals.data());
      for (std::size_t c = 0; c < ncombo; ++c) st.free_sphi[c][sample] = vals[c];
    }
  };

  // --- free streams (and, for A/B, the full stream interleaved) -----------
  if (model.kind != ModelKind::friedrichs && prepared) {
    auto* prop = evolver->split();
    const double norm0 = std::sqrt(state_norm2(model, *prepared));

    auto eval_full = [&](const GridState& s, std::size_t sample) {
      double acc;
      for (std::size_t c = 0; c < ncombo; ++c) {
        acc = 0.0;
        for (const auto& ch : s.channels) acc += combos[c].apply(ch.data());
        st.full[c][sample] = acc;
      }
    };

    // t = 0
    eval_free(center);
    eval_full(*prepared, center);

    // backward then forward, free and full marching together
    for (int dir = 0; dir < 2; ++dir) {
      const bool forward = dir == 1;
      GridState full_state = *prepared;
      march_phi.reset();
      if (march_sphi) march_sphi->reset();
      for (std::size_t s = 1; s <= st.n_half; ++s) {
        const std::size_t sample = forward ? center + s : center - s;
        march_phi.advance(forward);
        if (march_sphi) march_sphi->advance(forward);
        if (forward)
          prop->step(full_state);
        else
          prop->step_back(full_state);
        eval_free(sample);
        eval_full(full_state, sample);
      }
      const double norm_end = std::sqrt(state_norm2(model, full_state));
      st.norm_drift_per_time = std::max(
          st.norm_drift_per_time, std::abs(norm_end - norm0) / t_max_global);
    }
    return st;
  }

  // Free-only marching (both models), full stream for C batched separately.
  eval_free(center);
  for (int dir = 0; dir < 2; ++dir) {
    const bool forward = dir == 1;
    march_phi.reset();
    if (march_sphi) march_sphi->reset();
    for (std::size_t s = 1; s <= st.n_half; ++s) {
      march_phi.advance(forward);
      if (march_sphi) march_sphi->advance(forward);
      eval_free(forward ? center + s : center - s);
    }
  }

  if (prepared && model.kind == ModelKind::friedrichs) {
    auto* prop = evolver->friedrichs();
    prop->set_anchor(*prepared);
    std::vector<cplx> mom(model.grid.n);
    const double norm0 = std::sqrt(state_norm2(model, *prepared));
    const double t0 = -static_cast<double>(st.n_half) * policy.dt;
    prop->sample(t0, policy.dt, total, [&](std::size_t i, const GridState& s) {
      tr.to_momentum(s.channels[0].data(), mom.data());
      for (std::size_t c = 0; c < ncombo; ++c) st.full[c][i] = combos[c].apply(mom.data());
      st.t2[i] = std::norm(s.discrete);
      if (i == 0 || i + 1 == total) {
        const double nrm = std::sqrt(state_norm2(model, s));
        st.norm_drift_per_time =
            std::max(st.norm_drift_per_time, std::abs(nrm - norm0) / t_max_global);
      }
    });
  }
  return st;
}

namespace {

// shared trapezoid over samples [center - m, center + m]
double trapz(const std::vector<double>& a, std::size_t center, std::size_t m, double dt) {
  if (m == 0) return 0.0;
  double acc = 0.5 * (a[center - m] + a[center + m]);
  for (std::size_t i = center - m + 1; i < center + m; ++i) acc += a[i];
  return acc * dt;
}

}  // namespace

SojournLedger assemble_ledger(const SojournStreams& st, std::size_t combo,
                              const TimeIntegrationPolicy& policy) {
  SojournLedger led;
  led.r = st.r_values[combo];
  const std::size_t center = st.n_half;
  const auto m = std::min<std::size_t>(
      st.n_half, static_cast<std::size_t>(std::ceil(st.t_max[combo] / st.dt - 1e-12)));
  led.t_max = static_cast<double>(m) * st.dt;

  const auto& fphi = st.free_phi[combo];
  led.T_r0_phi = trapz(fphi, center, m, st.dt);

  // Theorem 3.4 free integral: 1/2 int_0^T (F(-t) - F(t)) dt
  {
    double acc = 0.0;  // u_0 = 0
    for (std::size_t j = 1; j <= m; ++j) {
      const double u = fphi[center - j] - fphi[center + j];
      acc += (j == m) ? 0.5 * u : u;
    }
    led.theorem34 = 0.5 * acc * st.dt;
  }

  double tail = 0.0;
  auto tail_scan = [&](const std::vector<double>& a) {
    const std::size_t start = static_cast<std::size_t>(0.9 * static_cast<double>(m));
    for (std::size_t j = std::max<std::size_t>(start, 1); j <= m; ++j) {
      tail = std::max(tail, std::abs(a[center - j]));
      tail = std::max(tail, std::abs(a[center + j]));
    }
  };
  tail_scan(fphi);

  if (st.has_sphi) {
    const auto& fsphi = st.free_sphi[combo];
    led.T_r0_Sphi = trapz(fsphi, center, m, st.dt);
    tail_scan(fsphi);

    // sojourn difference at the integrand level
    double acc = 0.5 * ((fsphi[center - m] - fphi[center - m]) +
                        (fsphi[center + m] - fphi[center + m]));
    for (std::size_t i = center - m + 1; i < center + m; ++i)
      acc += fsphi[i] - fphi[i];
    led.sojourn_diff = acc * st.dt;

    // tau_free: 1/2 int_0^T [ (F_S(t) - F_S(-t)) - (F_phi(t) - F_phi(-t)) ] dt
    double tf = 0.0;
    for (std::size_t j = 1; j <= m; ++j) {
      const double u = (fsphi[center + j] - fsphi[center - j]) -
                       (fphi[center + j] - fphi[center - j]);
      tf += (j == m) ? 0.5 * u : u;
    }
    led.tau_free_ref = 0.5 * tf * st.dt;
  }

  if (st.has_full) {
    const auto& ffull = st.full[combo];
    led.T_r1 = trapz(ffull, center, m, st.dt);
    tail_scan(ffull);
    if (!st.t2.empty()) {
      led.T_2 = trapz(st.t2, center, st.n_half, st.dt);  // r-independent, full window
      const std::size_t start = static_cast<std::size_t>(0.9 * static_cast<double>(st.n_half));
      for (std::size_t j = std::max<std::size_t>(start, 1); j <= st.n_half; ++j)
        tail = std::max({tail, st.t2[center - j], st.t2[center + j]});
    }

    if (st.has_sphi) {
      const auto& fsphi = st.free_sphi[combo];
      // integrand-level tau_sym
      auto h = [&](std::size_t i) {
        return ffull[i] - 0.5 * (fphi[i] + fsphi[i]);
      };
      double acc = 0.5 * (h(center - m) + h(center + m));
      for (std::size_t i = center - m + 1; i < center + m; ++i) acc += h(i);
      led.tau_sym = acc * st.dt + led.T_2;
      led.tau_sym_from_pieces =
          (led.T_r1 + led.T_2) - 0.5 * (led.T_r0_phi + led.T_r0_Sphi);
      led.tau_in = (led.T_r1 + led.T_2) - led.T_r0_phi;
    }
  }

  led.tail_max = tail;
  led.tail_ok = tail < policy.tail_tol;
  return led;
}

// ---------------------------------------------------------------------------
// standalone operations

namespace {

SojournStreams single_stream(const ModelSpec& model, const SpectralPacket& phi,
                             const FiberSMatrix* s, const LocalisationProfile& profile,
                             double r, const TimeIntegrationPolicy& policy,
                             bool need_full) {
  std::optional<SpectralPacket> sphi;
  if (s) sphi = apply_S(*s, phi);
  if (need_full) {
    Evolver ev(model, policy.dt);
    PreparedState prep = prepare_minus_state(ev, phi, policy.t_prep, false);
    return compute_streams(model, &ev, phi, sphi ? &*sphi : nullptr, &prep.state,
                           {profile}, {r}, policy);
  }
  return compute_streams(model, nullptr, phi, sphi ? &*sphi : nullptr, nullptr,
                         {profile}, {r}, policy);
}

}  // namespace

double sojourn_free(const ModelSpec& model, const SpectralPacket& phi,
                    const LocalisationProfile& profile, double r,
                    const TimeIntegrationPolicy& policy, bool* tail_ok) {
  const SojournStreams st = single_stream(model, phi, nullptr, profile, r, policy, false);
  const SojournLedger led = assemble_ledger(st, 0, policy);
  if (tail_ok) *tail_ok = led.tail_ok;
  return led.T_r0_phi;
}

std::pair<double, double> sojourn_full(const ModelSpec& model, const SpectralPacket& phi,
                                       const LocalisationProfile& profile, double r,
                                       const TimeIntegrationPolicy& policy) {
  const SojournStreams st = single_stream(model, phi, nullptr, profile, r, policy, true);
  const SojournLedger led = assemble_ledger(st, 0, policy);
  return {led.T_r1, led.T_2};
}

SojournLedger tau_sym(const ModelSpec& model, const SpectralPacket& phi,
                      const FiberSMatrix& s, const LocalisationProfile& profile,
                      double r, const TimeIntegrationPolicy& policy) {
  const SojournStreams st = single_stream(model, phi, &s, profile, r, policy, true);
  return assemble_ledger(st, 0, policy);
}

double tau_in(const SojournLedger& ledger) {
  return (ledger.T_r1 + ledger.T_2) - ledger.T_r0_phi;
}

double tau_free_reference(const ModelSpec& model, const SpectralPacket& phi,
                          const FiberSMatrix& s, const LocalisationProfile& profile,
                          double r, const TimeIntegrationPolicy& policy) {
  const SojournStreams st = single_stream(model, phi, &s, profile, r, policy, false);
  return assemble_ledger(st, 0, policy).tau_free_ref;
}

double theorem34_integral(const ModelSpec& model, const SpectralPacket& phi,
                          const LocalisationProfile& profile, double r,
                          const TimeIntegrationPolicy& policy) {
  const SojournStreams st = single_stream(model, phi, nullptr, profile, r, policy, false);
  return assemble_ledger(st, 0, policy).theorem34;
}

double sojourn_difference(const ModelSpec& model, const SpectralPacket& phi,
                          const FiberSMatrix& s, const LocalisationProfile& profile,
                          double r, const TimeIntegrationPolicy& policy) {
  const SojournStreams st = single_stream(model, phi, &s, profile, r, policy, false);
  return assemble_ledger(st, 0, policy).sojourn_diff;
}

}  // namespace tdlab
