#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "tdlab/kernels.hpp"
#include "tdlab/models.hpp"

namespace tdlab {

namespace {

constexpr double kSpeedThreshold = 1e-6;  // critical-value detection

double sq(double x) { return x * x; }

}  // namespace

std::size_t ModelSpec::channel_count() const {
  return kind == ModelKind::two_channel ? 2 : 1;
}

std::size_t ModelSpec::fiber_dim() const {
  switch (kind) {
    case ModelKind::schrodinger: return 2;
    case ModelKind::two_channel: return 4;
    case ModelKind::friedrichs: return 1;
  }
  return 1;
}

std::vector<double> ModelSpec::kappa() const {
  switch (kind) {
    case ModelKind::schrodinger: return {0.0};
    case ModelKind::two_channel: return {two_channel.e1, two_channel.e2};
    case ModelKind::friedrichs: return {};
  }
  return {};
}

double ModelSpec::fiber_velocity(std::size_t c, double lambda) const {
  switch (kind) {
    case ModelKind::schrodinger: {
      if (lambda <= 0.0)
        throw std::domain_error("fiber_velocity: lambda outside open spectrum");
      const double v = 2.0 * std::sqrt(lambda);
      return c == 0 ? v : -v;
    }
    case ModelKind::two_channel: {
      const int ch = channel_of_fiber(c);
      const double e = ch == 0 ? two_channel.e1 : two_channel.e2;
      const double m = ch == 0 ? two_channel.m1 : two_channel.m2;
      if (lambda <= e)
        throw std::domain_error("fiber_velocity: channel closed at lambda");
      const double v = std::sqrt(2.0 * (lambda - e) / m);
      return sign_of_fiber(c) > 0 ? v : -v;
    }
    case ModelKind::friedrichs: return -1.0;
  }
  return 0.0;
}

double ModelSpec::fiber_hessian(std::size_t c) const {
  switch (kind) {
    case ModelKind::schrodinger: return 2.0;
    case ModelKind::two_channel:
      return channel_of_fiber(c) == 0 ? 1.0 / two_channel.m1 : 1.0 / two_channel.m2;
    case ModelKind::friedrichs: return 0.0;
  }
  return 0.0;
}

double ModelSpec::all_open_threshold() const {
  switch (kind) {
    case ModelKind::schrodinger: return 0.0;
    case ModelKind::two_channel: return std::max(two_channel.e1, two_channel.e2);
    case ModelKind::friedrichs: return -std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

int ModelSpec::channel_of_fiber(std::size_t c) const {
  if (kind == ModelKind::two_channel) return static_cast<int>(c % 2);
  return 0;
}

int ModelSpec::sign_of_fiber(std::size_t c) const {
  switch (kind) {
    case ModelKind::schrodinger: return c == 0 ? +1 : -1;
    case ModelKind::two_channel: return c < 2 ? +1 : -1;
    case ModelKind::friedrichs: return 0;
  }
  return 0;
}

double ModelSpec::lambda_of_k(int channel, double k) const {
  switch (kind) {
    case ModelKind::schrodinger: return k * k;
    case ModelKind::two_channel: {
      const double e = channel == 0 ? two_channel.e1 : two_channel.e2;
      const double m = channel == 0 ? two_channel.m1 : two_channel.m2;
      return k * k / (2.0 * m) + e;
    }
    case ModelKind::friedrichs:
      throw std::logic_error("lambda_of_k: model C has no momentum dispersion");
  }
  return 0.0;
}

double ModelSpec::k_of_lambda(int channel, double lambda) const {
  switch (kind) {
    case ModelKind::schrodinger:
      if (lambda < 0.0) throw std::domain_error("k_of_lambda: lambda < 0");
      return std::sqrt(lambda);
    case ModelKind::two_channel: {
      const double e = channel == 0 ? two_channel.e1 : two_channel.e2;
      const double m = channel == 0 ? two_channel.m1 : two_channel.m2;
      if (lambda < e) throw std::domain_error("k_of_lambda: channel closed");
      return std::sqrt(2.0 * m * (lambda - e));
    }
    case ModelKind::friedrichs:
      throw std::logic_error("k_of_lambda: model C has no momentum dispersion");
  }
  return 0.0;
}

double ModelSpec::potential_at(double x) const {
  if (kind != ModelKind::schrodinger) return 0.0;
  const auto& p = schrodinger;
  switch (p.potential) {
    case PotentialKind::none: return 0.0;
    case PotentialKind::square:
      return (x >= 0.0 && x <= p.barrier_length) ? p.v0 : 0.0;
    case PotentialKind::gaussian: {
      if (std::abs(x - p.gauss_center) > p.gauss_support) return 0.0;
      return p.v0 * std::exp(-sq(x - p.gauss_center) / (2.0 * sq(p.gauss_width)));
    }
  }
  return 0.0;
}

double ModelSpec::coupling_profile(double x) const {
  if (kind != ModelKind::friedrichs) return 0.0;
  return std::exp(-sq(x - friedrichs.level) / (2.0 * sq(friedrichs.coupling_width)));
}

std::pair<double, double> ModelSpec::interaction_support() const {
  switch (kind) {
    case ModelKind::schrodinger:
      if (schrodinger.potential == PotentialKind::square)
        return {0.0, schrodinger.barrier_length};
      if (schrodinger.potential == PotentialKind::gaussian)
        return {schrodinger.gauss_center - schrodinger.gauss_support,
                schrodinger.gauss_center + schrodinger.gauss_support};
      return {0.0, 0.0};
    case ModelKind::two_channel: return {0.0, two_channel.coupling_length};
    case ModelKind::friedrichs: return {0.0, 0.0};
  }
  return {0.0, 0.0};
}

ModelSpec make_schrodinger(const PositionGrid& grid, const SchrodingerParams& p) {
  ModelSpec m;
  m.kind = ModelKind::schrodinger;
  m.grid = grid;
  m.schrodinger = p;
  if (p.potential == PotentialKind::square && !(p.barrier_length > 0.0))
    throw std::invalid_argument("square barrier needs positive length");
  if (p.potential == PotentialKind::gaussian &&
      (!(p.gauss_width > 0.0) || !(p.gauss_support > 0.0)))
    throw std::invalid_argument("gaussian potential needs positive width/support");
  return m;
}

ModelSpec make_two_channel(const PositionGrid& grid, const TwoChannelParams& p) {
  if (!(p.m1 > 0.0) || !(p.m2 > 0.0))
    throw std::invalid_argument("two-channel masses must be positive");
  if (!(p.e2 >= p.e1)) throw std::invalid_argument("two-channel needs e2 >= e1");
  if (!(p.coupling_length > 0.0))
    throw std::invalid_argument("two-channel coupling length must be positive");
  ModelSpec m;
  m.kind = ModelKind::two_channel;
  m.grid = grid;
  m.two_channel = p;
  return m;
}

ModelSpec make_friedrichs(const PositionGrid& grid, const FriedrichsParams& p) {
  if (!(p.coupling_width > 0.0))
    throw std::invalid_argument("friedrichs coupling width must be positive");
  ModelSpec m;
  m.kind = ModelKind::friedrichs;
  m.grid = grid;
  m.friedrichs = p;
  // Truncating the coupling tail at the grid edge must be harmless.
  const double edge = std::min(std::abs(grid.x0), std::abs(grid.x0 + grid.extent));
  const double tail = sq(m.coupling_profile(edge));
  if (p.coupling != 0.0 && tail > 1e-8)
    throw std::invalid_argument("friedrichs: coupling profile tail exceeds 1e-8 at grid edge");
  return m;
}

// ---------------------------------------------------------------------------

double state_norm2(const ModelSpec& model, const GridState& s) {
  double acc = 0.0;
  for (const auto& ch : s.channels) acc += kernels::abs2_sum(ch.data(), ch.size());
  acc *= model.grid.dx();
  acc += std::norm(s.discrete);
  return acc;
}

double SpectralPacket::norm2() const {
  double acc = 0.0;
  for (std::size_t m = 0; m < lambda.size(); ++m) {
    double fiber = 0.0;
    for (std::size_t c = 0; c < fiber_dim; ++c) fiber += std::norm(at(m)[c]);
    acc += weight[m] * fiber;
  }
  return acc;
}

double FiberSMatrix::unitarity_defect() const {
  double worst = 0.0;
  std::vector<cplx> g(dim * dim);
  for (std::size_t m = 0; m < lambda.size(); ++m) {
    const cplx* s = at(m);
    // G = S* S - 1, Frobenius norm
    double acc = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) {
        cplx e{0.0, 0.0};
        for (std::size_t l = 0; l < dim; ++l) e += std::conj(s[l * dim + i]) * s[l * dim + j];
        if (i == j) e -= 1.0;
        acc += std::norm(e);
      }
    }
    worst = std::max(worst, std::sqrt(acc));
  }
  return worst;
}

std::vector<double> critical_values(const ModelSpec& model,
                                    const std::vector<double>& lambda_grid) {
  // Signed speed-squared of component c, continued below its threshold.
  auto speed2 = [&](std::size_t c, double lam) -> double {
    switch (model.kind) {
      case ModelKind::schrodinger: return 4.0 * lam;
      case ModelKind::two_channel: {
        const auto& p = model.two_channel;
        const double e = model.channel_of_fiber(c) == 0 ? p.e1 : p.e2;
        const double m = model.channel_of_fiber(c) == 0 ? p.m1 : p.m2;
        return 2.0 * (lam - e) / m;
      }
      case ModelKind::friedrichs: return 1.0;
    }
    return 1.0;
  };

  const std::size_t nf = model.fiber_dim();
  std::vector<char> hit(lambda_grid.size(), 0);
  for (std::size_t c = 0; c < nf; ++c) {
    for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
      const double s2 = speed2(c, lambda_grid[i]);
      // The component contributes spectrum at lam only when s2 >= 0; its
      // speed degenerates when s2 falls below threshold^2.
      if (s2 >= 0.0 && s2 < sq(kSpeedThreshold)) hit[i] = 1;
      // Threshold crossing inside the cell: flag the nearer node.
      if (i + 1 < lambda_grid.size()) {
        const double s2n = speed2(c, lambda_grid[i + 1]);
        if (s2 < 0.0 && s2n > 0.0) {
          // locate the zero by linearity of s2 in lambda
          const double frac = -s2 / (s2n - s2);
          hit[frac <= 0.5 ? i : i + 1] = 1;
        }
      }
    }
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    if (!hit[i]) continue;
    if (out.empty() || lambda_grid[i] - out.back() > 2.0 * kSpeedThreshold)
      out.push_back(lambda_grid[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Packets

SpectralPacket make_packet(const ModelSpec& model, double center_energy, double width,
                           const std::vector<cplx>& fiber_weights, double chirp) {
  if (!(width > 0.0)) throw std::invalid_argument("make_packet: width must be positive");
  if (fiber_weights.size() != model.fiber_dim())
    throw std::invalid_argument("make_packet: fiber weight count mismatch");
  double wnorm2 = 0.0;
  for (const cplx& w : fiber_weights) wnorm2 += std::norm(w);
  if (!(wnorm2 > 0.0)) throw std::invalid_argument("make_packet: zero fiber weights");

  SpectralPacket pkt;
  pkt.fiber_dim = model.fiber_dim();
  pkt.support_lo = center_energy - 4.0 * width;
  pkt.support_hi = center_energy + 4.0 * width;

  // kappa margin: distance from the envelope support to the critical set,
  // requiring in addition that every fiber component is open on the support.
  double margin = std::numeric_limits<double>::infinity();
  for (double kv : model.kappa()) {
    if (kv >= pkt.support_lo && kv <= pkt.support_hi) margin = std::min(margin, 0.0);
    margin = std::min(margin, std::min(std::abs(pkt.support_lo - kv),
                                       std::abs(pkt.support_hi - kv)));
  }
  if (pkt.support_lo <= model.all_open_threshold() &&
      model.kind != ModelKind::friedrichs)
    margin = 0.0;
  if (model.kind != ModelKind::friedrichs && !(margin > 0.0))
    throw std::invalid_argument(
        "make_packet: envelope support [" + std::to_string(pkt.support_lo) + ", " +
        std::to_string(pkt.support_hi) + "] touches kappa(H0); margin must stay positive");
  if (model.kind == ModelKind::friedrichs)
    margin = std::numeric_limits<double>::infinity();
  pkt.kappa_margin = margin;

  // Envelope: Gaussian times C^inf cutoff, support exactly [c-4w, c+4w].
  auto envelope = [center_energy, width](double lam) {
    const double u = std::abs(lam - center_energy) / width;
    if (u >= 4.0) return 0.0;
    const double cut = u <= 3.0 ? 1.0 : smoothstep01(4.0 - u);
    return std::exp(-0.5 * sq(u)) * cut;
  };

  // Quadrature grid per model.
  switch (model.kind) {
    case ModelKind::schrodinger: {
      const double dk = model.grid.dk();
      const double k_lo = model.k_of_lambda(0, std::max(pkt.support_lo, 0.0));
      const double k_hi = model.k_of_lambda(0, pkt.support_hi);
      if (k_hi > 0.75 * model.grid.k_max())
        throw std::invalid_argument("make_packet: grid too coarse for packet energies");
      const auto m_lo = static_cast<std::size_t>(std::max(1.0, std::ceil(k_lo / dk)));
      const auto m_hi = static_cast<std::size_t>(std::floor(k_hi / dk));
      for (std::size_t m = m_lo; m <= m_hi; ++m) {
        const double k = static_cast<double>(m) * dk;
        pkt.lambda.push_back(k * k);
        pkt.weight.push_back(2.0 * k * dk);
      }
      break;
    }
    case ModelKind::two_channel: {
      const std::size_t nodes = 2048;
      const double dl = (pkt.support_hi - pkt.support_lo) / static_cast<double>(nodes - 1);
      const double k_hi = model.k_of_lambda(0, pkt.support_hi);
      const double k_hi2 = model.k_of_lambda(1, pkt.support_hi);
      if (std::max(k_hi, k_hi2) > 0.75 * model.grid.k_max())
        throw std::invalid_argument("make_packet: grid too coarse for packet energies");
      for (std::size_t m = 0; m < nodes; ++m) {
        pkt.lambda.push_back(pkt.support_lo + static_cast<double>(m) * dl);
        pkt.weight.push_back((m == 0 || m == nodes - 1) ? 0.5 * dl : dl);
      }
      break;
    }
    case ModelKind::friedrichs: {
      const auto& g = model.grid;
      const double pad = 2.0 * g.dx();
      if (pkt.support_lo < g.x0 + pad || pkt.support_hi > g.x0 + g.extent - pad)
        throw std::invalid_argument("make_packet: envelope support exceeds the energy grid");
      for (std::size_t i = 0; i < g.n; ++i) {
        const double x = g.x_at(i);
        if (x > pkt.support_lo && x < pkt.support_hi) {
          pkt.lambda.push_back(x);
          pkt.weight.push_back(g.dx());
        }
      }
      break;
    }
  }
  if (pkt.lambda.size() < 8)
    throw std::invalid_argument("make_packet: too few spectral nodes under the envelope");

  // Amplitudes + normalization.
  pkt.amp.assign(pkt.lambda.size() * pkt.fiber_dim, cplx{0.0, 0.0});
  for (std::size_t m = 0; m < pkt.lambda.size(); ++m) {
    const double lam = pkt.lambda[m];
    const double env = envelope(lam);
    const cplx ph = std::polar(1.0, chirp * lam);
    for (std::size_t c = 0; c < pkt.fiber_dim; ++c)
      pkt.at(m)[c] = fiber_weights[c] * env * ph;
  }
  const double nn = pkt.norm2();
  if (!(nn > 0.0)) throw std::invalid_argument("make_packet: vanishing envelope on grid");
  const double scale = 1.0 / std::sqrt(nn);
  for (cplx& a : pkt.amp) a *= scale;

  std::vector<cplx> wts = fiber_weights;
  pkt.eval = [envelope, wts, chirp, scale](double lam, cplx* out) {
    const double env = envelope(lam);
    const cplx ph = std::polar(scale * env, chirp * lam);
    for (std::size_t c = 0; c < wts.size(); ++c) out[c] = wts[c] * ph;
  };
  return pkt;
}

std::vector<std::vector<cplx>> packet_to_channel_arrays(const ModelSpec& model,
                                                        const SpectralPacket& packet) {
  if (!packet.eval)
    throw std::logic_error("packet_to_channel_arrays: packet has no exact evaluator");
  const auto& g = model.grid;
  std::vector<std::vector<cplx>> out(model.channel_count(),
                                     std::vector<cplx>(g.n, cplx{0.0, 0.0}));
  std::vector<cplx> buf(packet.fiber_dim);

  if (model.kind == ModelKind::friedrichs) {
    for (std::size_t i = 0; i < g.n; ++i) {
      const double x = g.x_at(i);
      if (x <= packet.support_lo || x >= packet.support_hi) continue;
      packet.eval(x, buf.data());
      out[0][i] = buf[0];
    }
    return out;
  }

  for (std::size_t ch = 0; ch < out.size(); ++ch) {
    for (std::size_t j = 0; j < g.n; ++j) {
      const double k = g.k_at(j);
      if (k == 0.0 || j == g.n / 2) continue;  // DC and Nyquist carry nothing
      const double lam = model.lambda_of_k(static_cast<int>(ch), k);
      if (lam <= packet.support_lo || lam >= packet.support_hi) continue;
      packet.eval(lam, buf.data());
      // flux normalization: |psi_hat|^2 dk = |phi|^2 dlambda
      const double v = std::abs(model.fiber_velocity(ch + (k > 0 ? 0 : out.size()), lam));
      std::size_t comp = 0;
      if (model.kind == ModelKind::schrodinger) comp = k > 0 ? 0 : 1;
      else comp = (k > 0 ? 0 : 2) + ch;
      out[ch][j] = buf[comp] * std::sqrt(v);
    }
  }
  return out;
}

GridState packet_to_grid(const ModelSpec& model, const SpectralPacket& packet) {
  GridState s;
  s.time = 0.0;
  s.channels = packet_to_channel_arrays(model, packet);
  if (model.kind != ModelKind::friedrichs) {
    GridTransform tr(model.grid);
    for (auto& ch : s.channels) tr.to_position(ch);
  }
  return s;
}

GridState free_evolve(const ModelSpec& model, const SpectralPacket& packet, double t) {
  GridState s;
  s.time = t;
  s.channels = packet_to_channel_arrays(model, packet);
  const auto& g = model.grid;
  if (model.kind == ModelKind::friedrichs) {
    auto& u = s.channels[0];
    for (std::size_t i = 0; i < g.n; ++i)
      if (u[i] != cplx{0.0, 0.0}) u[i] *= std::polar(1.0, -g.x_at(i) * t);
    return s;
  }
  GridTransform tr(g);
  for (std::size_t ch = 0; ch < s.channels.size(); ++ch) {
    auto& a = s.channels[ch];
    for (std::size_t j = 0; j < g.n; ++j) {
      if (a[j] == cplx{0.0, 0.0}) continue;
      const double lam = model.lambda_of_k(static_cast<int>(ch), g.k_at(j));
      a[j] *= std::polar(1.0, -lam * t);
    }
    tr.to_position(a);
  }
  return s;
}

double localisation_expectation(const ModelSpec& model, const GridState& s,
                                const LocalisationProfile& profile, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("localisation_expectation: r must be positive");
  const auto& g = model.grid;
  const double reach = profile.support_radius * r;

  if (model.kind == ModelKind::friedrichs) {
    if (reach >= g.k_max())
      throw std::invalid_argument("localisation_expectation: b*r exceeds the momentum grid");
    GridTransform tr(g);
    std::vector<cplx> mom(g.n);
    tr.to_momentum(s.channels[0].data(), mom.data());
    double acc = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) {
      const double p = g.k_at(j);
      if (std::abs(p) >= reach) continue;
      acc += eval_f_radial(profile, std::abs(p) / r) * std::norm(mom[j]);
    }
    return acc * g.dk();
  }

  const double half = 0.5 * g.extent;
  if (reach >= half)
    throw std::invalid_argument("localisation_expectation: b*r exceeds the position grid");
  double acc = 0.0;
  for (const auto& ch : s.channels) {
    for (std::size_t i = 0; i < g.n; ++i) {
      const double x = g.x_at(i);
      if (std::abs(x) >= reach) continue;
      acc += eval_f_radial(profile, std::abs(x) / r) * std::norm(ch[i]);
    }
  }
  return acc * g.dx();
}

VelocityRange velocity_range(const ModelSpec& model, const SpectralPacket& packet) {
  VelocityRange vr;
  if (model.kind == ModelKind::friedrichs) {
    vr.v_min = vr.v_max = 1.0;
    return vr;
  }
  vr.v_min = std::numeric_limits<double>::infinity();
  vr.v_max = 0.0;
  for (std::size_t c = 0; c < model.fiber_dim(); ++c) {
    for (double lam : {packet.support_lo, packet.support_hi}) {
      const double v = std::abs(model.fiber_velocity(c, lam));
      vr.v_min = std::min(vr.v_min, v);
      vr.v_max = std::max(vr.v_max, v);
    }
  }
  return vr;
}

}  // namespace tdlab
