#pragma once

// Time-domain improper integrals: free/full sojourn times, the complement
// term T_2, the three delay quantities, the Theorem-3.4-style free integral,
// and the sojourn difference. All quantities that enter a difference are
// accumulated from one shared time loop at the integrand level.

#include <cstddef>
#include <optional>
#include <vector>

#include "tdlab/localisation.hpp"
#include "tdlab/models.hpp"

namespace tdlab {

struct TimeIntegrationPolicy {
  double dt = 0.02;
  double t_max_factor = 4.0;  // T_max = factor * r / v_min
  double tail_tol = 1e-5;
  double t_prep = 40.0;
  double t_post = 0.0;  // 0: defaults to t_prep where needed
};

struct SojournLedger {
  double r = 0.0;
  double T_r0_phi = 0.0, T_r0_Sphi = 0.0;
  double T_r1 = 0.0, T_2 = 0.0;
  double tau_sym = 0.0;       // integrand-level combination plus T_2
  double tau_in = 0.0;        // (T_r1 + T_2) - T_r0_phi
  double tau_free_ref = 0.0;  // auxiliary free-commutator quantity
  double theorem34 = 0.0;     // free integral of phi at this r
  double sojourn_diff = 0.0;  // T_r0(S phi) - T_r0(phi), integrand-level
  double tau_sym_from_pieces = 0.0;  // totals-level cross-check
  double t_max = 0.0;
  double tail_max = 0.0;  // largest integrand over the final 10% windows
  bool tail_ok = true;
};

// Raw expectation samples shared by every ledger entry of a study.
struct SojournStreams {
  double dt = 0.0;
  std::size_t n_half = 0;  // t_i = (i - n_half) dt, i = 0 .. 2 n_half
  std::vector<double> r_values;         // combo-major values (profile-major)
  std::vector<std::size_t> profile_of;  // combo -> profile index
  std::vector<double> t_max;            // per combo
  std::vector<std::vector<double>> full, free_phi, free_sphi;  // [combo][sample]
  std::vector<double> t2;               // |z(t)|^2 per sample (model C only)
  double norm_drift_per_time = 0.0;
  bool has_full = false, has_sphi = false;
};

// One shared time loop over [-T_max(max r), +T_max(max r)] sampling the full
// stream (when `prepared` is given), the free phi stream, and the free S phi
// stream (when `sphi` is given), weighted by every (profile, r) combination.
SojournStreams compute_streams(const ModelSpec& model, Evolver* evolver,
                               const SpectralPacket& phi, const SpectralPacket* sphi,
                               const GridState* prepared,
                               const std::vector<LocalisationProfile>& profiles,
                               const std::vector<double>& r_list,
                               const TimeIntegrationPolicy& policy);

SojournLedger assemble_ledger(const SojournStreams& streams, std::size_t combo,
                              const TimeIntegrationPolicy& policy);

// --- standalone operations (each runs its own small stream set) -----------

double sojourn_free(const ModelSpec& model, const SpectralPacket& phi,
                    const LocalisationProfile& profile, double r,
                    const TimeIntegrationPolicy& policy, bool* tail_ok = nullptr);

// (T_r1, T_2); needs the full dynamics.
std::pair<double, double> sojourn_full(const ModelSpec& model, const SpectralPacket& phi,
                                       const LocalisationProfile& profile, double r,
                                       const TimeIntegrationPolicy& policy);

SojournLedger tau_sym(const ModelSpec& model, const SpectralPacket& phi,
                      const FiberSMatrix& s, const LocalisationProfile& profile,
                      double r, const TimeIntegrationPolicy& policy);

double tau_in(const SojournLedger& ledger);

double tau_free_reference(const ModelSpec& model, const SpectralPacket& phi,
                          const FiberSMatrix& s, const LocalisationProfile& profile,
                          double r, const TimeIntegrationPolicy& policy);

double theorem34_integral(const ModelSpec& model, const SpectralPacket& phi,
                          const LocalisationProfile& profile, double r,
                          const TimeIntegrationPolicy& policy);

double sojourn_difference(const ModelSpec& model, const SpectralPacket& phi,
                          const FiberSMatrix& s, const LocalisationProfile& profile,
                          double r, const TimeIntegrationPolicy& policy);

}  // namespace tdlab
