#pragma once

// Experiment orchestration: run the r-sweep, assemble ledgers, fit the
// r -> infinity extrapolations, and issue pass/fail verdicts for the
// symmetrized-delay identity, the usual-delay equality and the free
// integral formula.

#include <optional>
#include <string>
#include <vector>

#include "tdlab/config.hpp"
#include "tdlab/friedrichs.hpp"
#include "tdlab/sojourn.hpp"

namespace tdlab {

struct ExtrapolationFit {
  double tau_inf = 0.0;
  double coeff = 0.0;     // tau_r ~ tau_inf + coeff / r
  double residual = 0.0;  // rms misfit over the fitted points
  std::size_t points = 0;
  bool valid = false;
};

// Least-squares fit of tau_r = tau_inf + c/r over the top half of the sweep.
ExtrapolationFit fit_inverse_r(const std::vector<double>& r,
                               const std::vector<double>& tau);

enum class VerdictStatus { pass, fail, indeterminate };

struct Verdict {
  std::string name;
  VerdictStatus status = VerdictStatus::indeterminate;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct ProfileReport {
  double plateau = 0.0;
  double support = 0.0;
  std::vector<SojournLedger> ledgers;
  ExtrapolationFit tau_sym_fit, tau_in_fit;
};

struct DelayReport {
  std::string scenario_id;
  bool degraded = false;
  std::string degraded_reason;

  // stationary references
  double ew_reference = 0.0;
  double tf_spectral = 0.0;
  double tf_phase_space = 0.0;
  double commutator_residual = 0.0;
  double ff_expect = 0.0;  // <phi, F_f(H0') phi>, primary profile

  // dynamics diagnostics
  double prep_residual = 0.0;
  double norm_drift = 0.0;
  DecayRecord decay;

  std::vector<ProfileReport> profiles;  // [0] = primary
  std::vector<Verdict> verdicts;

  std::optional<ResonanceFit> resonance;  // model C with coupling
};

// Full study: stationary references, shared-time-loop sweep, fits, verdicts.
DelayReport convergence_study(const Scenario& scenario);

// Stationary side only (no time propagation).
DelayReport oracle_study(const Scenario& scenario);

Verdict verify_symmetrized(const DelayReport& report, double tol);
Verdict verify_usual(const DelayReport& report, double tol);
Verdict verify_free_formula(const DelayReport& report, double tol);

}  // namespace tdlab
