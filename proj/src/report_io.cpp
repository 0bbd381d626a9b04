#include "tdlab/report_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace tdlab {

namespace {

std::vector<double> interleave(const std::vector<cplx>& z) {
  std::vector<double> out;
  out.reserve(2 * z.size());
  for (const cplx& c : z) {
    out.push_back(c.real());
    out.push_back(c.imag());
  }
  return out;
}

std::vector<cplx> deinterleave(const std::vector<double>& d) {
  if (d.size() % 2 != 0)
    throw std::invalid_argument("deinterleave: odd re/im array length");
  std::vector<cplx> out(d.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = cplx(d[2 * i], d[2 * i + 1]);
  return out;
}

const char* status_name(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::pass: return "pass";
    case VerdictStatus::fail: return "fail";
    case VerdictStatus::indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

VerdictStatus status_from(const std::string& s) {
  if (s == "pass") return VerdictStatus::pass;
  if (s == "fail") return VerdictStatus::fail;
  return VerdictStatus::indeterminate;
}

std::string fmt17(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

ordered_json ledger_to_json(const SojournLedger& l) {
  ordered_json j;
  j["r"] = l.r;
  j["T_r0_phi"] = l.T_r0_phi;
  j["T_r0_Sphi"] = l.T_r0_Sphi;
  j["T_r1"] = l.T_r1;
  j["T_2"] = l.T_2;
  j["tau_sym"] = l.tau_sym;
  j["tau_in"] = l.tau_in;
  j["tau_free_ref"] = l.tau_free_ref;
  j["theorem34"] = l.theorem34;
  j["sojourn_diff"] = l.sojourn_diff;
  j["tau_sym_from_pieces"] = l.tau_sym_from_pieces;
  j["t_max"] = l.t_max;
  j["tail_max"] = l.tail_max;
  j["tail_ok"] = l.tail_ok;
  return j;
}

SojournLedger ledger_from_json(const ordered_json& j) {
  SojournLedger l;
  l.r = j.at("r");
  l.T_r0_phi = j.at("T_r0_phi");
  l.T_r0_Sphi = j.at("T_r0_Sphi");
  l.T_r1 = j.at("T_r1");
  l.T_2 = j.at("T_2");
  l.tau_sym = j.at("tau_sym");
  l.tau_in = j.at("tau_in");
  l.tau_free_ref = j.at("tau_free_ref");
  l.theorem34 = j.at("theorem34");
  l.sojourn_diff = j.at("sojourn_diff");
  l.tau_sym_from_pieces = j.at("tau_sym_from_pieces");
  l.t_max = j.at("t_max");
  l.tail_max = j.at("tail_max");
  l.tail_ok = j.at("tail_ok");
  return l;
}

ordered_json fit_to_json(const ExtrapolationFit& f) {
  ordered_json j;
  j["tau_inf"] = f.tau_inf;
  j["coeff"] = f.coeff;
  j["residual"] = f.residual;
  j["points"] = f.points;
  j["valid"] = f.valid;
  return j;
}

ExtrapolationFit fit_from_json(const ordered_json& j) {
  ExtrapolationFit f;
  f.tau_inf = j.at("tau_inf");
  f.coeff = j.at("coeff");
  f.residual = j.at("residual");
  f.points = j.at("points");
  f.valid = j.at("valid");
  return f;
}

}  // namespace

ordered_json packet_to_json(const SpectralPacket& p) {
  ordered_json j;
  j["grid"] = p.lambda;
  j["weight"] = p.weight;
  j["fiber_dim"] = p.fiber_dim;
  j["amplitudes_re_im"] = interleave(p.amp);
  j["support"] = {p.support_lo, p.support_hi};
  j["kappa_margin"] = p.kappa_margin;
  return j;
}

SpectralPacket packet_from_json(const ordered_json& j) {
  SpectralPacket p;
  p.lambda = j.at("grid").get<std::vector<double>>();
  p.weight = j.at("weight").get<std::vector<double>>();
  p.fiber_dim = j.at("fiber_dim");
  p.amp = deinterleave(j.at("amplitudes_re_im").get<std::vector<double>>());
  p.support_lo = j.at("support").at(0);
  p.support_hi = j.at("support").at(1);
  p.kappa_margin = j.at("kappa_margin");
  if (p.amp.size() != p.lambda.size() * p.fiber_dim)
    throw std::invalid_argument("packet_from_json: amplitude array size mismatch");
  return p;
}

ordered_json smatrix_to_json(const FiberSMatrix& s) {
  ordered_json j;
  j["grid"] = s.lambda;
  j["fiber_dim"] = s.dim;
  j["entries_re_im"] = interleave(s.entries);
  return j;
}

FiberSMatrix smatrix_from_json(const ordered_json& j) {
  FiberSMatrix s;
  s.lambda = j.at("grid").get<std::vector<double>>();
  s.dim = j.at("fiber_dim");
  s.entries = deinterleave(j.at("entries_re_im").get<std::vector<double>>());
  if (s.entries.size() != s.lambda.size() * s.dim * s.dim)
    throw std::invalid_argument("smatrix_from_json: entry array size mismatch");
  return s;
}

ordered_json report_to_json(const DelayReport& rep) {
  ordered_json j;
  j["scenario_id"] = rep.scenario_id;
  j["degraded"] = rep.degraded;
  j["degraded_reason"] = rep.degraded_reason;

  ordered_json refs;
  refs["ew_reference"] = rep.ew_reference;
  refs["tf_spectral"] = rep.tf_spectral;
  refs["tf_phase_space"] = rep.tf_phase_space;
  refs["commutator_residual"] = rep.commutator_residual;
  refs["ff_expectation"] = rep.ff_expect;
  j["references"] = refs;

  ordered_json diag;
  diag["prep_doubling_residual"] = rep.prep_residual;
  diag["norm_drift_per_time"] = rep.norm_drift;
  diag["decay_exponent_neg"] = rep.decay.exponent_neg;
  diag["decay_exponent_pos"] = rep.decay.exponent_pos;
  diag["decay_tail_sum_neg"] = rep.decay.tail_sum_neg;
  diag["decay_tail_sum_pos"] = rep.decay.tail_sum_pos;
  diag["decay_integrable"] = rep.decay.integrable;
  j["diagnostics"] = diag;

  if (rep.resonance) {
    ordered_json res;
    res["lambda_res"] = rep.resonance->lambda_res;
    res["gamma_half"] = rep.resonance->gamma_half;
    j["resonance"] = res;
  }

  j["profiles"] = ordered_json::array();
  for (const auto& pr : rep.profiles) {
    ordered_json p;
    p["plateau"] = pr.plateau;
    p["support"] = pr.support;
    p["ledgers"] = ordered_json::array();
    for (const auto& l : pr.ledgers) p["ledgers"].push_back(ledger_to_json(l));
    p["tau_sym_fit"] = fit_to_json(pr.tau_sym_fit);
    p["tau_in_fit"] = fit_to_json(pr.tau_in_fit);
    j["profiles"].push_back(std::move(p));
  }

  j["verdicts"] = ordered_json::array();
  for (const auto& v : rep.verdicts) {
    ordered_json jv;
    jv["name"] = v.name;
    jv["status"] = status_name(v.status);
    jv["measured"] = v.measured;
    jv["tolerance"] = v.tolerance;
    jv["detail"] = v.detail;
    j["verdicts"].push_back(std::move(jv));
  }
  return j;
}

DelayReport report_from_json(const ordered_json& j) {
  DelayReport rep;
  rep.scenario_id = j.at("scenario_id");
  rep.degraded = j.at("degraded");
  rep.degraded_reason = j.at("degraded_reason");
  const auto& refs = j.at("references");
  rep.ew_reference = refs.at("ew_reference");
  rep.tf_spectral = refs.at("tf_spectral");
  rep.tf_phase_space = refs.at("tf_phase_space");
  rep.commutator_residual = refs.at("commutator_residual");
  rep.ff_expect = refs.at("ff_expectation");
  if (j.contains("resonance")) {
    ResonanceFit f;
    f.lambda_res = j.at("resonance").at("lambda_res");
    f.gamma_half = j.at("resonance").at("gamma_half");
    rep.resonance = f;
  }
  for (const auto& p : j.at("profiles")) {
    ProfileReport pr;
    pr.plateau = p.at("plateau");
    pr.support = p.at("support");
    for (const auto& l : p.at("ledgers")) pr.ledgers.push_back(ledger_from_json(l));
    pr.tau_sym_fit = fit_from_json(p.at("tau_sym_fit"));
    pr.tau_in_fit = fit_from_json(p.at("tau_in_fit"));
    rep.profiles.push_back(std::move(pr));
  }
  for (const auto& jv : j.at("verdicts")) {
    Verdict v;
    v.name = jv.at("name");
    v.status = status_from(jv.at("status"));
    v.measured = jv.at("measured");
    v.tolerance = jv.at("tolerance");
    v.detail = jv.at("detail");
    rep.verdicts.push_back(std::move(v));
  }
  return rep;
}

std::string summary_csv(const DelayReport& rep) {
  std::ostringstream os;
  os << "r,T_r0_phi,T_r0_Sphi,T_r1,T_2,tau_sym,tau_in,tau_free_ref,tail_ok\n";
  if (rep.profiles.empty()) return os.str();
  for (const auto& l : rep.profiles[0].ledgers) {
    os << fmt17(l.r) << ',' << fmt17(l.T_r0_phi) << ',' << fmt17(l.T_r0_Sphi) << ','
       << fmt17(l.T_r1) << ',' << fmt17(l.T_2) << ',' << fmt17(l.tau_sym) << ','
       << fmt17(l.tau_in) << ',' << fmt17(l.tau_free_ref) << ','
       << (l.tail_ok ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string convergence_dat(const DelayReport& rep) {
  std::ostringstream os;
  os << "# r tau_sym tau_in tau_free_ref theorem34 ew_reference\n";
  if (rep.profiles.empty()) return os.str();
  for (const auto& l : rep.profiles[0].ledgers) {
    os << fmt17(l.r) << ' ' << fmt17(l.tau_sym) << ' ' << fmt17(l.tau_in) << ' '
       << fmt17(l.tau_free_ref) << ' ' << fmt17(l.theorem34) << ' '
       << fmt17(rep.ew_reference) << '\n';
  }
  return os.str();
}

void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("atomic_write: cannot open " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("atomic_write: write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

void write_report_files(const DelayReport& report, const std::string& dir) {
  atomic_write(dir + "/report.json", report_to_json(report).dump(2) + "\n");
  atomic_write(dir + "/summary.csv", summary_csv(report));
  atomic_write(dir + "/convergence.dat", convergence_dat(report));
}

void write_oracle_files(const DelayReport& report, const std::string& dir) {
  ordered_json j = report_to_json(report);
  j.erase("profiles");
  j.erase("diagnostics");
  j.erase("verdicts");
  atomic_write(dir + "/oracle.json", j.dump(2) + "\n");
}

}  // namespace tdlab
