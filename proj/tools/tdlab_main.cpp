// tdlab: declarative scenario runner for time-delay scattering studies.
//
//   tdlab run scenario.toml [--out DIR] [--jobs N]
//   tdlab oracle scenario.toml [--out DIR]
//   tdlab sweep scenario.toml --key sweep.dt --values 0.04,0.02,0.01 [--jobs N]
//   tdlab validate scenario.toml
//
// Exit codes: 0 all requested verdicts pass, 2 some verdict indeterminate,
// 1 failure (validation error, failed verdict, or runtime error).

#include <CLI11.hpp>

#include <atomic>
#include <iostream>
#include <sstream>
#include <thread>

#include "tdlab/config.hpp"
#include "tdlab/delay.hpp"
#include "tdlab/kernels.hpp"
#include "tdlab/report_io.hpp"

namespace {

using namespace tdlab;

int exit_code_from_verdicts(const DelayReport& rep) {
  bool any_fail = false, any_indet = false;
  for (const auto& v : rep.verdicts) {
    if (v.status == VerdictStatus::fail) any_fail = true;
    if (v.status == VerdictStatus::indeterminate) any_indet = true;
  }
  if (any_fail) return 1;
  if (any_indet) return 2;
  return 0;
}

void print_verdicts(const DelayReport& rep) {
  for (const auto& v : rep.verdicts) {
    const char* s = v.status == VerdictStatus::pass
                        ? "PASS"
                        : (v.status == VerdictStatus::fail ? "FAIL" : "INDET");
    std::cout << "[" << s << "] " << v.name << " (measured " << v.measured
              << ", tol " << v.tolerance << "): " << v.detail << "\n";
  }
}

std::string fmt_value(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

int run_cmd(const std::string& path, const std::string& out_override) {
  Scenario scenario = load_scenario(path);
  if (!out_override.empty()) scenario.output.directory = out_override;
  const DelayReport rep = convergence_study(scenario);
  write_report_files(rep, scenario.output.directory);
  if (scenario.output.write_smatrix) {
    const SpectralPacket packet = scenario_packet(scenario);
    const FiberSMatrix smat = stationary_smatrix(scenario.model, packet.lambda);
    atomic_write(scenario.output.directory + "/smatrix.json",
                 smatrix_to_json(smat).dump(2) + "\n");
  }
  print_verdicts(rep);
  std::cout << "report written to " << scenario.output.directory << " (scenario "
            << rep.scenario_id << ", kernels " << kernels::backend_name() << ")\n";
  return exit_code_from_verdicts(rep);
}

int oracle_cmd(const std::string& path, const std::string& out_override) {
  Scenario scenario = load_scenario(path);
  if (!out_override.empty()) scenario.output.directory = out_override;
  const DelayReport rep = oracle_study(scenario);
  write_oracle_files(rep, scenario.output.directory);
  if (scenario.output.write_smatrix) {
    const SpectralPacket packet = scenario_packet(scenario);
    const FiberSMatrix smat = stationary_smatrix(scenario.model, packet.lambda);
    atomic_write(scenario.output.directory + "/smatrix.json",
                 smatrix_to_json(smat).dump(2) + "\n");
  }
  std::cout << "oracle written to " << scenario.output.directory
            << " (EW = " << rep.ew_reference
            << ", commutator residual = " << rep.commutator_residual << ")\n";
  return 0;
}

int sweep_cmd(const std::string& path, const std::string& key,
              const std::vector<double>& values, const std::string& out_override,
              unsigned jobs) {
  if (values.empty()) {
    std::cerr << "sweep: empty value list\n";
    return 1;
  }
  Scenario base = load_scenario(path);
  if (!out_override.empty()) base.output.directory = out_override;

  struct Entry {
    double value = 0.0;
    DelayReport rep;
    std::string error;
  };
  std::vector<Entry> entries(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) entries[i].value = values[i];

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= entries.size()) return;
      try {
        Scenario s = base;
        set_numeric_field(s, key, entries[i].value);
        s.output.directory =
            base.output.directory + "/sweep_" + fmt_value(entries[i].value);
        entries[i].rep = convergence_study(s);
        write_report_files(entries[i].rep, s.output.directory);
      } catch (const std::exception& e) {
        entries[i].error = e.what();
      }
    }
  };
  const unsigned nthreads = std::max(1u, std::min<unsigned>(jobs, entries.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::ostringstream csv;
  csv << "key,value,scenario_id,ew_reference,tau_sym_extrap,tau_in_extrap,"
         "sym_fit_residual,in_fit_residual,commutator_residual,degraded,error\n";
  int rc = 0;
  for (const auto& e : entries) {
    if (!e.error.empty()) {
      csv << key << ',' << fmt_value(e.value) << ",,,,,,,,," << '"' << e.error << '"'
          << '\n';
      rc = 1;
      continue;
    }
    const auto& pr = e.rep.profiles.at(0);
    csv << key << ',' << fmt_value(e.value) << ',' << e.rep.scenario_id << ','
        << e.rep.ew_reference << ',' << pr.tau_sym_fit.tau_inf << ','
        << pr.tau_in_fit.tau_inf << ',' << pr.tau_sym_fit.residual << ','
        << pr.tau_in_fit.residual << ',' << e.rep.commutator_residual << ','
        << (e.rep.degraded ? 1 : 0) << ",\n";
    rc = std::max(rc, exit_code_from_verdicts(e.rep));
  }
  atomic_write(base.output.directory + "/sweep.csv", csv.str());
  std::cout << "sweep written to " << base.output.directory << "/sweep.csv\n";
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tdlab: sojourn-time vs Eisenbud-Wigner time-delay laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir, sweep_key, values_csv;
  unsigned jobs = 1;
  unsigned seed = 0;  // reserved; all computations are deterministic

  auto add_common = [&](CLI::App* sub, bool with_jobs) {
    sub->add_option("config", config_path, "scenario configuration file")->required();
    sub->add_option("--out", out_dir, "override the output directory");
    if (with_jobs) sub->add_option("--jobs", jobs, "parallel jobs");
    sub->add_option("--seed", seed, "reserved (unused in v1)");
  };

  CLI::App* run = app.add_subcommand("run", "run a scenario and emit reports");
  add_common(run, true);
  CLI::App* oracle =
      app.add_subcommand("oracle", "stationary references only (no propagation)");
  add_common(oracle, false);
  CLI::App* sweep = app.add_subcommand("sweep", "run a scenario per parameter value");
  add_common(sweep, true);
  sweep->add_option("--key", sweep_key, "numeric config path, e.g. profile.support")
      ->required();
  sweep->add_option("--values", values_csv, "comma-separated values")->required();
  CLI::App* validate =
      app.add_subcommand("validate", "parse the scenario and run all guards");
  validate->add_option("config", config_path, "scenario configuration file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(validate)) {
      Scenario s = load_scenario(config_path);
      std::cout << "OK scenario " << s.id << "\n";
      return 0;
    }
    if (app.got_subcommand(run)) return run_cmd(config_path, out_dir);
    if (app.got_subcommand(oracle)) return oracle_cmd(config_path, out_dir);
    if (app.got_subcommand(sweep)) {
      std::vector<double> values;
      std::stringstream ss(values_csv);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (!item.empty()) values.push_back(std::stod(item));
      }
      return sweep_cmd(config_path, sweep_key, values, out_dir, jobs);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
