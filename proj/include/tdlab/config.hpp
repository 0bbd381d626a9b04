#pragma once

// Scenario configuration: a strict TOML-subset file with named blocks.
// Unknown sections or keys are rejected, every grid-sizing guard runs at
// load time, and `schema = 1` is required.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tdlab/models.hpp"
#include "tdlab/sojourn.hpp"

namespace tdlab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PacketConfig {
  double center = 0.0;
  double width = 0.0;
  std::vector<cplx> weights;
  double chirp = 0.0;
};

struct ProfileConfig {
  double plateau = 1.0;
  double support = 2.0;
  std::vector<double> extra_supports;  // same plateau, varied support
};

struct OutputConfig {
  std::string directory = "out";
  bool write_smatrix = false;
};

struct Scenario {
  std::string id;  // digest of the canonical form, stable across reruns
  ModelSpec model;
  PacketConfig packet;
  ProfileConfig profile;
  std::vector<double> r_list;
  TimeIntegrationPolicy policy;
  double ew_step = 1e-3;
  std::map<std::string, double> verdict_tols;  // symmetrized / usual / free_formula
  OutputConfig output;
};

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

// Canonical text form; parse(serialize(s)) == s (idempotent reserialization).
std::string serialize_scenario(const Scenario& s);

// Numeric field access for the sweep subcommand ("profile.support", ...).
// Throws ConfigError for unknown paths.
void set_numeric_field(Scenario& s, const std::string& path, double value);

// All grid-sizing and stability guards; throws ConfigError naming the guard.
void validate_guards(const Scenario& s);

std::vector<LocalisationProfile> scenario_profiles(const Scenario& s);
SpectralPacket scenario_packet(const Scenario& s);

}  // namespace tdlab
