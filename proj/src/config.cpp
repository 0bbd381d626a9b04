#include "tdlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace tdlab {

namespace {

// ---------------------------------------------------------------------------
// Minimal strict TOML subset: [sections], key = value with numbers, strings,
// booleans and flat numeric arrays. '#' starts a comment.

struct Value {
  enum class Kind { number, string, boolean, array } kind = Kind::number;
  double num = 0.0;
  std::string str;
  bool b = false;
  std::vector<double> arr;
};

using Table = std::map<std::string, std::map<std::string, Value>>;

std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

Value parse_value(const std::string& raw, int line_no) {
  Value v;
  if (raw.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty value");
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"')
      throw ConfigError("line " + std::to_string(line_no) + ": unterminated string");
    v.kind = Value::Kind::string;
    v.str = raw.substr(1, raw.size() - 2);
    return v;
  }
  if (raw == "true" || raw == "false") {
    v.kind = Value::Kind::boolean;
    v.b = raw == "true";
    return v;
  }
  if (raw.front() == '[') {
    if (raw.back() != ']')
      throw ConfigError("line " + std::to_string(line_no) + ": unterminated array");
    v.kind = Value::Kind::array;
    std::string inner = raw.substr(1, raw.size() - 2);
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = strip(item);
      if (item.empty()) continue;
      std::size_t used = 0;
      v.arr.push_back(std::stod(item, &used));
      if (used != item.size())
        throw ConfigError("line " + std::to_string(line_no) + ": bad array element '" +
                          item + "'");
    }
    return v;
  }
  std::size_t used = 0;
  try {
    v.num = std::stod(raw, &used);
  } catch (const std::exception&) {
    throw ConfigError("line " + std::to_string(line_no) + ": bad value '" + raw + "'");
  }
  if (used != raw.size())
    throw ConfigError("line " + std::to_string(line_no) + ": bad value '" + raw + "'");
  v.kind = Value::Kind::number;
  return v;
}

Table parse_table(const std::string& text) {
  Table table;
  std::string section;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = strip(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(line_no) + ": bad section header");
      section = strip(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("line " + std::to_string(line_no) + ": empty section name");
      table[section];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = strip(line.substr(0, eq));
    const std::string raw = strip(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    auto& sect = table[section];
    if (sect.count(key))
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    sect[key] = parse_value(raw, line_no);
  }
  return table;
}

// Typed, consuming accessors; whatever is left in the table afterwards is an
// unknown key and gets rejected.
class SectionReader {
 public:
  SectionReader(Table& t, const std::string& name) : name_(name) {
    auto it = t.find(name);
    if (it != t.end()) sect_ = &it->second;
  }
  bool present() const { return sect_ != nullptr; }

  std::optional<Value> take(const std::string& key) {
    if (!sect_) return std::nullopt;
    auto it = sect_->find(key);
    if (it == sect_->end()) return std::nullopt;
    Value v = it->second;
    sect_->erase(it);
    return v;
  }

  double number(const std::string& key, std::optional<double> def = std::nullopt) {
    auto v = take(key);
    if (!v) {
      if (def) return *def;
      throw ConfigError("[" + name_ + "] missing required key '" + key + "'");
    }
    if (v->kind != Value::Kind::number)
      throw ConfigError("[" + name_ + "] key '" + key + "' must be a number");
    return v->num;
  }

  std::string string(const std::string& key, std::optional<std::string> def = std::nullopt) {
    auto v = take(key);
    if (!v) {
      if (def) return *def;
      throw ConfigError("[" + name_ + "] missing required key '" + key + "'");
    }
    if (v->kind != Value::Kind::string)
      throw ConfigError("[" + name_ + "] key '" + key + "' must be a string");
    return v->str;
  }

  bool boolean(const std::string& key, bool def) {
    auto v = take(key);
    if (!v) return def;
    if (v->kind != Value::Kind::boolean)
      throw ConfigError("[" + name_ + "] key '" + key + "' must be true/false");
    return v->b;
  }

  std::vector<double> array(const std::string& key, bool required) {
    auto v = take(key);
    if (!v) {
      if (required) throw ConfigError("[" + name_ + "] missing required key '" + key + "'");
      return {};
    }
    if (v->kind != Value::Kind::array)
      throw ConfigError("[" + name_ + "] key '" + key + "' must be an array");
    return v->arr;
  }

 private:
  std::string name_;
  std::map<std::string, Value>* sect_ = nullptr;
};

void reject_leftovers(const Table& t, const std::vector<std::string>& known_sections) {
  for (const auto& [sect, kv] : t) {
    if (std::find(known_sections.begin(), known_sections.end(), sect) ==
        known_sections.end())
      throw ConfigError("unknown section [" + sect + "]");
    for (const auto& [key, v] : kv)
      throw ConfigError("unknown key '" + key + "' in section [" + sect + "]");
  }
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  Table table = parse_table(text);

  // schema gate
  {
    SectionReader root(table, "");
    const double schema = root.number("schema");
    if (schema != 1.0) throw ConfigError("unsupported schema (need schema = 1)");
  }

  Scenario s;

  // [model]
  SectionReader model(table, "model");
  if (!model.present()) throw ConfigError("missing [model] section");
  const std::string variant = model.string("variant");
  const auto n = static_cast<std::size_t>(model.number("grid_points"));
  const double extent = model.number("grid_extent");
  if (n < 16 || (n & (n - 1)) != 0)
    throw ConfigError("[model] grid_points must be a power of two >= 16");
  if (!(extent > 0.0)) throw ConfigError("[model] grid_extent must be positive");
  const PositionGrid grid = PositionGrid::centered(n, extent);

  if (variant == "A") {
    SchrodingerParams p;
    const std::string pot = model.string("potential", std::string("none"));
    if (pot == "none") {
      p.potential = PotentialKind::none;
    } else if (pot == "square") {
      p.potential = PotentialKind::square;
      p.v0 = model.number("v0");
      p.barrier_length = model.number("barrier_length");
    } else if (pot == "gaussian") {
      p.potential = PotentialKind::gaussian;
      p.v0 = model.number("v0");
      p.gauss_center = model.number("gauss_center");
      p.gauss_width = model.number("gauss_width");
      p.gauss_support = model.number("gauss_support");
    } else {
      throw ConfigError("[model] potential must be none|square|gaussian");
    }
    s.model = make_schrodinger(grid, p);
  } else if (variant == "B") {
    TwoChannelParams p;
    p.m1 = model.number("m1");
    p.m2 = model.number("m2");
    p.e1 = model.number("e1");
    p.e2 = model.number("e2");
    p.coupling = model.number("coupling");
    p.coupling_length = model.number("coupling_length");
    s.model = make_two_channel(grid, p);
  } else if (variant == "C") {
    FriedrichsParams p;
    p.level = model.number("level");
    p.coupling = model.number("coupling");
    p.coupling_width = model.number("coupling_width");
    s.model = make_friedrichs(grid, p);
  } else {
    throw ConfigError("[model] variant must be A, B or C");
  }

  // [packet]
  SectionReader packet(table, "packet");
  if (!packet.present()) throw ConfigError("missing [packet] section");
  s.packet.center = packet.number("center");
  s.packet.width = packet.number("width");
  s.packet.chirp = packet.number("chirp", 0.0);
  {
    const auto re = packet.array("weights_re", true);
    auto im = packet.array("weights_im", false);
    if (im.empty()) im.assign(re.size(), 0.0);
    if (im.size() != re.size())
      throw ConfigError("[packet] weights_re / weights_im length mismatch");
    if (re.size() != s.model.fiber_dim())
      throw ConfigError("[packet] fiber weights must have " +
                        std::to_string(s.model.fiber_dim()) + " entries");
    for (std::size_t i = 0; i < re.size(); ++i) s.packet.weights.emplace_back(re[i], im[i]);
  }

  // [profile]
  SectionReader profile(table, "profile");
  if (!profile.present()) throw ConfigError("missing [profile] section");
  s.profile.plateau = profile.number("plateau");
  s.profile.support = profile.number("support");
  s.profile.extra_supports = profile.array("extra_supports", false);

  // [sweep]
  SectionReader sweep(table, "sweep");
  if (!sweep.present()) throw ConfigError("missing [sweep] section");
  s.r_list = sweep.array("r", true);
  s.policy.dt = sweep.number("dt");
  s.policy.t_max_factor = sweep.number("t_max_factor", 4.0);
  s.policy.tail_tol = sweep.number("tail_tol", 1e-5);
  s.policy.t_prep = sweep.number("t_prep");
  s.policy.t_post = sweep.number("t_post", 0.0);
  s.ew_step = sweep.number("ew_step", 1e-3);

  // [verdicts]
  SectionReader verdicts(table, "verdicts");
  for (const char* name : {"symmetrized", "usual", "free_formula"}) {
    auto v = verdicts.take(name);
    if (!v) continue;
    if (v->kind != Value::Kind::number || !(v->num > 0.0))
      throw ConfigError("[verdicts] tolerance for '" + std::string(name) +
                        "' must be a positive number");
    s.verdict_tols[name] = v->num;
  }

  // [output]
  SectionReader output(table, "output");
  s.output.directory = output.string("directory", std::string("out"));
  s.output.write_smatrix = output.boolean("write_smatrix", false);

  reject_leftovers(table, {"", "model", "packet", "profile", "sweep", "verdicts", "output"});

  validate_guards(s);

  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(serialize_scenario(s))));
  s.id = buf;
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream os;
  os << "schema = 1\n\n[model]\n";
  const auto& m = s.model;
  switch (m.kind) {
    case ModelKind::schrodinger: {
      os << "variant = \"A\"\n";
      os << "grid_points = " << m.grid.n << "\n";
      os << "grid_extent = " << fmt(m.grid.extent) << "\n";
      const auto& p = m.schrodinger;
      if (p.potential == PotentialKind::none) os << "potential = \"none\"\n";
      if (p.potential == PotentialKind::square)
        os << "potential = \"square\"\nv0 = " << fmt(p.v0)
           << "\nbarrier_length = " << fmt(p.barrier_length) << "\n";
      if (p.potential == PotentialKind::gaussian)
        os << "potential = \"gaussian\"\nv0 = " << fmt(p.v0)
           << "\ngauss_center = " << fmt(p.gauss_center)
           << "\ngauss_width = " << fmt(p.gauss_width)
           << "\ngauss_support = " << fmt(p.gauss_support) << "\n";
      break;
    }
    case ModelKind::two_channel: {
      const auto& p = m.two_channel;
      os << "variant = \"B\"\n";
      os << "grid_points = " << m.grid.n << "\n";
      os << "grid_extent = " << fmt(m.grid.extent) << "\n";
      os << "m1 = " << fmt(p.m1) << "\nm2 = " << fmt(p.m2) << "\ne1 = " << fmt(p.e1)
         << "\ne2 = " << fmt(p.e2) << "\ncoupling = " << fmt(p.coupling)
         << "\ncoupling_length = " << fmt(p.coupling_length) << "\n";
      break;
    }
    case ModelKind::friedrichs: {
      const auto& p = m.friedrichs;
      os << "variant = \"C\"\n";
      os << "grid_points = " << m.grid.n << "\n";
      os << "grid_extent = " << fmt(m.grid.extent) << "\n";
      os << "level = " << fmt(p.level) << "\ncoupling = " << fmt(p.coupling)
         << "\ncoupling_width = " << fmt(p.coupling_width) << "\n";
      break;
    }
  }

  os << "\n[packet]\n";
  os << "center = " << fmt(s.packet.center) << "\nwidth = " << fmt(s.packet.width) << "\n";
  os << "weights_re = [";
  for (std::size_t i = 0; i < s.packet.weights.size(); ++i)
    os << (i ? ", " : "") << fmt(s.packet.weights[i].real());
  os << "]\nweights_im = [";
  for (std::size_t i = 0; i < s.packet.weights.size(); ++i)
    os << (i ? ", " : "") << fmt(s.packet.weights[i].imag());
  os << "]\nchirp = " << fmt(s.packet.chirp) << "\n";

  os << "\n[profile]\n";
  os << "plateau = " << fmt(s.profile.plateau) << "\nsupport = " << fmt(s.profile.support)
     << "\n";
  if (!s.profile.extra_supports.empty()) {
    os << "extra_supports = [";
    for (std::size_t i = 0; i < s.profile.extra_supports.size(); ++i)
      os << (i ? ", " : "") << fmt(s.profile.extra_supports[i]);
    os << "]\n";
  }

  os << "\n[sweep]\nr = [";
  for (std::size_t i = 0; i < s.r_list.size(); ++i) os << (i ? ", " : "") << fmt(s.r_list[i]);
  os << "]\ndt = " << fmt(s.policy.dt) << "\nt_max_factor = " << fmt(s.policy.t_max_factor)
     << "\ntail_tol = " << fmt(s.policy.tail_tol) << "\nt_prep = " << fmt(s.policy.t_prep)
     << "\nt_post = " << fmt(s.policy.t_post) << "\new_step = " << fmt(s.ew_step) << "\n";

  if (!s.verdict_tols.empty()) {
    os << "\n[verdicts]\n";
    for (const auto& [k, v] : s.verdict_tols) os << k << " = " << fmt(v) << "\n";
  }

  os << "\n[output]\ndirectory = \"" << s.output.directory << "\"\n";
  if (s.output.write_smatrix) os << "write_smatrix = true\n";
  return os.str();
}

void set_numeric_field(Scenario& s, const std::string& path, double value) {
  auto& m = s.model;
  if (path == "model.v0") m.schrodinger.v0 = value;
  else if (path == "model.coupling") {
    if (m.kind == ModelKind::two_channel) m.two_channel.coupling = value;
    else if (m.kind == ModelKind::friedrichs) m.friedrichs.coupling = value;
    else throw ConfigError("sweep key 'model.coupling' needs variant B or C");
  }
  else if (path == "model.barrier_length") m.schrodinger.barrier_length = value;
  else if (path == "packet.center") s.packet.center = value;
  else if (path == "packet.width") s.packet.width = value;
  else if (path == "packet.chirp") s.packet.chirp = value;
  else if (path == "profile.plateau") s.profile.plateau = value;
  else if (path == "profile.support") s.profile.support = value;
  else if (path == "sweep.dt") s.policy.dt = value;
  else if (path == "sweep.t_prep") s.policy.t_prep = value;
  else if (path == "sweep.t_max_factor") s.policy.t_max_factor = value;
  else if (path == "sweep.tail_tol") s.policy.tail_tol = value;
  else throw ConfigError("unknown sweep key path '" + path + "'");
  validate_guards(s);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(serialize_scenario(s))));
  s.id = buf;
}

void validate_guards(const Scenario& s) {
  const auto& m = s.model;
  const auto& g = m.grid;

  if (!(s.packet.width > 0.0)) throw ConfigError("[packet] width must be positive");
  if (s.r_list.empty()) throw ConfigError("[sweep] r list must not be empty");
  for (double r : s.r_list)
    if (!(r > 0.0)) throw ConfigError("[sweep] r values must be positive");
  if (!std::is_sorted(s.r_list.begin(), s.r_list.end()))
    throw ConfigError("[sweep] r values must be ascending");
  if (!(s.policy.dt > 0.0)) throw ConfigError("[sweep] dt must be positive");
  if (!(s.policy.t_prep > 0.0)) throw ConfigError("[sweep] t_prep must be positive");
  if (!(s.policy.t_max_factor > 0.0))
    throw ConfigError("[sweep] t_max_factor must be positive");
  if (!(s.profile.plateau > 0.0) || !(s.profile.support > s.profile.plateau))
    throw ConfigError("[profile] needs 0 < plateau < support");
  for (double b : s.profile.extra_supports)
    if (!(b > s.profile.plateau))
      throw ConfigError("[profile] extra_supports must exceed the plateau");

  const double lam_lo = s.packet.center - 4.0 * s.packet.width;
  const double lam_hi = s.packet.center + 4.0 * s.packet.width;

  // kappa margin
  for (double kv : m.kappa())
    if (kv >= lam_lo - 1e-12 && kv <= lam_hi + 1e-12)
      throw ConfigError("[packet] envelope support touches kappa(H0) at " +
                        std::to_string(kv));
  if (m.kind != ModelKind::friedrichs && lam_lo <= m.all_open_threshold())
    throw ConfigError("[packet] envelope support must stay above all thresholds");

  double b_max = s.profile.support;
  for (double b : s.profile.extra_supports) b_max = std::max(b_max, b);
  const double r_max = s.r_list.back();

  if (m.kind == ModelKind::friedrichs) {
    // Phi = P: localisation and ballistic flight live on the momentum grid.
    const double t_max = s.policy.t_max_factor * r_max;  // |H0'| = 1
    const double sigma_p = 1.0 / s.packet.width;
    const double need = t_max + b_max * r_max + 10.0 * sigma_p;
    if (g.k_max() < need)
      throw ConfigError("momentum grid too small: k_max = " + std::to_string(g.k_max()) +
                        " < v_max*T_max + b*r_max + 10 sigma = " + std::to_string(need));
    const double pad = 2.0 * g.dx();
    if (lam_lo < g.x0 + pad || lam_hi > g.x0 + g.extent - pad)
      throw ConfigError("[packet] envelope support exceeds the energy grid");
    return;
  }

  // A/B position-grid sizing
  double v_min = std::numeric_limits<double>::infinity(), v_max = 0.0;
  for (std::size_t c = 0; c < m.fiber_dim(); ++c)
    for (double lam : {lam_lo, lam_hi}) {
      const double v = std::abs(m.fiber_velocity(c, lam));
      v_min = std::min(v_min, v);
      v_max = std::max(v_max, v);
    }
  const double t_max = s.policy.t_max_factor * r_max / v_min;
  double sigma_x = v_max / (2.0 * s.packet.width);  // group-velocity / spectral width
  const double need = v_max * t_max + b_max * r_max + 10.0 * sigma_x;
  if (0.5 * g.extent < 0.5 * need)
    throw ConfigError("position grid too small: extent " + std::to_string(g.extent) +
                      " < v_max*T_max + b*r_max + 10 sigma = " + std::to_string(need));

  // momentum resolution
  double k_need = 0.0;
  for (std::size_t ch = 0; ch < m.channel_count(); ++ch)
    k_need = std::max(k_need, m.k_of_lambda(static_cast<int>(ch), lam_hi));
  if (g.k_max() < 1.3 * k_need)
    throw ConfigError("momentum grid too coarse: k_max = " + std::to_string(g.k_max()) +
                      " < 1.3 * k(support_hi) = " + std::to_string(1.3 * k_need));

  // split-step stability
  if (m.kind == ModelKind::schrodinger &&
      m.schrodinger.potential != PotentialKind::none &&
      s.policy.dt * std::abs(m.schrodinger.v0) >= 0.1)
    throw ConfigError("[sweep] dt * max|V| must stay below 0.1");
  if (m.kind == ModelKind::two_channel &&
      s.policy.dt * std::abs(m.two_channel.coupling) >= 0.1)
    throw ConfigError("[sweep] dt * |g| must stay below 0.1");
}

std::vector<LocalisationProfile> scenario_profiles(const Scenario& s) {
  std::vector<LocalisationProfile> out;
  out.push_back(make_profile(s.profile.plateau, s.profile.support, 1));
  for (double b : s.profile.extra_supports)
    out.push_back(make_profile(s.profile.plateau, b, 1));
  return out;
}

SpectralPacket scenario_packet(const Scenario& s) {
  return make_packet(s.model, s.packet.center, s.packet.width, s.packet.weights,
                     s.packet.chirp);
}

}  // namespace tdlab
