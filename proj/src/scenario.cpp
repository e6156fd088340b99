#include "qflow/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "qflow/errors.hpp"

namespace qflow {

namespace {

using Section = std::map<std::string, std::string>;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::map<std::string, Section> parse_ini(const std::string& text) {
  std::map<std::string, Section> out;
  std::istringstream in(text);
  std::string line, section;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        fail(errc::config, "config line " + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      out[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(errc::config, "config line " + std::to_string(lineno) + ": expected key = value");
    if (section.empty())
      fail(errc::config, "config line " + std::to_string(lineno) + ": key outside any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      fail(errc::config, "config line " + std::to_string(lineno) + ": empty key or value");
    if (out[section].count(key))
      fail(errc::config, "config: duplicate key '" + key + "' in [" + section + "]");
    out[section][key] = value;
  }
  return out;
}

/// Tracks consumption so leftovers can be reported as unknown keys.
struct SectionReader {
  const std::string name;
  Section entries;

  bool has(const std::string& key) const { return entries.count(key) != 0; }

  std::string take(const std::string& key, const std::string& fallback) {
    auto it = entries.find(key);
    if (it == entries.end()) return fallback;
    std::string v = it->second;
    entries.erase(it);
    return v;
  }

  double take_double(const std::string& key, double fallback) {
    auto it = entries.find(key);
    if (it == entries.end()) return fallback;
    std::size_t pos = 0;
    double v = 0;
    try {
      v = std::stod(it->second, &pos);
    } catch (const std::exception&) {
      fail(errc::config, "config: key '" + key + "' in [" + name + "] is not a number");
    }
    if (pos != it->second.size())
      fail(errc::config, "config: key '" + key + "' in [" + name + "] is not a number");
    entries.erase(it);
    return v;
  }

  long take_long(const std::string& key, long fallback) {
    const double v = take_double(key, double(fallback));
    if (v != std::floor(v)) fail(errc::config, "config: key '" + key + "' must be an integer");
    return long(v);
  }

  void finish() const {
    if (!entries.empty())
      fail(errc::config, "config: unknown key '" + entries.begin()->first + "' in [" + name + "]");
  }
};

const std::map<std::string, std::string>& preset_table() {
  static const std::map<std::string, std::string> presets = {
      {"free_gaussian", R"ini(
[scenario]
name = free_gaussian

[grid]
x_min = -16
x_max = 16
n = 2048

[constants]
hbar = 1
mass = 1

[potential]
type = free

[initial]
type = gaussian
x0 = -4
sigma = 1
k0 = 1

[evolution]
dt = 1e-3
n_steps = 1000
store_every = 10

[trajectories]
n = 10000
seed = 42

[checks]
norm_drift = 1e-10
energy_drift = 1e-6
branch_cancellation = 1e-12
continuity = 1e-3
identity = 3e-3
madelung = 1e-3
classical_hj_plus = 1e-3
classical_hj_minus = 1e-3
equivariance = 0.03
)ini"},
      {"harmonic_coherent", R"ini(
[scenario]
name = harmonic_coherent

[grid]
x_min = -12
x_max = 12
n = 2048

[constants]
hbar = 1
mass = 1

[potential]
type = harmonic
omega = 1

[initial]
type = coherent
x0 = 2

[evolution]
dt = 1e-3
n_steps = 6284
store_every = 4

[trajectories]
n = 10000
seed = 42

[checks]
norm_drift = 1e-10
energy_drift = 1e-6
branch_cancellation = 1e-12
continuity = 1e-3
identity = 3e-3
madelung = 1e-3
classical_hj_plus = 1e-3
classical_hj_minus = 1e-3
equivariance = 0.03
)ini"},
      {"barrier_scatter", R"ini(
[scenario]
name = barrier_scatter

[grid]
x_min = -14
x_max = 18
n = 4096

[constants]
hbar = 1
mass = 1

[potential]
type = barrier
height = 1
center = 0
width = 1

[initial]
type = gaussian
x0 = -6
sigma = 1
k0 = 2

[evolution]
dt = 1e-3
n_steps = 5000
store_every = 50

[trajectories]
n = 10000
seed = 42

# Scattering interference steepens the fields mid-run; thresholds are
# calibrated to this scenario with ~3x margin.
[checks]
norm_drift = 1e-10
energy_drift = 1e-6
branch_cancellation = 1e-12
continuity = 3e-2
identity = 1e-3
madelung = 5e-1
classical_hj_plus = 2e-3
classical_hj_minus = 2e-3
equivariance = 0.03
)ini"},
      {"double_slit", R"ini(
[scenario]
name = double_slit

[grid]
x_min = -16
x_max = 16
n = 2048

[constants]
hbar = 1
mass = 1

[potential]
type = free

[initial]
type = double_slit
separation = 2
slit_width = 0.25
k0 = 0

[evolution]
dt = 1e-3
n_steps = 1000
store_every = 10

[trajectories]
n = 10000
seed = 42

# Fringe minima are near-singular for the pointwise residuals; thresholds
# are calibrated to this scenario with ~3x margin.
[checks]
norm_drift = 1e-10
energy_drift = 1e-6
branch_cancellation = 1e-12
continuity = 2e-2
identity = 5e-3
madelung = 1e-2
classical_hj_plus = 1e-2
classical_hj_minus = 1e-2
equivariance = 0.03
)ini"},
  };
  return presets;
}

}  // namespace

const std::vector<CheckSpec>& default_checks() {
  static const std::vector<CheckSpec> checks = {
      {"norm_drift", 1e-10},        {"energy_drift", 1e-6},
      {"branch_cancellation", 1e-12}, {"continuity", 1e-3},
      {"identity", 1e-2},           {"madelung", 1e-3},
      {"classical_hj_plus", 1e-3},  {"classical_hj_minus", 1e-3},
      {"equivariance", 0.03},
  };
  return checks;
}

Scenario parse_config(const std::string& text) {
  auto sections = parse_ini(text);
  static const std::vector<std::string> known = {"scenario",   "grid",       "constants",
                                                 "potential",  "initial",    "evolution",
                                                 "trajectories", "deviation", "checks"};
  for (const auto& [name, _] : sections)
    if (std::find(known.begin(), known.end(), name) == known.end())
      fail(errc::config, "config: unknown section [" + name + "]");

  auto reader = [&](const std::string& name) {
    auto it = sections.find(name);
    return SectionReader{name, it == sections.end() ? Section{} : it->second};
  };

  Scenario s;

  {
    auto r = reader("scenario");
    s.name = r.take("name", "scenario");
    r.finish();
  }
  {
    auto r = reader("grid");
    const double lo = r.take_double("x_min", -16.0);
    const double hi = r.take_double("x_max", 16.0);
    const long n = r.take_long("n", 2048);
    r.finish();
    s.grid = Grid1D(lo, hi, n);  // enforces ordering and minimum size
  }
  {
    auto r = reader("constants");
    s.constants.hbar = r.take_double("hbar", 1.0);
    s.constants.mass = r.take_double("mass", 1.0);
    r.finish();
    validate(s.constants);
  }
  {
    auto r = reader("potential");
    const std::string type = r.take("type", "free");
    if (type == "free") {
      s.potential = Free{};
    } else if (type == "harmonic") {
      s.potential = Harmonic{r.take_double("omega", 1.0)};
    } else if (type == "barrier") {
      s.potential = Barrier{r.take_double("height", 1.0), r.take_double("center", 0.0),
                            r.take_double("width", 1.0)};
    } else {
      fail(errc::config, "config: unknown potential type '" + type + "'");
    }
    r.finish();
    validate(s.potential);
  }
  {
    auto r = reader("initial");
    const std::string type = r.take("type", "gaussian");
    if (type == "gaussian") {
      s.initial = GaussianInit{r.take_double("x0", 0.0), r.take_double("sigma", 1.0),
                               r.take_double("k0", 0.0)};
    } else if (type == "coherent") {
      s.initial = CoherentInit{r.take_double("x0", 1.0)};
    } else if (type == "double_slit") {
      s.initial = DoubleSlitInit{r.take_double("separation", 2.0),
                                 r.take_double("slit_width", 0.25), r.take_double("k0", 0.0)};
    } else {
      fail(errc::config, "config: unknown initial wave type '" + type + "'");
    }
    r.finish();
  }
  {
    auto r = reader("evolution");
    s.evolution.dt = r.take_double("dt", 1e-3);
    s.evolution.n_steps = r.take_long("n_steps", 1000);
    s.evolution.store_every = r.take_long("store_every", 0);
    r.finish();
  }
  {
    auto r = reader("trajectories");
    s.trajectories.n = r.take_long("n", 0);
    s.trajectories.seed = std::uint64_t(r.take_long("seed", 1));
    s.trajectories.export_stride = r.take_long("export_stride", 10);
    r.finish();
  }
  {
    auto r = reader("deviation");
    if (!r.entries.empty()) {
      s.deviation.enabled = true;
      s.deviation.segment_dt = r.take_double("segment_dt", 0.1);
      s.deviation.n_segments = r.take_long("n_segments", 4);
      r.finish();
    }
  }
  {
    auto it = sections.find("checks");
    if (it != sections.end()) {
      for (const auto& [key, value] : it->second) {
        bool known_check = false;
        for (const auto& d : default_checks()) known_check |= d.name == key;
        if (!known_check) fail(errc::config, "config: unknown check '" + key + "'");
        std::size_t pos = 0;
        double threshold = 0;
        try {
          threshold = std::stod(value, &pos);
        } catch (const std::exception&) {
          fail(errc::config, "config: check '" + key + "' threshold is not a number");
        }
        if (pos != value.size() || !(threshold > 0.0))
          fail(errc::config, "config: check '" + key + "' threshold must be positive");
        s.checks.push_back({key, threshold});
      }
    }
  }

  return finalize_scenario(std::move(s));
}

Scenario finalize_scenario(Scenario s) {
  validate(s.constants);
  validate(s.potential);
  if (!(s.evolution.dt > 0.0)) fail(errc::config, "evolution: dt must be positive");
  if (s.evolution.n_steps < 1) fail(errc::config, "evolution: n_steps must be at least 1");
  if (s.evolution.store_every < 1)
    s.evolution.store_every = std::max(1L, (s.evolution.n_steps + 1999L) / 2000L);

  if (std::holds_alternative<CoherentInit>(s.initial) &&
      !std::holds_alternative<Harmonic>(s.potential))
    fail(errc::config, "initial: coherent packet requires a harmonic potential");
  if (const auto* gi = std::get_if<GaussianInit>(&s.initial)) {
    if (!(gi->sigma > 0.0)) fail(errc::config, "initial: sigma must be positive");
  }
  if (const auto* ds = std::get_if<DoubleSlitInit>(&s.initial)) {
    if (!(ds->separation > 0.0) || !(ds->slit_width > 0.0))
      fail(errc::config, "initial: separation and slit_width must be positive");
  }
  if (s.trajectories.n < 0) fail(errc::config, "trajectories: n must be non-negative");
  if (s.trajectories.export_stride < 1)
    fail(errc::config, "trajectories: export_stride must be at least 1");
  if (s.deviation.enabled) {
    if (!(s.deviation.segment_dt > 0.0) || s.deviation.n_segments < 1)
      fail(errc::config, "deviation: segment_dt must be positive and n_segments >= 1");
  }
  if (s.checks.empty()) s.checks = default_checks();

  // Domain-size guard: the initial packet must be negligible at the walls.
  const WaveField w0 = build_initial_wave(s);
  double rho_max = 0.0;
  for (const auto& a : w0.psi) rho_max = std::max(rho_max, std::norm(a));
  const double edge = std::max(std::norm(w0.psi.front()), std::norm(w0.psi.back()));
  if (edge > 1e-10 * rho_max)
    fail(errc::config,
         "scenario: boundary density exceeds 1e-10 of the maximum (domain too small)");
  return s;
}

WaveField build_initial_wave(const Scenario& s) {
  if (const auto* gi = std::get_if<GaussianInit>(&s.initial))
    return gaussian_packet(s.grid, s.constants, gi->x0, gi->sigma, gi->k0);
  if (const auto* ci = std::get_if<CoherentInit>(&s.initial)) {
    const auto& h = std::get<Harmonic>(s.potential);
    return coherent_packet(s.grid, s.constants, h.omega, ci->x0);
  }
  const auto& ds = std::get<DoubleSlitInit>(s.initial);
  return double_slit_packet(s.grid, s.constants, ds.separation, ds.slit_width, ds.k0);
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, _] : preset_table()) v.push_back(name);
    return v;
  }();
  return names;
}

std::string preset_config(const std::string& name) {
  auto it = preset_table().find(name);
  if (it == preset_table().end()) fail(errc::config, "unknown preset '" + name + "'");
  return it->second;
}

bool is_preset(const std::string& name) { return preset_table().count(name) != 0; }

}  // namespace qflow
