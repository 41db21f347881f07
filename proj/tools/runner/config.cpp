#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "abphase/errors.hpp"
#include "abphase/expression.hpp"

namespace abphase::runner {

namespace {

KeySpec real(std::string key, std::string unit, std::string def, std::string desc) {
  return {std::move(key), ValueKind::real, std::move(unit), std::move(def), std::move(desc), {}};
}
KeySpec integer(std::string key, std::string def, std::string desc) {
  return {std::move(key), ValueKind::integer, "", std::move(def), std::move(desc), {}};
}
KeySpec angle(std::string key, std::string def, std::string desc) {
  return {std::move(key), ValueKind::angle, "rad", std::move(def), std::move(desc), {}};
}
KeySpec text(std::string key, std::string def, std::string desc,
             std::vector<std::string> choices = {}) {
  return {std::move(key), ValueKind::text, "", std::move(def), std::move(desc), std::move(choices)};
}

SectionSpec units_section() {
  return {"units",
          {text("system", "natural", "natural (hbar = c = 1) or gaussian", {"natural", "gaussian"}),
           real("hbar", "erg*s", "1", "reduced Planck constant; fixed to 1 in natural mode"),
           real("c", "cm/s", "1", "speed of light; fixed to 1 in natural mode"),
           real("e", "statC", "1", "elementary charge used by the Andreev device")},
          false, {}};
}

SectionSpec tolerance_section() {
  return {"tolerance",
          {real("rel", "", "1e-6", "quadrature target error relative to the integrand L1 norm"),
           real("abs", "", "0", "absolute floor of the quadrature target"),
           real("accept_rel", "", "1e-4", "relative error beyond which a result is rejected"),
           real("cutoff", "cm", "1e-9", "radius excluded around the point charge"),
           integer("max_panels", "4000", "panel budget per adaptive integral")},
          false, {}};
}

SectionSpec tube_section() {
  return {"tube",
          {real("flux", "G*cm^2", "2*pi", "magnetic flux"),
           real("radius", "cm", "0", "core radius; 0 is the ideal line flux"),
           real("center_x", "cm", "0", "tube center x"),
           real("center_y", "cm", "0", "tube center y")},
          false, {}};
}

SectionSpec charge_section() {
  return {"charge", {real("q", "statC", "1", "particle charge")}, false, {}};
}

SectionSpec gauge_section(const std::string& chi_example) {
  return {"gauge",
          {text("base", "azimuthal", "base gauge", {"azimuthal", "dirac-string"}),
           angle("string_angle", "pi", "direction of the Dirac string from the tube center"),
           text("chi", "0", "extra gauge function chi(x, y) added as grad chi")},
          true,
          {{}, {{"base", "dirac-string"}, {"string_angle", "pi"}}, {{"chi", chi_example}}}};
}

std::vector<ExperimentDescriptor> build() {
  std::vector<ExperimentDescriptor> d;
  d.push_back(
      {"loopless-fringe",
       "Detection probability of the two-source loopless interferometer along a screen and "
       "versus flux",
       "P = |u2 v1 phi1|^2 + |u1 v2 phi2|^2 + 2|u1 v1 u2 v2 phi1 phi2| cos(phi_B + phi_0), "
       "phi_B = q Phi dtheta / (2 pi hbar c)",
       {tube_section(),
        charge_section(),
        {"sources",
         {real("x1", "cm", "-2", "source 1 x"), real("y1", "cm", "1", "source 1 y"),
          real("x2", "cm", "-2", "source 2 x"), real("y2", "cm", "-1", "source 2 y"),
          real("u1", "", "sqrt(0.5)", "vacuum amplitude of source 1"),
          real("v1", "", "sqrt(0.5)", "one-particle amplitude of source 1"),
          real("u2", "", "sqrt(0.5)", "vacuum amplitude of source 2"),
          real("v2", "", "sqrt(0.5)", "one-particle amplitude of source 2"),
          angle("v1_phase", "0", "phase of v1"), angle("v2_phase", "0", "phase of v2")},
         false, {}},
        {"wave",
         {real("k", "1/cm", "5", "wavenumber"),
          real("r_min", "cm", "1e-3", "near-field clamp of the 1/r envelope")},
         false, {}},
        {"screen",
         {real("x", "cm", "4", "screen line x"), real("y_min", "cm", "-1.5", "screen start y"),
          real("y_max", "cm", "1.5", "screen end y"), integer("points", "61", "screen samples")},
         false, {}},
        {"sweep",
         {real("y", "cm", "0", "screen point y for the flux sweep"),
          real("flux_min", "G*cm^2", "0", "sweep start"),
          real("flux_max", "G*cm^2", "8*pi", "sweep end"),
          integer("points", "81", "sweep samples")},
         false, {}},
        units_section(),
        tolerance_section()}});
  d.push_back(
      {"andreev-sweep",
       "Output current of the Andreev interferometer versus flux, with the averaging protocol",
       "I = (pi e^2 / hbar) V [G1^2 + G2^2 + 2 G1 G2 cos(phi_0 + phi_B)], "
       "phi_B = e Phi dtheta / (pi hbar c), G_j = 2 pi rho_j rho_N |t_j|^2",
       {{"junction",
         {real("rho1", "1/erg", "1/(2*pi)", "density of states, superconductor 1"),
          real("rho2", "1/erg", "1/(2*pi)", "density of states, superconductor 2"),
          real("rhoN", "1/erg", "1", "density of states, normal metal"),
          real("t1", "erg", "1", "tunnelling amplitude magnitude, junction 1"),
          angle("t1_phase", "0", "tunnelling amplitude phase, junction 1"),
          real("t2", "erg", "1", "tunnelling amplitude magnitude, junction 2"),
          angle("t2_phase", "0", "tunnelling amplitude phase, junction 2"),
          real("gap", "erg", "1", "superconducting gap"),
          real("bias", "statV", "1e-3", "bias voltage"),
          real("tau", "s", "1", "pulse duration (metadata)"),
          angle("delta_theta", "2*pi", "geometry angle between the junctions"),
          angle("phi0", "0", "flux-independent phase offset")},
         false, {}},
        {"sweep",
         {real("flux_min", "G*cm^2", "0", "sweep start"),
          real("flux_max", "G*cm^2", "4*pi", "sweep end"),
          integer("points", "201", "sweep samples")},
         false, {}},
        {"protocol",
         {integer("repetitions", "1", "measurements averaged per flux value"),
          real("noise", "statA", "0", "standard deviation of the additive current noise"),
          integer("threads", "1", "worker threads (results do not depend on it)")},
         false, {}},
        units_section(),
        tolerance_section()}});
  d.push_back(
      {"gauge-audit",
       "Potential-theory phases of one path (or a two-path difference) under several gauges, "
       "against the local-field phase",
       "phi_pot = (q / hbar c) int A . dr, phi_loc = (1/hbar) int Pi . dr; closed loops give "
       "q Phi / (hbar c)",
       {tube_section(),
        charge_section(),
        {"path",
         {text("kind", "arc", "path shape", {"arc", "straight", "two-path"}),
          real("center_x", "cm", "0", "arc center x"), real("center_y", "cm", "0", "arc center y"),
          real("radius", "cm", "1", "arc radius"), angle("theta_start", "0", "arc start angle"),
          angle("theta_end", "2*pi", "arc end angle"),
          real("x0", "cm", "1", "straight path start x"), real("y0", "cm", "-1", "straight start y"),
          real("x1", "cm", "1", "straight path end x"), real("y1", "cm", "1", "straight end y"),
          real("source1_x", "cm", "-2", "two-path source 1 x"),
          real("source1_y", "cm", "1", "two-path source 1 y"),
          real("source2_x", "cm", "-2", "two-path source 2 x"),
          real("source2_y", "cm", "-1", "two-path source 2 y"),
          real("screen_x", "cm", "4", "two-path screen point x"),
          real("screen_y", "cm", "0", "two-path screen point y"),
          real("speed", "cm/s", "1", "path speed"), integer("points", "1000", "samples per path")},
         false, {}},
        gauge_section("0.25*x*y"),
        units_section(),
        tolerance_section()}});
  d.push_back(
      {"lagrangian-identity",
       "Residual of the local/potential Lagrangian identity along random smooth trajectories "
       "under time-step halving",
       "v . Pi - U = (q/c) v . A + dF/dt, F = (1/4 pi c) int E_q . A d^3r",
       {tube_section(),
        charge_section(),
        {"paths",
         {integer("count", "5", "number of random trajectories"),
          integer("base_samples", "41", "samples at the coarsest level"),
          integer("levels", "5", "number of step sizes, each half the previous"),
          real("duration", "s", "1", "trajectory duration"),
          real("min_order", "", "1.9", "minimum observed convergence order")},
         false, {}},
        gauge_section("0.5/(1+(x-1)*(x-1)+y*y)"),
        units_section(),
        tolerance_section()}});
  d.push_back(
      {"conservation-suite",
       "Momentum conservation, Faraday circulation and work balance for a ramped flux tube",
       "Q E + dPi_Q/dt = 0; loop integral of E = -(1/c) dPhi/dt; dW_B/dt = -q v . E, "
       "W_B = v . Pi",
       {tube_section(),
        {"ramp",
         {real("flux_start", "G*cm^2", "0", "flux before the ramp"),
          real("flux_end", "G*cm^2", "2*pi", "flux after the ramp"),
          real("t_start", "s", "0", "ramp start"), real("duration", "s", "1", "ramp duration"),
          text("shape", "linear", "ramp profile", {"linear", "smoothstep"})},
         false, {}},
        {"charge",
         {real("q", "statC", "1", "particle charge"), real("x", "cm", "1", "held position x"),
          real("y", "cm", "0", "held position y"), real("vx", "cm/s", "0", "velocity label x"),
          real("vy", "cm/s", "0.01", "velocity label y")},
         false, {}},
        {"loop",
         {real("radius", "cm", "2", "Faraday loop radius about the tube"),
          integer("points", "1000", "loop samples")},
         false, {}},
        {"checks",
         {integer("samples", "9", "times sampled in the momentum check"),
          real("h", "s", "1e-3", "differencing step of dPi/dt"),
          integer("steps", "64", "midpoint steps of the work integral")},
         false, {}},
        units_section(),
        tolerance_section()}});
  d.push_back(
      {"trajectory",
       "Classical trajectory of a charge under the Lorentz force of the tube",
       "m dv/dt = q (E + v x B / c); no force outside a static core",
       {tube_section(),
        {"charge",
         {real("q", "statC", "1", "particle charge"), real("m", "g", "1", "particle mass"),
          real("x", "cm", "-5", "initial x"), real("y", "cm", "0.5", "initial y"),
          real("vx", "cm/s", "1", "initial velocity x"),
          real("vy", "cm/s", "0", "initial velocity y")},
         false, {}},
        {"dynamics",
         {real("dt", "s", "1e-3", "time step"), real("total_time", "s", "10", "duration"),
          real("energy_drift_limit", "", "1e-6", "relative energy drift that aborts the run")},
         false, {}},
        units_section(),
        tolerance_section()}});
  return d;
}

const SectionSpec* find_section(const ExperimentDescriptor& d, std::string_view name) {
  for (const auto& s : d.sections) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

const KeySpec* find_key(const SectionSpec& s, std::string_view key) {
  for (const auto& k : s.keys) {
    if (k.key == key) return &k;
  }
  return nullptr;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string strip_spaces(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c != ' ' && c != '\t') out += c;
  }
  return out;
}

struct RawEntry {
  std::string section;
  std::string key;
  std::string value;
  std::size_t line;
  std::size_t key_col;
  std::size_t value_col;
};

/// "base.N" -> ("base", true) for a positive integer N.
std::pair<std::string, bool> split_instance(const std::string& name) {
  const auto dot = name.rfind('.');
  if (dot == std::string::npos || dot + 1 == name.size()) return {name, false};
  for (std::size_t i = dot + 1; i < name.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(name[i]))) return {name, false};
  }
  return {name.substr(0, dot), true};
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

const std::vector<ExperimentDescriptor>& list_experiments() {
  static const std::vector<ExperimentDescriptor> all = build();
  return all;
}

const ExperimentDescriptor* find_experiment(std::string_view name) {
  for (const auto& d : list_experiments()) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

std::string config_template(const ExperimentDescriptor& d) {
  std::ostringstream out;
  out << "# " << d.summary << "\n# " << d.relation << "\n";
  out << "experiment = " << d.name << "\nseed = 0\n";
  for (const auto& s : d.sections) {
    const auto emit = [&](const std::string& header,
                          const std::map<std::string, std::string>& given) {
      out << "\n[" << header << "]\n";
      for (const auto& k : s.keys) {
        const auto it = given.find(k.key);
        out << k.key << " = " << (it == given.end() ? k.default_value : it->second);
        if (k.kind == ValueKind::angle) out << " [rad]";
        out << "  # " << k.description;
        if (!k.unit.empty() && k.kind != ValueKind::angle) out << "; gaussian unit [" << k.unit << "]";
        out << "\n";
      }
    };
    if (s.repeatable) {
      for (std::size_t i = 0; i < s.examples.size(); ++i) {
        emit(s.name + "." + std::to_string(i + 1), s.examples[i]);
      }
    } else {
      emit(s.name, {});
    }
  }
  return out.str();
}

double Config::real(const std::string& section, const std::string& key) const {
  const auto s = reals_.find(section);
  if (s == reals_.end() || !s->second.count(key)) {
    throw Error("config: no numeric value " + section + "." + key);
  }
  return s->second.at(key);
}

long long Config::integer(const std::string& section, const std::string& key) const {
  return std::llround(real(section, key));
}

const std::string& Config::text(const std::string& section, const std::string& key) const {
  const auto s = texts_.find(section);
  if (s == texts_.end() || !s->second.count(key)) {
    throw Error("config: no text value " + section + "." + key);
  }
  return s->second.at(key);
}

bool Config::has_section(const std::string& section) const {
  return reals_.count(section) || texts_.count(section);
}

std::vector<std::string> Config::instances(const std::string& base) const {
  std::set<std::pair<long, std::string>> found;
  auto scan = [&](const auto& m) {
    for (const auto& [name, _] : m) {
      const auto [b, numbered] = split_instance(name);
      if (numbered && b == base) found.insert({std::stol(name.substr(base.size() + 1)), name});
    }
  };
  scan(reals_);
  scan(texts_);
  std::vector<std::string> out;
  for (const auto& [_, name] : found) out.push_back(name);
  return out;
}

std::vector<std::string> Config::resolved() const {
  std::vector<std::string> out;
  out.push_back("experiment = " + experiment_);
  out.push_back("seed = " + std::to_string(seed_));
  for (const auto& [sec, keys] : reals_) {
    for (const auto& [k, v] : keys) out.push_back(sec + "." + k + " = " + format_number(v));
  }
  for (const auto& [sec, keys] : texts_) {
    for (const auto& [k, v] : keys) out.push_back(sec + "." + k + " = " + v);
  }
  std::sort(out.begin() + 2, out.end());
  return out;
}

void Config::override_real(const std::string& section, const std::string& key, double v) {
  reals_[section][key] = v;
}

Config parse_config(std::string_view text) {
  std::vector<RawEntry> entries;
  std::vector<std::pair<std::string, std::size_t>> section_lines;
  std::string current;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view raw =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    const auto hash = raw.find('#');
    const std::string_view line = raw.substr(0, hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const std::size_t indent = line.find_first_not_of(" \t\r");
    if (t.front() == '[') {
      if (t.back() != ']') throw ParseError("config: unterminated section header", lineno, indent + 1);
      current = trim(std::string_view(t).substr(1, t.size() - 2));
      if (current.empty()) throw ParseError("config: empty section name", lineno, indent + 1);
      for (const auto& [name, l] : section_lines) {
        if (name == current) {
          throw ParseError("config: section [" + current + "] repeated (first at line " +
                               std::to_string(l) + ")",
                           lineno, indent + 1);
        }
      }
      section_lines.push_back({current, lineno});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("config: expected key = value", lineno, indent + 1);
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError("config: missing key before '='", lineno, indent + 1);
    const auto vstart = line.find_first_not_of(" \t", eq + 1);
    if (vstart == std::string_view::npos) throw ParseError("config: missing value", lineno, eq + 2);
    for (const auto& e : entries) {
      if (e.section == current && e.key == key) {
        throw ParseError("config: key '" + key + "' repeated in section", lineno, indent + 1);
      }
    }
    entries.push_back({current, key, trim(line.substr(vstart)), lineno, indent + 1, vstart + 1});
  }

  Config cfg;
  const RawEntry* exp_entry = nullptr;
  for (const auto& e : entries) {
    if (e.section.empty() && e.key == "experiment") exp_entry = &e;
  }
  if (!exp_entry) throw ParseError("config: 'experiment = <name>' is required", 1, 1);
  const ExperimentDescriptor* desc = find_experiment(exp_entry->value);
  if (!desc) {
    throw ParseError("config: unknown experiment '" + exp_entry->value + "'", exp_entry->line,
                     exp_entry->value_col);
  }
  cfg.experiment_ = desc->name;

  for (const auto& [name, l] : section_lines) {
    const auto [base, numbered] = split_instance(name);
    const SectionSpec* spec = find_section(*desc, base);
    if (!spec || spec->repeatable != numbered) {
      throw ParseError("config: section [" + name + "] is not valid for experiment " + desc->name,
                       l, 1);
    }
  }

  // Unit system first: it decides how the remaining values are read.
  std::string system = "natural";
  for (const auto& e : entries) {
    if (e.section == "units" && e.key == "system") {
      if (e.value != "natural" && e.value != "gaussian") {
        throw ParseError("config: units.system must be natural or gaussian", e.line, e.value_col);
      }
      system = e.value;
    }
  }
  cfg.natural_ = system == "natural";

  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& e : entries) {
    if (e.section.empty()) {
      if (e.key == "experiment") continue;
      if (e.key == "seed") {
        const double v = [&] {
          try {
            return Expression::evaluate_constant(e.value);
          } catch (const ParseError& pe) {
            throw ParseError(pe.what(), e.line, e.value_col + pe.column() - 1);
          }
        }();
        if (v < 0 || v != std::floor(v)) throw ParseError("config: seed must be a non-negative integer", e.line, e.value_col);
        cfg.seed_ = static_cast<std::uint64_t>(v);
        continue;
      }
      throw ParseError("config: unknown top-level key '" + e.key + "'", e.line, e.key_col);
    }
    const auto [base, numbered] = split_instance(e.section);
    const SectionSpec* spec = find_section(*desc, base);
    const KeySpec* ks = spec ? find_key(*spec, e.key) : nullptr;
    if (!ks) {
      throw ParseError("config: unknown key '" + e.key + "' in [" + e.section + "]", e.line,
                       e.key_col);
    }
    seen.insert({e.section, e.key});

    if (ks->kind == ValueKind::text) {
      if (!ks->choices.empty() &&
          std::find(ks->choices.begin(), ks->choices.end(), e.value) == ks->choices.end()) {
        std::string allowed;
        for (const auto& c : ks->choices) allowed += (allowed.empty() ? "" : ", ") + c;
        throw ParseError("config: " + e.key + " must be one of " + allowed, e.line, e.value_col);
      }
      if (e.key == "chi") {
        try {
          (void)Expression::parse(e.value);
        } catch (const ParseError& pe) {
          throw ParseError(pe.what(), e.line, e.value_col + pe.column() - 1);
        }
      }
      cfg.texts_[e.section][e.key] = e.value;
      continue;
    }

    // Split an optional trailing [unit].
    std::string expr = e.value;
    std::string unit;
    std::size_t unit_col = 0;
    if (!expr.empty() && expr.back() == ']') {
      const auto open = expr.rfind('[');
      if (open == std::string::npos) throw ParseError("config: unmatched ']'", e.line, e.value_col + expr.size() - 1);
      unit = strip_spaces(std::string_view(expr).substr(open + 1, expr.size() - open - 2));
      unit_col = e.value_col + open;
      expr = trim(std::string_view(expr).substr(0, open));
    }
    double v = 0.0;
    try {
      v = Expression::evaluate_constant(expr);
    } catch (const ParseError& pe) {
      throw ParseError(pe.what(), e.line, e.value_col + pe.column() - 1);
    }

    if (ks->kind == ValueKind::angle) {
      if (unit == "deg") {
        v *= std::numbers::pi / 180.0;
      } else if (!unit.empty() && unit != "rad") {
        throw ParseError("config: angle unit must be [rad] or [deg]", e.line, unit_col);
      }
    } else if (ks->kind == ValueKind::integer) {
      if (!unit.empty()) throw ParseError("config: '" + e.key + "' takes no unit", e.line, unit_col);
      if (v != std::floor(v)) throw ParseError("config: '" + e.key + "' must be an integer", e.line, e.value_col);
    } else if (ks->unit.empty()) {
      if (!unit.empty() && unit != "1") {
        throw ParseError("config: '" + e.key + "' is dimensionless", e.line, unit_col);
      }
    } else if (cfg.natural_) {
      if (!unit.empty() && unit != "1") {
        throw ParseError("config: unit [" + unit + "] given in natural mode; set units.system = "
                         "gaussian or drop the unit",
                         e.line, unit_col);
      }
    } else {
      if (unit.empty()) {
        throw ParseError("config: '" + e.key + "' needs an explicit unit [" + ks->unit +
                             "] in gaussian mode",
                         e.line, e.value_col + e.value.size());
      }
      if (unit != strip_spaces(ks->unit)) {
        throw ParseError("config: '" + e.key + "' expects unit [" + ks->unit + "], got [" + unit + "]",
                         e.line, unit_col);
      }
    }
    cfg.reals_[e.section][e.key] = v;
  }

  // Defaults for every key not given, in every section instance present.
  auto fill = [&](const SectionSpec& spec, const std::string& name) {
    for (const auto& k : spec.keys) {
      if (seen.count({name, k.key})) continue;
      if (k.kind == ValueKind::text) {
        cfg.texts_[name][k.key] = k.default_value;
      } else {
        cfg.reals_[name][k.key] = Expression::evaluate_constant(k.default_value);
      }
    }
  };
  for (const auto& spec : desc->sections) {
    if (spec.repeatable) {
      for (const auto& [name, l] : section_lines) {
        const auto [b, numbered] = split_instance(name);
        if (numbered && b == spec.name) fill(spec, name);
      }
    } else {
      fill(spec, spec.name);
    }
  }

  if (cfg.natural_) {
    for (const char* k : {"hbar", "c"}) {
      if (cfg.reals_["units"][k] != 1.0) {
        for (const auto& e : entries) {
          if (e.section == "units" && e.key == k) {
            throw ParseError(std::string("config: ") + k + " is fixed to 1 in natural mode", e.line,
                             e.value_col);
          }
        }
      }
    }
  } else {
    // CGS constants unless given.
    if (!seen.count({"units", "hbar"})) cfg.reals_["units"]["hbar"] = 1.054571817e-27;
    if (!seen.count({"units", "c"})) cfg.reals_["units"]["c"] = 2.99792458e10;
    if (!seen.count({"units", "e"})) cfg.reals_["units"]["e"] = 4.80320471e-10;
  }
  cfg.units_.hbar = cfg.reals_["units"]["hbar"];
  cfg.units_.c = cfg.reals_["units"]["c"];
  cfg.units_.e = cfg.reals_["units"]["e"];
  return cfg;
}

}  // namespace abphase::runner
