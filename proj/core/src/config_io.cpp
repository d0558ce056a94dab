#include "pffc/config_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace pffc {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw ConfigError("not a number: '" + s + "'");
  return v;
}

int to_int(const std::string& s) {
  int v = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw ConfigError("not an integer: '" + s + "'");
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("not a boolean: '" + s + "'");
}

const char* b2s(bool b) { return b ? "true" : "false"; }

template <class E>
E pick(const std::string& s, std::initializer_list<std::pair<const char*, E>> table) {
  for (const auto& [name, value] : table)
    if (s == name) return value;
  std::string names;
  for (const auto& [name, value] : table) names += std::string(names.empty() ? "" : "|") + name;
  throw ConfigError("'" + s + "' is not one of " + names);
}

template <class E>
const char* name_of(E v, std::initializer_list<std::pair<const char*, E>> table) {
  for (const auto& [name, value] : table)
    if (v == value) return name;
  return "?";
}

const std::initializer_list<std::pair<const char*, DomainKind>> kDomains{{"rectangle", DomainKind::Rectangle},
                                                                          {"lshape", DomainKind::LShape}};
const std::initializer_list<std::pair<const char*, ElasticityModel>> kElasticity{
    {"plane_strain", ElasticityModel::PlaneStrain}, {"plane_stress", ElasticityModel::PlaneStress}};
const std::initializer_list<std::pair<const char*, SpatialLayout>> kSpatial{{"scalar", SpatialLayout::Scalar},
                                                                             {"nodal", SpatialLayout::Nodal}};
const std::initializer_list<std::pair<const char*, TimeLayout>> kTime{{"constant", TimeLayout::Constant},
                                                                       {"per_step", TimeLayout::PerStep}};
const std::initializer_list<std::pair<const char*, CostWeighting>> kWeighting{
    {"time_step", CostWeighting::TimeStep}, {"plain", CostWeighting::Plain}};
const std::initializer_list<std::pair<const char*, AdjointMaskRule>> kMask{
    {"consistent", AdjointMaskRule::Consistent}, {"literal", AdjointMaskRule::Literal}};
const std::initializer_list<std::pair<const char*, int>> kComponents{{"ux", Ux}, {"uy", Uy}};

std::string band_line(const Band& b) {
  return num(b.segment.a.x) + ' ' + num(b.segment.a.y) + ' ' + num(b.segment.b.x) + ' ' + num(b.segment.b.y) + ' ' +
         num(b.half_width_h) + ' ' + b2s(b.rule.open_ends) + ' ' + b2s(b.rule.open_band);
}

Band parse_band(const std::string& v) {
  const auto w = words(v);
  if (w.size() != 7) throw ConfigError("band needs 'x0 y0 x1 y1 half_width open_ends open_band'");
  return Band{Segment{{to_double(w[0]), to_double(w[1])}, {to_double(w[2]), to_double(w[3])}}, to_double(w[4]),
              BandRule{to_bool(w[5]), to_bool(w[6])}};
}

ControlBoundary parse_control(const std::string& v) {
  const auto w = words(v);
  if (w.size() != 3) throw ConfigError("control needs 'Tag component sign'");
  BoundaryTag tag{};
  try {
    tag = boundary_tag_from_string(w[0]);
  } catch (const InvalidGeometry& e) {
    throw ConfigError(e.what());
  }
  return ControlBoundary{tag, pick(w[1], kComponents), to_double(w[2])};
}

std::vector<int> parse_steps(const std::string& v) {
  std::vector<int> out;
  if (v == "none") return out;
  for (const auto& w : words(v)) out.push_back(to_int(w));
  return out;
}

void apply_key(ExperimentConfig& c, const std::string& key, const std::string& v, std::set<std::string>& seen) {
  auto& p = c.params;
  const auto dot = key.find('.');
  if (dot != std::string::npos || key == "notch" || key == "desired" || key == "control") {
    const std::string prefix = key.substr(0, dot);
    const bool first = seen.insert(prefix).second;
    if (prefix == "notch" || prefix == "desired") {
      auto& list = prefix == "notch" ? c.notches : c.desired;
      if (first) list.clear();
      if (dot == std::string::npos) {
        if (v != "none") throw ConfigError("expected '" + prefix + " = none' or an indexed key");
        return;
      }
      list.push_back(parse_band(v));
      return;
    }
    if (prefix == "control") {
      if (first) c.control_boundaries.clear();
      if (dot == std::string::npos) throw ConfigError("control needs an indexed key");
      c.control_boundaries.push_back(parse_control(v));
      return;
    }
    throw ConfigError("unknown key '" + key + "'");
  }

  static const std::map<std::string, double ModelParams::*> kParams{
      {"eps", &ModelParams::eps},     {"kappa", &ModelParams::kappa}, {"eta", &ModelParams::eta},
      {"gamma", &ModelParams::gamma}, {"eta0", &ModelParams::eta0},   {"alpha", &ModelParams::alpha},
      {"Gc", &ModelParams::Gc},       {"E", &ModelParams::E},         {"nu", &ModelParams::nu},
      {"qd", &ModelParams::qd}};
  if (auto it = kParams.find(key); it != kParams.end()) {
    p.*(it->second) = to_double(v);
    return;
  }
  if (key == "experiment") c.experiment = to_int(v);
  else if (key == "domain") c.domain = pick(v, kDomains);
  else if (key == "x_min") c.x.lo = to_double(v);
  else if (key == "x_max") c.x.hi = to_double(v);
  else if (key == "y_min") c.y.lo = to_double(v);
  else if (key == "y_max") c.y.hi = to_double(v);
  else if (key == "nx") c.nx = to_int(v);
  else if (key == "ny") c.ny = to_int(v);
  else if (key == "lshape_reentrant") {
    try {
      c.reentrant_tag = boundary_tag_from_string(v);
    } catch (const InvalidGeometry& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "T") c.T = to_double(v);
  else if (key == "M") c.M = to_int(v);
  else if (key == "elasticity") p.elasticity = pick(v, kElasticity);
  else if (key == "q0") c.q0 = to_double(v);
  else if (key == "qc_c0") c.qc.c0 = to_double(v);
  else if (key == "qc_c1") c.qc.c1 = to_double(v);
  else if (key == "desired_keeps_notch") c.desired_keeps_notch = to_bool(v);
  else if (key == "control_layout") c.spatial = pick(v, kSpatial);
  else if (key == "control_time") c.time = pick(v, kTime);
  else if (key == "cost_weighting") c.weighting = pick(v, kWeighting);
  else if (key == "adjoint_mask") c.mask_rule = pick(v, kMask);
  else if (key == "tol_abs") c.tol_abs = to_double(v);
  else if (key == "tol_rel") c.tol_rel = to_double(v);
  else if (key == "forward_tol") c.forward_tol = to_double(v);
  else if (key == "forward_max_iters") c.forward_max_iters = to_int(v);
  else if (key == "newton_max_iters") c.newton_max_iters = to_int(v);
  else if (key == "cg_rel_tol") c.cg_rel_tol = to_double(v);
  else if (key == "homotopy") c.homotopy = homotopy_kind_from_string(v);
  else if (key == "homotopy_steps") c.homotopy_steps = to_int(v);
  else if (key == "homotopy_factor") c.homotopy_factor = to_double(v);
  else if (key == "field_steps") c.field_steps = parse_steps(v);
  else if (key == "output_dir") c.output_dir = v;
  else throw ConfigError("unknown key '" + key + "'");
}

}  // namespace

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream os;
  const auto& p = c.params;
  auto kv = [&](const std::string& k, const std::string& v) { os << k << " = " << v << '\n'; };
  os << "# phase-field control experiment\n";
  kv("experiment", std::to_string(c.experiment));
  kv("domain", name_of(c.domain, kDomains));
  kv("x_min", num(c.x.lo));
  kv("x_max", num(c.x.hi));
  kv("y_min", num(c.y.lo));
  kv("y_max", num(c.y.hi));
  kv("nx", std::to_string(c.nx));
  kv("ny", std::to_string(c.ny));
  kv("lshape_reentrant", std::string(to_string(c.reentrant_tag)));
  kv("T", num(c.T));
  kv("M", std::to_string(c.M));
  os << "\n# model\n";
  kv("eps", num(p.eps));
  kv("kappa", num(p.kappa));
  kv("eta", num(p.eta));
  kv("gamma", num(p.gamma));
  kv("eta0", num(p.eta0));
  kv("alpha", num(p.alpha));
  kv("Gc", num(p.Gc));
  kv("E", num(p.E));
  kv("nu", num(p.nu));
  kv("elasticity", name_of(p.elasticity, kElasticity));
  kv("qd", num(p.qd));
  os << "\n# geometry of notches and desired bands: x0 y0 x1 y1 half_width(h) open_ends open_band\n";
  if (c.notches.empty()) kv("notch", "none");
  for (std::size_t i = 0; i < c.notches.size(); ++i) kv("notch." + std::to_string(i), band_line(c.notches[i]));
  if (c.desired.empty()) kv("desired", "none");
  for (std::size_t i = 0; i < c.desired.size(); ++i) kv("desired." + std::to_string(i), band_line(c.desired[i]));
  kv("desired_keeps_notch", b2s(c.desired_keeps_notch));
  os << "\n# control\n";
  for (std::size_t i = 0; i < c.control_boundaries.size(); ++i) {
    const auto& b = c.control_boundaries[i];
    kv("control." + std::to_string(i),
       std::string(to_string(b.tag)) + ' ' + name_of(b.component, kComponents) + ' ' + num(b.sign));
  }
  kv("control_layout", name_of(c.spatial, kSpatial));
  kv("control_time", name_of(c.time, kTime));
  kv("q0", num(c.q0));
  kv("qc_c0", num(c.qc.c0));
  kv("qc_c1", num(c.qc.c1));
  kv("cost_weighting", name_of(c.weighting, kWeighting));
  kv("adjoint_mask", name_of(c.mask_rule, kMask));
  os << "\n# solver\n";
  kv("tol_abs", num(c.tol_abs));
  kv("tol_rel", num(c.tol_rel));
  kv("forward_tol", num(c.forward_tol));
  kv("forward_max_iters", std::to_string(c.forward_max_iters));
  kv("newton_max_iters", std::to_string(c.newton_max_iters));
  kv("cg_rel_tol", num(c.cg_rel_tol));
  kv("homotopy", to_string(c.homotopy));
  kv("homotopy_steps", std::to_string(c.homotopy_steps));
  kv("homotopy_factor", num(c.homotopy_factor));
  os << "\n# output\n";
  std::string steps;
  for (int m : c.field_steps) steps += (steps.empty() ? "" : " ") + std::to_string(m);
  kv("field_steps", steps.empty() ? "none" : steps);
  kv("output_dir", c.output_dir);
  return os.str();
}

ExperimentConfig parse_config(std::istream& is, ExperimentConfig base) {
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    try {
      apply_key(base, key, value, seen);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

ExperimentConfig load_config(const std::string& path, std::optional<int> experiment) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (!experiment) {
    // Find the experiment key first so the right preset is the base.
    std::istringstream scan(text);
    std::string line;
    while (std::getline(scan, line)) {
      if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
      const auto eq = line.find('=');
      if (eq != std::string::npos && trim(line.substr(0, eq)) == "experiment") experiment = to_int(trim(line.substr(eq + 1)));
    }
    if (!experiment) throw ConfigError("config '" + path + "' names no experiment and none was given");
  }
  std::istringstream is(text);
  ExperimentConfig c = parse_config(is, preset(*experiment));
  c.experiment = *experiment;
  return c;
}

}  // namespace pffc
