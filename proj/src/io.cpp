#include "negfspec/io.hpp"

#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace negf {
namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json complex_to_json(const cplx& z) {
  return ordered_json::array({z.real(), z.imag()});
}

cplx complex_from_json(const ordered_json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw config_error(where + ": expected [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

double number_from_json(const ordered_json& j, const std::string& where) {
  if (!j.is_number()) throw config_error(where + ": expected a number");
  return j.get<double>();
}

ModeRole role_from_string(const std::string& r) {
  if (r == "incoming") return ModeRole::incoming;
  if (r == "signal") return ModeRole::signal;
  if (r == "local_oscillator") return ModeRole::local_oscillator;
  throw config_error("mode role '" + r +
                     "' is not one of incoming/signal/local_oscillator");
}

PrefactorMode prefactor_from_string(const std::string& m) {
  if (m == "physical") return PrefactorMode::physical;
  if (m == "normalized") return PrefactorMode::normalized;
  throw config_error("prefactor_mode '" + m +
                     "' is not one of physical/normalized");
}

const ordered_json& require(const ordered_json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end())
    throw config_error(std::string("missing key '") + key + "'");
  return *it;
}

}  // namespace

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string config_to_json(const RunConfig& cfg) {
  const LevelScheme& s = cfg.scheme;
  const int n = s.n();
  ordered_json j;

  j["levels"] = ordered_json::array();
  for (int i = 0; i < n; ++i) j["levels"].push_back(s.omega(i));
  j["ground"] = s.ground;

  j["dipole"] = ordered_json::array();
  for (int i = 0; i < n; ++i) {
    ordered_json row = ordered_json::array();
    for (int k = 0; k < n; ++k) row.push_back(complex_to_json(s.dipole(i, k)));
    j["dipole"].push_back(std::move(row));
  }

  j["dephasing"] = ordered_json::array();
  for (int i = 0; i < n; ++i) {
    ordered_json row = ordered_json::array();
    for (int k = 0; k < n; ++k) row.push_back(s.dephasing(i, k));
    j["dephasing"].push_back(std::move(row));
  }

  j["modes"] = ordered_json::array();
  for (const FieldMode& m : cfg.modes) {
    ordered_json jm;
    jm["k"] = ordered_json::array({m.k(0), m.k(1), m.k(2)});
    jm["omega"] = m.omega;
    jm["alpha"] = complex_to_json(m.alpha);
    jm["role"] = to_string(m.role);
    jm["volume"] = m.volume;
    j["modes"].push_back(std::move(jm));
  }

  j["constants"]["prefactor_mode"] = to_string(cfg.constants.prefactor_mode);
  return j.dump(2) + "\n";
}

RunConfig config_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw config_error(std::string("json parse: ") + e.what());
  }
  if (!j.is_object()) throw config_error("top level must be a JSON object");

  RunConfig cfg;
  LevelScheme& s = cfg.scheme;

  const ordered_json& levels = require(j, "levels");
  if (!levels.is_array() || levels.empty())
    throw config_error("levels: expected a non-empty array");
  const int n = static_cast<int>(levels.size());
  s.omega.resize(n);
  for (int i = 0; i < n; ++i)
    s.omega(i) = number_from_json(levels[static_cast<size_t>(i)], "levels");

  const ordered_json& ground = require(j, "ground");
  if (!ground.is_number_integer())
    throw config_error("ground: expected an integer level index");
  s.ground = ground.get<int>();
  if (s.ground < 0 || s.ground >= n)
    throw config_error("ground: level index out of range");

  const ordered_json& dip = require(j, "dipole");
  if (!dip.is_array() || static_cast<int>(dip.size()) != n)
    throw config_error("dipole: expected an n x n matrix of [re, im] pairs");
  s.dipole = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const ordered_json& row = dip[static_cast<size_t>(i)];
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      throw config_error("dipole: expected an n x n matrix of [re, im] pairs");
    for (int k = 0; k < n; ++k)
      s.dipole(i, k) = complex_from_json(row[static_cast<size_t>(k)], "dipole");
  }

  const ordered_json& dep = require(j, "dephasing");
  if (!dep.is_array() || static_cast<int>(dep.size()) != n)
    throw config_error("dephasing: expected an n x n real matrix");
  s.dephasing = RMat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const ordered_json& row = dep[static_cast<size_t>(i)];
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      throw config_error("dephasing: expected an n x n real matrix");
    for (int k = 0; k < n; ++k)
      s.dephasing(i, k) = number_from_json(row[static_cast<size_t>(k)], "dephasing");
  }

  const ordered_json& modes = require(j, "modes");
  if (!modes.is_array()) throw config_error("modes: expected an array");
  for (const ordered_json& jm : modes) {
    if (!jm.is_object()) throw config_error("modes: expected objects");
    FieldMode m;
    const ordered_json& k = require(jm, "k");
    if (!k.is_array() || k.size() != 3)
      throw config_error("mode k: expected [kx, ky, kz]");
    for (int i = 0; i < 3; ++i)
      m.k(i) = number_from_json(k[static_cast<size_t>(i)], "mode k");
    m.omega = number_from_json(require(jm, "omega"), "mode omega");
    m.alpha = complex_from_json(require(jm, "alpha"), "mode alpha");
    const ordered_json& role = require(jm, "role");
    if (!role.is_string()) throw config_error("mode role: expected a string");
    m.role = role_from_string(role.get<std::string>());
    m.volume = number_from_json(require(jm, "volume"), "mode volume");
    cfg.modes.push_back(m);
  }

  const ordered_json& consts = require(j, "constants");
  const ordered_json& pm = require(consts, "prefactor_mode");
  if (!pm.is_string())
    throw config_error("constants.prefactor_mode: expected a string");
  cfg.constants.prefactor_mode = prefactor_from_string(pm.get<std::string>());

  std::vector<std::string> problems = validate_scheme(s);
  for (const std::string& p : validate_modes(cfg.modes)) problems.push_back(p);
  if (!problems.empty()) {
    std::string msg = "invalid model:";
    for (const std::string& p : problems) msg += " [" + p + "]";
    throw config_error(msg);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  return config_from_json(read_text_file(path));
}

void save_config(const RunConfig& cfg, const std::string& path) {
  write_text_file(path, config_to_json(cfg));
}

std::string csv_scan(const std::string& x_name, const std::vector<double>& x,
                     const std::string& y_name, const std::vector<double>& y) {
  std::string out = x_name + "," + y_name + "\n";
  const size_t n = std::min(x.size(), y.size());
  for (size_t i = 0; i < n; ++i)
    out += format_number(x[i]) + "," + format_number(y[i]) + "\n";
  return out;
}

std::string csv_map(const std::string& a_name, const std::vector<double>& a,
                    const std::string& b_name, const std::vector<double>& b,
                    const std::string& v_name, const RMat& v) {
  std::string out = a_name + "," + b_name + "," + v_name + "\n";
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t k = 0; k < b.size(); ++k)
      out += format_number(a[i]) + "," + format_number(b[k]) + "," +
             format_number(v(static_cast<int>(i), static_cast<int>(k))) + "\n";
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot write '" + path + "'");
  out << text;
}

}  // namespace negf
