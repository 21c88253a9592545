#pragma once

#include "negfspec/core_model.hpp"

#include <stdexcept>
#include <string>
#include <vector>

/// Config and result serialization.  All text output is deterministic:
/// stable key order, fixed indentation, %.17g numbers (shortest form that
/// round-trips a double), "\n" line endings.
namespace negf {

/// Unreadable, malformed, or structurally invalid configuration.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A full model: emitter scheme, field modes, formula constants.
struct RunConfig {
  LevelScheme scheme;
  std::vector<FieldMode> modes;
  ModelConstants constants;
};

/// JSON text (2-space indent, trailing newline).  Keys: levels, ground,
/// dipole ([re, im] pairs), dephasing, modes (k/omega/alpha/role/volume),
/// constants.prefactor_mode.
std::string config_to_json(const RunConfig& cfg);

/// Parses and structurally validates; throws config_error with a one-line
/// message on any problem.
RunConfig config_from_json(const std::string& text);

RunConfig load_config(const std::string& path);
void save_config(const RunConfig& cfg, const std::string& path);

/// %.17g rendering used by every CSV column.
std::string format_number(double x);

/// Two-column CSV with a header line, e.g. "omega,value".
std::string csv_scan(const std::string& x_name, const std::vector<double>& x,
                     const std::string& y_name, const std::vector<double>& y);

/// Three-column CSV, rows sweep `a` (outer) then `b`; v(i, j) pairs with
/// (a[i], b[j]).
std::string csv_map(const std::string& a_name, const std::vector<double>& a,
                    const std::string& b_name, const std::vector<double>& b,
                    const std::string& v_name, const RMat& v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace negf
