#include "negfspec/core_model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace negf {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double FieldMode::coupling() const {
  return std::sqrt(2.0 * kPi * kHbar * omega / volume);
}

cplx FieldMode::envelope() const { return coupling() * alpha; }

double LevelScheme::gamma_level(int x) const {
  if (x == ground) return 0.0;
  return dephasing(x, ground);
}

DipolePartition partition_dipole(const LevelScheme& s, double tol) {
  const int n = s.n();
  DipolePartition p;
  p.lowering = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const cplx mu = s.dipole(i, j);
      if (mu == cplx(0.0)) continue;
      if (std::abs(s.omega(i) - s.omega(j)) <= tol) {
        std::ostringstream msg;
        msg << "partition_dipole: levels " << i << " and " << j
            << " are degenerate but dipole-coupled; lowering/raising split "
               "is undefined";
        throw std::invalid_argument(msg.str());
      }
      if (s.omega(i) < s.omega(j)) p.lowering(i, j) = mu;
    }
  }
  p.raising = p.lowering.adjoint();
  return p;
}

std::vector<std::string> validate_scheme(const LevelScheme& s) {
  std::vector<std::string> out;
  const int n = s.n();
  auto add = [&out](const std::string& m) { out.push_back(m); };

  if (n < 2) add("scheme needs at least two levels");
  if (s.ground < 0 || s.ground >= n) add("ground index out of range");
  if (s.dipole.rows() != n || s.dipole.cols() != n)
    add("dipole matrix dimension mismatch");
  if (s.dephasing.rows() != n || s.dephasing.cols() != n)
    add("dephasing matrix dimension mismatch");
  if (!out.empty()) return out;  // shape errors make element checks moot

  if (s.ground >= 0 && s.ground < n) {
    for (int i = 0; i < n; ++i) {
      if (i != s.ground && s.omega(i) < s.omega(s.ground))
        add("level " + std::to_string(i) + " lies below the ground level");
    }
  }
  for (int i = 0; i < n; ++i) {
    if (s.dipole(i, i) != cplx(0.0))
      add("dipole diagonal entry " + std::to_string(i) + " must be zero");
    if (s.dephasing(i, i) != 0.0)
      add("dephasing diagonal entry " + std::to_string(i) + " must be zero");
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(s.dipole(i, j) - std::conj(s.dipole(j, i))) > 1e-14)
        add("dipole not Hermitian at (" + std::to_string(i) + "," +
            std::to_string(j) + ")");
      if (std::abs(s.dephasing(i, j) - s.dephasing(j, i)) > 0.0)
        add("dephasing not symmetric at (" + std::to_string(i) + "," +
            std::to_string(j) + ")");
      if (s.dephasing(i, j) < 0.0)
        add("dephasing entry (" + std::to_string(i) + "," +
            std::to_string(j) + ") is negative");
    }
  }
  return out;
}

std::vector<std::string> validate_modes(const std::vector<FieldMode>& modes) {
  std::vector<std::string> out;
  for (size_t m = 0; m < modes.size(); ++m) {
    const FieldMode& f = modes[m];
    const std::string tag = "mode " + std::to_string(m) + ": ";
    if (!(f.omega > 0.0)) out.push_back(tag + "frequency must be positive");
    if (!(f.volume > 0.0))
      out.push_back(tag + "quantization volume must be positive");
    if (f.role == ModeRole::signal && f.alpha != cplx(0.0))
      out.push_back(tag + "spontaneous signal mode must have alpha = 0");
  }
  return out;
}

const char* to_string(ModeRole r) {
  switch (r) {
    case ModeRole::incoming: return "incoming";
    case ModeRole::signal: return "signal";
    case ModeRole::local_oscillator: return "local_oscillator";
  }
  return "?";
}

const char* to_string(PrefactorMode m) {
  return m == PrefactorMode::physical ? "physical" : "normalized";
}

}  // namespace negf
