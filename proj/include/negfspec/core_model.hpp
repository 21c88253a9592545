#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

/// Few-level emitter model shared by all signal kernels.
///
/// Conventions (natural units, hbar = 1):
///  * level frequencies are absolute; only differences enter observable
///    quantities, so a global shift of all levels leaves every signal
///    invariant (tested).
///  * the dipole operator is a Hermitian matrix with zero diagonal; it is
///    split into a lowering part V (couples a level to any strictly lower
///    level) and a raising part V^dagger.
///  * dephasing(i, j) is the half-width of the i<->j coherence.  The kernels
///    damp each level x against the ground state with
///    gamma_x = dephasing(x, ground); entries between two excited levels are
///    accepted but do not enter compiled expressions (they matter only for
///    schemes driven through such coherences, which the kernels never build).
namespace negf {

using cplx = std::complex<double>;
using Mat  = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;

/// Linewidth floor added to every resolvent denominator and to every decaying
/// time kernel, keeping zero-width poles integrable.
inline constexpr double kEtaFloor = 1e-9;

inline constexpr double kHbar = 1.0;

/// Overall positive constants of the signal formulas.
///  * physical:   spontaneous-family constant 4*pi/volume, stimulated 4.
///  * normalized: constants collapse so that the closed-form single-line
///    emission rate carries constant 1 (spontaneous family 1/pi, stimulated 1).
enum class PrefactorMode { physical, normalized };

struct ModelConstants {
  PrefactorMode prefactor_mode = PrefactorMode::physical;
};

enum class ModeRole { incoming, signal, local_oscillator };

/// One quantized field mode.  `alpha` is the coherent-state amplitude; a
/// spontaneously detected signal mode has alpha = 0.
struct FieldMode {
  Vec3 k = Vec3::Zero();
  double omega = 0.0;  ///< mode frequency, > 0
  cplx alpha = 0.0;
  ModeRole role = ModeRole::incoming;
  double volume = 1.0;  ///< quantization volume, > 0

  /// Per-photon field amplitude sqrt(2*pi*hbar*omega/volume).
  double coupling() const;
  /// Classical envelope E_0 = coupling * alpha.
  cplx envelope() const;
};

/// Few-level emitter: frequencies, ground index, dipole and dephasing.
struct LevelScheme {
  Eigen::VectorXd omega;  ///< level frequencies
  int ground = 0;
  Mat dipole;        ///< Hermitian, zero diagonal
  RMat dephasing;    ///< symmetric, non-negative, zero diagonal

  int n() const { return static_cast<int>(omega.size()); }

  /// Half-width used for level x by every kernel: dephasing(x, ground).
  double gamma_level(int x) const;
};

/// Lowering/raising split of the dipole operator.
/// lowering(i, j) is nonzero only when omega_i < omega_j (it maps a higher
/// level j onto a lower level i); raising is its adjoint.
struct DipolePartition {
  Mat lowering;
  Mat raising;
};

/// Splits the dipole by level energy.  Throws std::invalid_argument when two
/// levels are degenerate (|omega_i - omega_j| <= tol) yet carry a nonzero
/// dipole entry, since "higher"/"lower" is then undefined.
DipolePartition partition_dipole(const LevelScheme& s, double tol = 1e-12);

/// Structural diagnostics; an empty vector means the scheme is usable.
std::vector<std::string> validate_scheme(const LevelScheme& s);

/// Diagnostics for a mode list (positive frequency/volume, spontaneous signal
/// modes must have alpha = 0).
std::vector<std::string> validate_modes(const std::vector<FieldMode>& modes);

const char* to_string(ModeRole r);
const char* to_string(PrefactorMode m);

}  // namespace negf
