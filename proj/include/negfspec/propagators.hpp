#pragma once

#include "negfspec/core_model.hpp"

/// Frequency- and time-domain propagators of the free emitter and of the
/// field modes.  All resolvents are diagonal in the level basis because the
/// free Hamiltonian is diagonal; they are returned as full matrices so that
/// callers can stay basis-agnostic.
namespace negf {

enum class Branch { retarded, advanced };

/// Emitter resolvent evaluated at (omega + omega_ground):
///
///   retarded:  G(omega)_xx = hbar / (hbar*omega + hbar*omega_g - hbar*omega_x
///                                     + i*hbar*(gamma_x + kEtaFloor))
///   advanced:  adjoint of the retarded matrix at the same omega.
///
/// gamma_x = dephasing(x, ground) is the level half-width (zero for the
/// ground level itself); kEtaFloor keeps zero-width poles integrable.
Mat resolvent(const LevelScheme& s, double omega, Branch b = Branch::retarded);

/// Damping actually used in the denominator for level x: gamma_x + kEtaFloor.
double effective_width(const LevelScheme& s, int x);

/// Free forward evolution theta(s) * exp(-i*H0*s) with per-level decay
/// exp(-(gamma_x + kEtaFloor)*s).  Returns zero for s < 0 and the identity at
/// s = 0 (step-function weight at coinciding times is handled by the
/// quadrature rules, which give boundary points half weight).
Mat time_propagator(const LevelScheme& s, double t);

enum class FieldGreenKind { LR, RL };

/// Two-time mode correlators of a coherent-state field:
///
///   LR: -(i/hbar) *  alpha_s * conj(alpha_s')           * phase
///   RL: -(i/hbar) * (alpha_s * conj(alpha_s') + delta_ss') * phase
///
/// with phase = exp(-i*omega_s*t + i*omega_s'*tau).  The delta term in RL is
/// the vacuum (spontaneous) contribution; LR vanishes for undriven modes.
cplx field_green(const std::vector<FieldMode>& modes, FieldGreenKind kind,
                 int s, int sp, double t, double tau);

}  // namespace negf
