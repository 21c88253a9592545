#pragma once

#include "negfspec/core_model.hpp"
#include "negfspec/kernels.hpp"

#include <vector>

/// Brute-force reference evolution: the emitter plus ONE quantized signal
/// mode truncated at Fock level n_max, with classical CW drives.  Everything
/// here is independent of the diagram engine.
///
/// Joint Hamiltonian (hbar = 1, rotating-wave coupling):
///   H(t) = H_mol + omega_sig a^dag a + g (a V^dag + a^dag V)
///          + sum_d [E_d e^{-i omega_d t} V^dag + conj(E_d) e^{+i omega_d t} V]
/// with g = sqrt(2*pi*hbar*omega_sig/volume) and E_d the classical envelope
/// of the drive mode.  Damping acts elementwise on molecular indices,
/// d rho_xy/dt -= (gamma_x + gamma_y) rho_xy, matching the per-level widths
/// of the resolvent kernels (without the numerical eta floor).
namespace negf {

struct OracleOptions {
  int n_max = 2;               ///< highest Fock level of the signal mode
  double t_end = 600.0;        ///< evolution window
  double dt = 0.0;             ///< 0: shortest oscillation period / 40
  double tail_fraction = 0.4;  ///< trailing window of the emission-slope fit
  double step_check = 1e-5;    ///< max relative slope drift of a half-step rerun
  bool check_half_step = true;
};

/// One classical continuous drive.
struct OracleDrive {
  int mode = 0;        ///< index into the mode list (envelope source)
  double omega = 0.0;  ///< drive frequency
};

/// Steady photon emission rate d<N>/dt into the quantized signal mode,
/// measured as the least-squares slope of <N>(t) over the trailing window.
/// Guards (numerical_guard_error): step under-resolution, trace bound,
/// Fock-space saturation (<N> exceeding n_max/2), half-step drift.
double oracle_emission_rate(const LevelScheme& s,
                            const std::vector<FieldMode>& modes,
                            const std::vector<OracleDrive>& drives,
                            int sig_mode, double omega_sig,
                            const ModelConstants& c, const OracleOptions& opt);

/// Emission spectrum over a signal-frequency grid (points are independent
/// evolutions; runs them in parallel, half-step check on the first point).
std::vector<double> oracle_spectrum(const LevelScheme& s,
                                    const std::vector<FieldMode>& modes,
                                    const std::vector<OracleDrive>& drives,
                                    int sig_mode,
                                    const std::vector<double>& omega_grid,
                                    const ModelConstants& c,
                                    const OracleOptions& opt);

/// Molecular two-time correlator Tr[op_late . E_{t-tau}[op_early . rho_g]]
/// by quantum regression under the same elementwise damping (closed form,
/// no eta floor); rho_g is the ground-state projector, t >= tau.
cplx two_time_correlator(const LevelScheme& s, const Mat& op_late,
                         const Mat& op_early, double t, double tau);

}  // namespace negf
