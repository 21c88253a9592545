#pragma once

#include "negfspec/core_model.hpp"
#include "negfspec/diagram.hpp"

#include <stdexcept>
#include <vector>

/// Signal kernels: frequency- and time-domain detection rates built on the
/// loop-diagram engine.
///
/// Master formulas (hbar = 1).  With
///   loop_value = sign * i^(#retarded) * (-i)^(#advanced) * <loop bracket>
/// and `fields` the product of classical envelopes over the driven
/// interaction vertices of a loop (raising vertex: E_m, lowering: conj(E_m)),
/// the stationary rates are
///   spontaneous:  S = C_spont(omega_s) * (-1)^n * Re sum_l loop_value * fields
///   stimulated:   S = C_stim * (-1)^(n-1)
///                       * Re sum_l family_weight * loop_value * fields
///   amplitude:    P = (-i)^k * sum_l loop_value * fields
/// where n counts the driven incoming pairs and k the expansion order.  The
/// detected-mode quantum factor is part of C_spont; driven-mode vacuum terms
/// enter as per-loop multiplicative weights (1 + 1/|alpha_m|^2) attached where
/// the photon commutator survives the contour ordering (see vacuum_weight).
///
/// The time-domain kernels integrate the fully ordered expansions of the same
/// loops over a uniform grid with exact exponential propagation between nodes
/// and trapezoid weights (so coinciding interaction times carry weight 1/2);
/// for stationary envelopes their long-time limits reproduce the
/// frequency-domain rates analytically.
namespace negf {

/// Failure of a numerical safety check (grid too coarse, saturated state
/// space, non-convergence).  The command-line driver maps it to exit code 4.
class numerical_guard_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Uniform time grid.  dt = 0 selects the default step (shortest emitter
/// oscillation period / 40); steps coarser than period / 20 raise
/// numerical_guard_error.
struct TimeGrid {
  double t_end = 200.0;
  double dt = 0.0;
};

/// Default quadrature step for a scheme: shortest level-splitting period /40.
double default_time_step(const LevelScheme& s);
/// Resolved (step count, dt) of a grid; throws numerical_guard_error when the
/// requested step under-resolves the fastest level splitting.
int resolve_time_grid(const LevelScheme& s, const TimeGrid& g, double* dt_out);

// ---------------------------------------------------------------------------
// shared prefactors and field scalars
// ---------------------------------------------------------------------------

/// Detection-family constant:
///   spontaneous: 4*pi*omega_s/volume (physical) or 1/pi (normalized);
///   stimulated and amplitude: 4 (physical) or 1 (normalized).
double signal_prefactor(const ModelConstants& c, DetectionKind kind,
                        double omega_s, double volume);

/// Classical envelope used by the kernels: coupling()*alpha in physical mode,
/// bare alpha in normalized mode.
cplx envelope_amplitude(const ModelConstants& c, const FieldMode& m);
/// Same with the mode carrier replaced by an explicit frequency (grid scans
/// move the physical coupling along with the resolvent arguments).
cplx envelope_at(const ModelConstants& c, const FieldMode& m, double omega);

/// Product of classical envelopes over the driven vertices of a loop,
/// evaluated at the given per-mode frequencies (amplitude detection: the
/// observation vertex carries no envelope).
cplx classical_field_factor(const ModelConstants& c,
                            const std::vector<FieldMode>& modes,
                            const LoopDiagram& loop,
                            const std::vector<double>& omegas);

/// Multiplicative quantum-field weight of a loop: for every driven
/// raising/lowering vertex pair of one mode the commutator term survives the
/// contour ordering iff the raising vertex sits later on the ket strand,
/// earlier on the bra strand, or on the bra with its partner on the ket; each
/// surviving pair contributes a factor (1 + 1/|alpha_m|^2).
double vacuum_weight(const LoopDiagram& loop,
                     const std::vector<FieldMode>& modes);

// ---------------------------------------------------------------------------
// frequency domain
// ---------------------------------------------------------------------------

/// Reusable compiled plan of one process.
struct SignalPlan {
  Process process;
  std::vector<LoopDiagram> loops;
  std::vector<FreqExpression> exprs;  ///< aligned with loops
  std::vector<double> vacuum;         ///< per-loop quantum-field weight
  int pair_count = 0;                 ///< incoming pairs n
};

SignalPlan make_plan(const LevelScheme& s, const std::vector<FieldMode>& modes,
                     const Process& p, const ModelConstants& c);

/// sum_l family_weight * fields_l * [vacuum_l] * exprs_l.evaluate(omegas).
cplx plan_sum(const LevelScheme& s, const DipolePartition& dp,
              const std::vector<FieldMode>& modes, const SignalPlan& plan,
              const std::vector<double>& omegas, const ModelConstants& c,
              bool include_vacuum);

/// Detected stationary rate of a balanced (spontaneous/stimulated) plan.
double plan_rate(const LevelScheme& s, const DipolePartition& dp,
                 const std::vector<FieldMode>& modes, const SignalPlan& plan,
                 const std::vector<double>& omegas, const ModelConstants& c,
                 bool include_vacuum = true);

/// Stationary polarization envelope of an amplitude plan (carrier divided
/// out): P = (-i)^k sum loop_value * fields.
cplx plan_amplitude(const LevelScheme& s, const DipolePartition& dp,
                    const std::vector<FieldMode>& modes, const SignalPlan& plan,
                    const std::vector<double>& omegas, const ModelConstants& c);

// ---------------------------------------------------------------------------
// named processes and kernels
// ---------------------------------------------------------------------------

/// Emission into an undriven signal mode after one driven pair.
Process sle_process(int in_mode, int sig_mode);
/// Probe-transmission change after one pump pair (stimulated detection).
Process pump_probe_process(int pump_mode, int probe_mode);

double sle_frequency(const LevelScheme& s, const std::vector<FieldMode>& modes,
                     int in_mode, int sig_mode, double omega_in,
                     double omega_sig, const ModelConstants& c);

/// Independent hand-coded resolvent-product form of the same emission rate
/// (dense matrix algebra, no diagram engine); used to cross-check the
/// compiled expression.
double sle_frequency_reference(const LevelScheme& s,
                               const std::vector<FieldMode>& modes, int in_mode,
                               int sig_mode, double omega_in, double omega_sig,
                               const ModelConstants& c);

/// Closed-form resonance-scattering line: sum over final levels c of
/// |chi_c(omega_in)|^2 * (gamma_c+eta) / ((omega_in-omega_sig-omega_cg)^2 +
/// (gamma_c+eta)^2) with chi_c = sum_b mu_gb mu_bc /
/// (omega_in - omega_bg + i(gamma_b+eta)), times the spontaneous prefactor.
double kramers_heisenberg(const LevelScheme& s,
                          const std::vector<FieldMode>& modes, int in_mode,
                          int sig_mode, double omega_in, double omega_sig,
                          const ModelConstants& c);

double pump_probe_frequency(const LevelScheme& s,
                            const std::vector<FieldMode>& modes, int pump_mode,
                            int probe_mode, double omega_pump,
                            double omega_probe, const ModelConstants& c,
                            bool include_vacuum = true);

// ---------------------------------------------------------------------------
// time domain
// ---------------------------------------------------------------------------

struct TimeSeries {
  std::vector<double> t;
  std::vector<double> value;
};
struct ComplexSeries {
  std::vector<double> t;
  std::vector<cplx> value;
};

/// Quadrature route: `factorized` evaluates every loop as a product of
/// per-strand chains (partially ordered form); `interleaved` sums the fully
/// time-ordered expansions.  Both use the same grid and agree to rounding.
enum class TimeRoute { factorized, interleaved };

/// Detected rate S(t) for envelopes switched on at t = 0 and stationary
/// afterwards.  Balanced (spontaneous/stimulated) processes only.
TimeSeries signal_time(const LevelScheme& s,
                       const std::vector<FieldMode>& modes, const Process& p,
                       const std::vector<double>& omegas,
                       const ModelConstants& c, const TimeGrid& grid,
                       TimeRoute route, bool include_vacuum);

/// Polarization envelope P(t) of an amplitude process on the same grid.
ComplexSeries polarization_time(const LevelScheme& s,
                                const std::vector<FieldMode>& modes,
                                const Process& p,
                                const std::vector<double>& omegas,
                                const ModelConstants& c, const TimeGrid& grid,
                                TimeRoute route);

TimeSeries sle_time(const LevelScheme& s, const std::vector<FieldMode>& modes,
                    int in_mode, int sig_mode, double omega_in,
                    double omega_sig, const ModelConstants& c,
                    const TimeGrid& grid,
                    TimeRoute route = TimeRoute::interleaved);

TimeSeries pump_probe_time(const LevelScheme& s,
                           const std::vector<FieldMode>& modes, int pump_mode,
                           int probe_mode, double omega_pump,
                           double omega_probe, const ModelConstants& c,
                           const TimeGrid& grid,
                           TimeRoute route = TimeRoute::interleaved,
                           bool include_vacuum = true);

/// Classical-field limit of the same probe-transmission kernel: identical
/// quadrature with every quantum-field (vacuum) weight dropped, which is the
/// third-order-susceptibility result.
TimeSeries pp_chi3(const LevelScheme& s, const std::vector<FieldMode>& modes,
                   int pump_mode, int probe_mode, double omega_pump,
                   double omega_probe, const ModelConstants& c,
                   const TimeGrid& grid,
                   TimeRoute route = TimeRoute::interleaved);

// ---------------------------------------------------------------------------
// bare-emitter two-point functions (closed forms, ground state)
// ---------------------------------------------------------------------------

/// Contour-ordered dipole two-point functions of the undriven emitter,
/// D_XY(t, tau) = -(i/hbar) <T V_X(t) V_Y^dag(tau)>:
///   lr: left observation, right partner -- identically zero from the ground
///       state (the lowering operator kills the ket);
///   rl: -(i/hbar) <g| V(tau) V^dag(t) |g> =
///       -(i/hbar) sum_x |mu_gx|^2 e^{(i omega_xg - gamma_x - eta)(t-tau)}
///       evaluated with the decaying branch for either time order.
struct GreenPair {
  cplx lr;
  cplx rl;
};
GreenPair ground_state_greens(const LevelScheme& s, double t, double tau);

/// <T V_+^dag(t) V_-(tau)> with V_pm = (V_L +- V_R)/sqrt(2), composed from
/// the four contour-ordered two-point functions.  Equals
/// (hbar/i) [D_RL(tau,t) - D_LR(tau,t)] on tau < t and vanishes on tau > t.
cplx pm_correlator(const LevelScheme& s, double t, double tau);

/// Stationary photon-flux change of one driven mode to lowest order
/// (negative on resonance: absorption removes photons from the mode):
///   S = 2 Im integral dtau D_RL(tau,t) E(t) E*(tau)
///     = -2 |E|^2 sum_x |mu_gx|^2 (gamma_x+eta) /
///       ((omega-omega_xg)^2 + (gamma_x+eta)^2).
/// Note the probe-transmission kernels use the opposite overall sign and a
/// factor 2 (their printed convention); nothing cross-compares the two.
double stimulated_rate(const LevelScheme& s, const ModelConstants& c,
                       const FieldMode& drive, double omega_drive);

// ---------------------------------------------------------------------------
// generic wave mixing
// ---------------------------------------------------------------------------

/// Stationary rate of an arbitrary balanced process (spontaneous emission
/// after n driven pairs, or stimulated detection).
double wave_mixing(const LevelScheme& s, const std::vector<FieldMode>& modes,
                   const Process& p, const std::vector<double>& omegas,
                   const ModelConstants& c, bool include_vacuum = true);

/// Stationary polarization envelope of an amplitude process.
cplx wave_mixing_amplitude(const LevelScheme& s,
                           const std::vector<FieldMode>& modes,
                           const Process& p,
                           const std::vector<double>& omegas,
                           const ModelConstants& c);

// ---------------------------------------------------------------------------
// grid scans (OpenMP-parallel with a serial reference path)
// ---------------------------------------------------------------------------

/// Worker count: NEGF_THREADS environment variable when set (>= 1), else the
/// OpenMP default; 1 when built without OpenMP.
int thread_count();

/// Rate of `plan` with mode `scan_mode`'s frequency swept over `grid`
/// (other entries of `base` stay fixed).
std::vector<double> rate_scan(const LevelScheme& s,
                              const std::vector<FieldMode>& modes,
                              const SignalPlan& plan,
                              const ModelConstants& c,
                              const std::vector<double>& base, int scan_mode,
                              const std::vector<double>& grid,
                              bool include_vacuum, bool parallel);

/// Two-frequency map: rows sweep mode_a over grid_a, columns mode_b/grid_b.
RMat rate_map(const LevelScheme& s, const std::vector<FieldMode>& modes,
              const SignalPlan& plan, const ModelConstants& c,
              const std::vector<double>& base, int mode_a,
              const std::vector<double>& grid_a, int mode_b,
              const std::vector<double>& grid_b, bool include_vacuum,
              bool parallel);

}  // namespace negf
