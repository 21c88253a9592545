#pragma once

#include "negfspec/core_model.hpp"
#include "negfspec/kernels.hpp"

#include <cstdint>
#include <vector>

/// Ensembles of identical, non-interacting emitters at fixed positions.
/// Per detected rate S(dk) the emitters contribute an incoherent part
/// proportional to N and a coherent part weighted by the phase-matching pair
/// sum F(dk); stimulated detection has no coherent pair term because distinct
/// emitters' dipole operators commute.
namespace negf {

/// f(dk) = sum_alpha exp(-i dk . r_alpha); |f|^2 = F(dk) + N.
cplx structure_factor(const std::vector<Vec3>& positions, const Vec3& dk);

/// Pair sum F(dk) = sum_{alpha != beta} exp(-i dk . (r_alpha - r_beta)) with
/// the diagonal excluded, computed as 2 sum_{alpha < beta} cos(...) so the
/// result is exactly real.  F(0) = N(N-1) and F >= -N everywhere.
double phase_matching_sum(const std::vector<Vec3>& positions, const Vec3& dk);

/// Literal complex double loop over ordered pairs of the same sum
/// (cross-check route; its imaginary part vanishes only up to rounding).
cplx phase_matching_sum_complex(const std::vector<Vec3>& positions,
                                const Vec3& dk);

/// Uniformly random positions in [0, box)^3 from a fixed-seed mt19937_64.
std::vector<Vec3> random_positions(int n, double box, std::uint64_t seed);

/// Coherent pair emission weight of an amplitude process: the rate emitted
/// at the combination frequency per unit F(dk),
///   (2*pi/volume) * omega_s * |P|^2   (physical)
///   |P|^2                             (normalized),
/// with omega_s and volume taken from the signal mode entry.
double coherent_term(const LevelScheme& s, const std::vector<FieldMode>& modes,
                     const Process& amp, const std::vector<double>& omegas,
                     const ModelConstants& c);

/// N-emitter spontaneous rate N * S_single + F(dk) * coherent_term, with
/// S_single the single-emitter balanced rate of `balanced` and the coherent
/// weight built from the matching amplitude process `amp`.
double total_spontaneous(const LevelScheme& s,
                         const std::vector<FieldMode>& modes,
                         const Process& balanced, const Process& amp,
                         const std::vector<double>& omegas,
                         const ModelConstants& c,
                         const std::vector<Vec3>& positions, const Vec3& dk);

/// Heterodyne detection of the ensemble polarization against a local
/// oscillator copy of mode `lo_mode`:
///   S(t) = (C_stim / hbar) * Im[ conj(E_LO) * P(t) * f(dk) ].
/// With the probe as its own local oscillator (dk = 0, f = N) this equals N
/// times the stimulated probe-transmission kernel up to the emitter's
/// spontaneous emission into the probe mode, which is smaller than the
/// classical term by 1/|alpha_probe|^2.
TimeSeries heterodyne_signal(const LevelScheme& s,
                             const std::vector<FieldMode>& modes,
                             const Process& amp,
                             const std::vector<double>& omegas,
                             const ModelConstants& c, const TimeGrid& grid,
                             int lo_mode, const std::vector<Vec3>& positions,
                             const Vec3& dk,
                             TimeRoute route = TimeRoute::interleaved);

/// Cross-emitter term of stimulated detection: distinct emitters' dipole
/// operators commute and their expectations factorize, so the two contour
/// orderings of the pair term coincide and the coherent stimulated signal
/// vanishes identically.  Assembles both orderings of the first-order pair
/// coherence (switch-on at t = 0) independently and returns the magnitude of
/// their difference.
double stimulated_coherent_term(const LevelScheme& s,
                                const std::vector<FieldMode>& modes,
                                int drive_mode, double omega_drive,
                                const ModelConstants& c, double t, double tau);

}  // namespace negf
