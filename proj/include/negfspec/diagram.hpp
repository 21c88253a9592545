#pragma once

#include "negfspec/core_model.hpp"
#include "negfspec/propagators.hpp"

#include <string>
#include <vector>

/// Automatic generation and compilation of partially time-ordered loop
/// diagrams for radiative observables of a few-level emitter.
///
/// A loop diagram orders interactions along each density-matrix strand (ket
/// and bra) separately but leaves the relative order of the two strands free;
/// expanding a loop into all valid interleavings of the two strands yields
/// the familiar fully time-ordered double-sided diagrams.
///
/// Engine rules (the single source of truth used by every kernel):
///  * every interaction either raises the emitter while absorbing a photon or
///    lowers it while emitting one (rotating-wave pairing);
///  * an interaction contributes +omega_mode (raise) or -omega_mode (lower)
///    to cumulative frequency arguments, on either strand;
///  * loop traversal order is: ket strand in chronological order (observation
///    last), then bra strand in reverse chronological order;
///  * the first (#ket - 1) loop segments carry retarded resolvents with a
///    factor +i each, the remaining segments advanced resolvents with -i;
///  * a loop carries sign (-1)^(number of bra-strand expansion interactions);
///  * stimulated detection sums two anchor families: observation-raising
///    (weight +1) and observation-lowering (weight -1).
namespace negf {

enum class Strand { ket, bra };
enum class VertexOp { raise, lower };
enum class Arrow { in, out };
enum class Role { observation, signal_anchor, expansion };

struct Interaction {
  Strand strand = Strand::ket;
  VertexOp op = VertexOp::raise;
  int mode = 0;           ///< index into the field-mode list
  Role role = Role::expansion;
  std::string label;      ///< time label used for rendering ("t1", "tau", ...)

  /// Diagrammatic photon-arrow direction: inward on the ket for raising
  /// interactions and on the bra for lowering ones.
  Arrow arrow() const {
    const bool in = (strand == Strand::ket) == (op == VertexOp::raise);
    return in ? Arrow::in : Arrow::out;
  }
  /// +1 if the interaction annihilates a photon (emitter raised), else -1.
  int signed_freq() const { return op == VertexOp::raise ? +1 : -1; }
  /// Rotating-wave pairing: photon annihilation always accompanies raising.
  bool annihilates_photon() const { return op == VertexOp::raise; }

  bool operator==(const Interaction&) const = default;
};

/// Detection kind of the tracked signal mode.
///  * spontaneous: undriven signal mode, vacuum-seeded emission
///    (observation lowers on the ket, anchor raises on the bra).
///  * stimulated: driven signal mode, photon-flux detection (both anchor
///    families).
///  * amplitude: coherent polarization amplitude at a frequency combination
///    of the incoming modes (observation only, no anchor partner).
enum class DetectionKind { spontaneous, stimulated, amplitude };

struct Process {
  int signal_mode = -1;
  DetectionKind detection = DetectionKind::spontaneous;
  /// (mode index, number of expansion interactions) per incoming mode.
  std::vector<std::pair<int, int>> incoming;
  /// amplitude detection only: net raising count per incoming entry; the
  /// emitted combination frequency is sum(net_m * omega_m).
  std::vector<int> net;

  int expansion_order() const {
    int k = 0;
    for (const auto& [m, c] : incoming) k += c;
    return k;
  }
};

struct LoopDiagram {
  std::vector<Interaction> ket;  ///< chronological, observation last
  std::vector<Interaction> bra;  ///< chronological
  int sign = 1;                  ///< (-1)^(#bra expansion interactions)
  int family_weight = 1;         ///< -1 for the observation-lowering stimulated family
  DetectionKind detection = DetectionKind::spontaneous;

  /// Traversal order: ket chronological, then bra reverse chronological.
  std::vector<Interaction> loop_order() const;
  int n_vertices() const {
    return static_cast<int>(ket.size() + bra.size());
  }
  /// Count of time-ordered (double-sided) diagrams this loop expands into.
  long feynman_count() const;
};

/// Fully time-ordered expansion of one loop.
struct FeynmanDiagram {
  LoopDiagram parent;
  std::vector<Interaction> global;  ///< earliest..latest, observation last
};

/// Enumerates all realizable loop diagrams of a process: every distinct
/// assignment of the expansion interactions to the two strands, in every
/// distinct per-strand order, that (a) keeps a ground-state-started emitter
/// path alive on both strands and (b) lets the two strands meet in a common
/// final level.  Output is canonically ordered (bra expansion count, then
/// lexicographic arrow/mode/op pattern along the loop) and deterministic.
std::vector<LoopDiagram> generate_loops(const LevelScheme& s,
                                        const std::vector<FieldMode>& modes,
                                        const Process& p);

/// All valid interleavings of the two strands of one loop.
std::vector<FeynmanDiagram> decompose(const LoopDiagram& loop);

/// A compiled frequency-domain loop expression: alternating dipole operators
/// and resolvents along the loop traversal with cumulative frequency
/// arguments (integer coefficients per mode, ground offset implied).
struct FreqExpression {
  std::vector<Interaction> vertices;            ///< loop order
  std::vector<std::vector<int>> args;           ///< per segment: mode coefficients
  std::vector<Branch> branches;                 ///< per segment
  cplx scalar_prefactor;  ///< sign * i^(#retarded) * (-i)^(#advanced)
  int family_weight = 1;

  /// <g| op_{n-1} G(...) ... op_1 G(arg_0) op_0 |g> evaluated at the given
  /// per-mode frequencies (resolvent adds the ground offset internally).
  cplx bracket(const LevelScheme& s, const DipolePartition& dp,
               const std::vector<double>& omegas) const;
  /// scalar_prefactor * bracket (family weight and field amplitudes are
  /// applied by the signal kernels).
  cplx evaluate(const LevelScheme& s, const DipolePartition& dp,
                const std::vector<double>& omegas) const;
  /// Human-readable traversal, e.g. "<g| V G+(+w0) V+ ... |g>".
  std::string render() const;
};

FreqExpression compile_frequency(const LoopDiagram& loop, const Process& p);

/// Frequency-domain value of a single fully time-ordered diagram, evaluated
/// through pair-state (density-matrix) resolvents.  Summing over
/// decompose(loop) reproduces compile_frequency(loop).evaluate(...) exactly.
cplx feynman_frequency_value(const FeynmanDiagram& fd, const LevelScheme& s,
                             const DipolePartition& dp, const Process& p,
                             const std::vector<double>& omegas);

/// Time-ordered integrand descriptor of one diagram: the theta-function chain
/// over ordered vertex times plus, per inter-vertex gap, the cumulative field
/// phase and which strands are damped.  Coinciding times carry weight 1/2
/// (trapezoid end weights implement the step function at zero).
struct ThetaTerm {
  FeynmanDiagram diagram;
  std::vector<std::vector<int>> phase;  ///< per gap: mode coefficients of the field phase
  std::vector<bool> ket_active;         ///< per gap: ket strand already started
  std::vector<bool> bra_active;         ///< per gap: bra strand already started
  std::string theta_chain;              ///< e.g. "theta(t-t2) theta(t2-t1)"
};

ThetaTerm compile_time(const FeynmanDiagram& fd, const Process& p);

/// Deterministic renderings of a loop set.
std::string render_ascii(const std::vector<LoopDiagram>& loops);
std::string render_dot(const std::vector<LoopDiagram>& loops);

/// Deterministic JSON listing; from_json(to_json(x)) reproduces x and
/// re-serializes byte-identically.
std::string diagrams_to_json(const Process& p,
                             const std::vector<LoopDiagram>& loops);
struct ParsedDiagrams {
  Process process;
  std::vector<LoopDiagram> loops;
};
ParsedDiagrams diagrams_from_json(const std::string& text);

const char* to_string(Strand s);
const char* to_string(VertexOp v);
const char* to_string(Role r);
const char* to_string(DetectionKind d);

}  // namespace negf
