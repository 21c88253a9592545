#include "negfspec/kernels.hpp"

#include "negfspec/propagators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <stdexcept>

#ifdef NEGF_HAVE_OPENMP
#include <omp.h>
#endif

namespace negf {

namespace {

constexpr double kPi = std::numbers::pi;

cplx ipow(int k) {
  static const cplx tab[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return tab[((k % 4) + 4) % 4];
}

double level_spread(const LevelScheme& s) {
  double lo = s.omega.minCoeff(), hi = s.omega.maxCoeff();
  return hi - lo;
}

int process_pairs(const Process& p) {
  int n = 0;
  for (const auto& [m, cnt] : p.incoming) n += cnt / 2;
  return n;
}

double balanced_parity(const Process& p, int pairs) {
  // spontaneous: (-1)^n, stimulated: (-1)^(n-1); from the 2n (respectively
  // 2n+1) factors of -i carried by the expansion vertices.
  const int k = p.detection == DetectionKind::spontaneous ? pairs : pairs - 1;
  return (((k % 2) + 2) % 2 == 0) ? 1.0 : -1.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// grids
// ---------------------------------------------------------------------------

double default_time_step(const LevelScheme& s) {
  double spread = level_spread(s);
  if (spread <= 0.0) spread = 1.0;
  return 2.0 * kPi / spread / 40.0;
}

int resolve_time_grid(const LevelScheme& s, const TimeGrid& g, double* dt_out) {
  if (!(g.t_end > 0.0)) throw numerical_guard_error("time grid: t_end must be positive");
  double dt = g.dt > 0.0 ? g.dt : default_time_step(s);
  if (dt > 2.0 * default_time_step(s) * (1.0 + 1e-12))
    throw numerical_guard_error(
        "time grid: step under-resolves the fastest level splitting "
        "(need at least 20 nodes per oscillation period)");
  int n = static_cast<int>(std::ceil(g.t_end / dt - 1e-9));
  n = std::max(n, 2);
  *dt_out = g.t_end / n;
  return n;
}

// ---------------------------------------------------------------------------
// prefactors and field scalars
// ---------------------------------------------------------------------------

double signal_prefactor(const ModelConstants& c, DetectionKind kind,
                        double omega_s, double volume) {
  if (kind == DetectionKind::spontaneous) {
    return c.prefactor_mode == PrefactorMode::physical
               ? 4.0 * kPi * omega_s / (volume * kHbar * kHbar)
               : 1.0 / kPi;
  }
  return c.prefactor_mode == PrefactorMode::physical ? 4.0 : 1.0;
}

cplx envelope_at(const ModelConstants& c, const FieldMode& m, double omega) {
  if (c.prefactor_mode == PrefactorMode::normalized) return m.alpha;
  return std::sqrt(2.0 * kPi * kHbar * omega / m.volume) * m.alpha;
}

cplx envelope_amplitude(const ModelConstants& c, const FieldMode& m) {
  return envelope_at(c, m, m.omega);
}

cplx classical_field_factor(const ModelConstants& c,
                            const std::vector<FieldMode>& modes,
                            const LoopDiagram& loop,
                            const std::vector<double>& omegas) {
  cplx f = 1.0;
  for (const Interaction& v : loop.loop_order()) {
    if (loop.detection == DetectionKind::amplitude &&
        v.role == Role::observation)
      continue;
    const FieldMode& m = modes[static_cast<size_t>(v.mode)];
    if (m.alpha == cplx(0.0)) continue;
    const cplx e = envelope_at(c, m, omegas[static_cast<size_t>(v.mode)]);
    f *= v.op == VertexOp::raise ? e : std::conj(e);
  }
  return f;
}

double vacuum_weight(const LoopDiagram& loop,
                     const std::vector<FieldMode>& modes) {
  struct Pos {
    Strand strand;
    int idx;
  };
  double w = 1.0;
  for (int m = 0; m < static_cast<int>(modes.size()); ++m) {
    if (modes[static_cast<size_t>(m)].alpha == cplx(0.0)) continue;
    std::vector<Pos> raises, lowers;
    for (int i = 0; i < static_cast<int>(loop.ket.size()); ++i) {
      const Interaction& v = loop.ket[static_cast<size_t>(i)];
      if (v.mode != m) continue;
      (v.op == VertexOp::raise ? raises : lowers).push_back({Strand::ket, i});
    }
    for (int i = 0; i < static_cast<int>(loop.bra.size()); ++i) {
      const Interaction& v = loop.bra[static_cast<size_t>(i)];
      if (v.mode != m) continue;
      (v.op == VertexOp::raise ? raises : lowers).push_back({Strand::bra, i});
    }
    const size_t np = std::min(raises.size(), lowers.size());
    for (size_t i = 0; i < np; ++i) {
      const Pos a = raises[i], b = lowers[i];
      bool survives;
      if (a.strand == Strand::ket && b.strand == Strand::ket)
        survives = a.idx > b.idx;  // absorbed after emitted on the ket
      else if (a.strand == Strand::bra && b.strand == Strand::bra)
        survives = a.idx < b.idx;  // absorbed before emitted on the bra
      else
        survives = a.strand == Strand::bra;
      if (survives)
        w *= 1.0 + 1.0 / std::norm(modes[static_cast<size_t>(m)].alpha);
    }
  }
  return w;
}

// ---------------------------------------------------------------------------
// frequency-domain plans
// ---------------------------------------------------------------------------

SignalPlan make_plan(const LevelScheme& s, const std::vector<FieldMode>& modes,
                     const Process& p, const ModelConstants& c) {
  (void)c;
  SignalPlan plan;
  plan.process = p;
  plan.loops = generate_loops(s, modes, p);
  plan.exprs.reserve(plan.loops.size());
  plan.vacuum.reserve(plan.loops.size());
  for (const LoopDiagram& l : plan.loops) {
    plan.exprs.push_back(compile_frequency(l, p));
    plan.vacuum.push_back(vacuum_weight(l, modes));
  }
  plan.pair_count = process_pairs(p);
  return plan;
}

cplx plan_sum(const LevelScheme& s, const DipolePartition& dp,
              const std::vector<FieldMode>& modes, const SignalPlan& plan,
              const std::vector<double>& omegas, const ModelConstants& c,
              bool include_vacuum) {
  cplx acc = 0.0;
  for (size_t i = 0; i < plan.loops.size(); ++i) {
    cplx v = plan.exprs[i].evaluate(s, dp, omegas);
    v *= classical_field_factor(c, modes, plan.loops[i], omegas);
    v *= static_cast<double>(plan.loops[i].family_weight);
    if (include_vacuum) v *= plan.vacuum[i];
    acc += v;
  }
  return acc;
}

double plan_rate(const LevelScheme& s, const DipolePartition& dp,
                 const std::vector<FieldMode>& modes, const SignalPlan& plan,
                 const std::vector<double>& omegas, const ModelConstants& c,
                 bool include_vacuum) {
  const Process& p = plan.process;
  if (p.detection == DetectionKind::amplitude)
    throw std::invalid_argument("plan_rate: amplitude detection has no rate; "
                                "use plan_amplitude");
  const cplx sum = plan_sum(s, dp, modes, plan, omegas, c, include_vacuum);
  const double pref =
      signal_prefactor(c, p.detection, omegas[static_cast<size_t>(p.signal_mode)],
                       modes[static_cast<size_t>(p.signal_mode)].volume);
  return pref * balanced_parity(p, plan.pair_count) * sum.real();
}

cplx plan_amplitude(const LevelScheme& s, const DipolePartition& dp,
                    const std::vector<FieldMode>& modes, const SignalPlan& plan,
                    const std::vector<double>& omegas,
                    const ModelConstants& c) {
  if (plan.process.detection != DetectionKind::amplitude)
    throw std::invalid_argument("plan_amplitude: needs an amplitude process");
  const cplx sum = plan_sum(s, dp, modes, plan, omegas, c, true);
  return std::conj(ipow(plan.process.expansion_order())) * sum;
}

// ---------------------------------------------------------------------------
// named processes and frequency kernels
// ---------------------------------------------------------------------------

Process sle_process(int in_mode, int sig_mode) {
  Process p;
  p.signal_mode = sig_mode;
  p.detection = DetectionKind::spontaneous;
  p.incoming = {{in_mode, 2}};
  return p;
}

Process pump_probe_process(int pump_mode, int probe_mode) {
  Process p;
  p.signal_mode = probe_mode;
  p.detection = DetectionKind::stimulated;
  p.incoming = {{pump_mode, 2}};
  return p;
}

namespace {

std::vector<double> base_frequencies(const std::vector<FieldMode>& modes) {
  std::vector<double> w(modes.size());
  for (size_t i = 0; i < modes.size(); ++i) w[i] = modes[i].omega;
  return w;
}

}  // namespace

double sle_frequency(const LevelScheme& s, const std::vector<FieldMode>& modes,
                     int in_mode, int sig_mode, double omega_in,
                     double omega_sig, const ModelConstants& c) {
  const DipolePartition dp = partition_dipole(s);
  const SignalPlan plan = make_plan(s, modes, sle_process(in_mode, sig_mode), c);
  std::vector<double> w = base_frequencies(modes);
  w[static_cast<size_t>(in_mode)] = omega_in;
  w[static_cast<size_t>(sig_mode)] = omega_sig;
  return plan_rate(s, dp, modes, plan, w, c, true);
}

double sle_frequency_reference(const LevelScheme& s,
                               const std::vector<FieldMode>& modes, int in_mode,
                               int sig_mode, double omega_in, double omega_sig,
                               const ModelConstants& c) {
  const DipolePartition dp = partition_dipole(s);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(s.n());
  v(s.ground) = 1.0;
  v = dp.raising * v;
  v = resolvent(s, omega_in, Branch::retarded) * v;
  v = dp.lowering * v;
  v = resolvent(s, omega_in - omega_sig, Branch::advanced) * v;
  v = dp.raising * v;
  v = resolvent(s, omega_in, Branch::advanced) * v;
  v = dp.lowering * v;
  const double inten =
      std::norm(envelope_at(c, modes[static_cast<size_t>(in_mode)], omega_in));
  const double pref =
      signal_prefactor(c, DetectionKind::spontaneous, omega_sig,
                       modes[static_cast<size_t>(sig_mode)].volume);
  return pref * inten * v(s.ground).imag();
}

double kramers_heisenberg(const LevelScheme& s,
                          const std::vector<FieldMode>& modes, int in_mode,
                          int sig_mode, double omega_in, double omega_sig,
                          const ModelConstants& c) {
  const DipolePartition dp = partition_dipole(s);
  const double wg = s.omega(s.ground);
  double line = 0.0;
  for (int cc = 0; cc < s.n(); ++cc) {
    cplx chi = 0.0;
    for (int b = 0; b < s.n(); ++b) {
      const cplx num = dp.lowering(cc, b) * dp.raising(b, s.ground);
      if (num == cplx(0.0)) continue;
      chi += num / cplx(omega_in - (s.omega(b) - wg), effective_width(s, b));
    }
    if (chi == cplx(0.0)) continue;
    const double gc = effective_width(s, cc);
    const double det = omega_in - omega_sig - (s.omega(cc) - wg);
    line += std::norm(chi) * gc / (det * det + gc * gc);
  }
  const double inten =
      std::norm(envelope_at(c, modes[static_cast<size_t>(in_mode)], omega_in));
  const double pref =
      signal_prefactor(c, DetectionKind::spontaneous, omega_sig,
                       modes[static_cast<size_t>(sig_mode)].volume);
  return pref * inten * line;
}

double pump_probe_frequency(const LevelScheme& s,
                            const std::vector<FieldMode>& modes, int pump_mode,
                            int probe_mode, double omega_pump,
                            double omega_probe, const ModelConstants& c,
                            bool include_vacuum) {
  const DipolePartition dp = partition_dipole(s);
  const SignalPlan plan =
      make_plan(s, modes, pump_probe_process(pump_mode, probe_mode), c);
  std::vector<double> w = base_frequencies(modes);
  w[static_cast<size_t>(pump_mode)] = omega_pump;
  w[static_cast<size_t>(probe_mode)] = omega_probe;
  return plan_rate(s, dp, modes, plan, w, c, include_vacuum);
}

// ---------------------------------------------------------------------------
// time-domain quadrature
// ---------------------------------------------------------------------------

namespace {

/// One Volterra composition level with exact exponential propagation:
/// replaces J by u -> integral_0^u e^{lambda (u-s)} J(s) ds on the uniform
/// grid (trapezoid node weights, single O(N) sweep in place).
void volterra_level(std::vector<cplx>& J, cplx lambda, double h) {
  const cplx E = std::exp(lambda * h);
  cplx prev = J[0];
  cplx acc = 0.0;
  J[0] = 0.0;
  for (size_t k = 1; k < J.size(); ++k) {
    const cplx cur = J[k];
    acc = E * (acc + 0.5 * h * prev) + 0.5 * h * cur;
    J[k] = acc;
    prev = cur;
  }
}

/// Material path of one ordered diagram: dipole amplitude plus one complex
/// gap exponent per Volterra level (earliest gap first).
struct PathChain {
  cplx amplitude;
  std::vector<cplx> lambda;
};

/// All material paths of a fully ordered diagram.  Gap exponents mirror the
/// frequency-domain pair denominators: lambda = i*(phase - (w_ket - w_bra))
/// - damping, with the damping gated by strand activity.
void ordered_chains(const LevelScheme& s, const DipolePartition& dp,
                    const ThetaTerm& th, const std::vector<double>& omegas,
                    std::vector<PathChain>& out, double* max_rate) {
  const auto& g = th.diagram.global;
  const int nv = static_cast<int>(g.size());
  std::vector<cplx> lam(static_cast<size_t>(nv - 1));
  std::function<void(int, int, int, cplx)> rec = [&](int j, int k, int b,
                                                     cplx amp) {
    if (j == nv) {
      if (k == b) out.push_back({amp, lam});
      return;
    }
    const Interaction& v = g[static_cast<size_t>(j)];
    const Mat& op = v.op == VertexOp::raise ? dp.raising : dp.lowering;
    for (int x = 0; x < s.n(); ++x) {
      cplx a;
      int nk = k, nb = b;
      if (v.strand == Strand::ket) {
        a = op(x, k);
        nk = x;
      } else {
        a = op(b, x);
        nb = x;
      }
      if (a == cplx(0.0)) continue;
      if (j + 1 < nv) {
        double cw = 0.0;
        const auto& ph = th.phase[static_cast<size_t>(j)];
        for (size_t i = 0; i < ph.size(); ++i) cw += ph[i] * omegas[i];
        const double damp =
            (th.ket_active[static_cast<size_t>(j)] ? effective_width(s, nk)
                                                   : 0.0) +
            (th.bra_active[static_cast<size_t>(j)] ? effective_width(s, nb)
                                                   : 0.0);
        const double rate = cw - (s.omega(nk) - s.omega(nb));
        lam[static_cast<size_t>(j)] = cplx(-damp, rate);
        if (max_rate) *max_rate = std::max(*max_rate, std::abs(rate));
      }
      rec(j + 1, nk, nb, amp * a);
    }
  };
  rec(0, s.ground, s.ground, cplx(1.0));
}

/// Per final level, the summed chain curves of one strand (factorized route).
/// Ket strands have one gap fewer than vertices (the observation rides the
/// evaluation time); bra strands add a terminal gap up to the evaluation
/// time.  Phases are taken relative to the ground level, which renders the
/// not-yet-started strand inert, exactly as the pair walk does.
void strand_curves(const LevelScheme& s, const DipolePartition& dp,
                   const std::vector<Interaction>& strand, bool is_ket,
                   const std::vector<double>& omegas, int grid_n, double h,
                   std::vector<std::vector<cplx>>& per_final,
                   double* max_rate) {
  per_final.assign(static_cast<size_t>(s.n()), {});
  const double wg = s.omega(s.ground);
  const int nv = static_cast<int>(strand.size());
  const int levels = is_ket ? nv - 1 : nv;
  if (nv == 0) {
    per_final[static_cast<size_t>(s.ground)]
        .assign(static_cast<size_t>(grid_n + 1), cplx(1.0));
    return;
  }
  std::vector<cplx> lam(static_cast<size_t>(levels));
  std::vector<double> cum(omegas.size(), 0.0);
  std::function<void(int, int, cplx)> rec = [&](int j, int x, cplx amp) {
    if (j == nv) {
      std::vector<cplx>& acc = per_final[static_cast<size_t>(x)];
      if (acc.empty()) acc.assign(static_cast<size_t>(grid_n + 1), cplx(0.0));
      std::vector<cplx> J(static_cast<size_t>(grid_n + 1), cplx(1.0));
      for (int l = 0; l < levels; ++l) volterra_level(J, lam[static_cast<size_t>(l)], h);
      for (size_t k = 0; k < J.size(); ++k) acc[k] += amp * J[k];
      return;
    }
    const Interaction& v = strand[static_cast<size_t>(j)];
    const Mat& op = v.op == VertexOp::raise ? dp.raising : dp.lowering;
    const double save = cum[static_cast<size_t>(v.mode)];
    cum[static_cast<size_t>(v.mode)] += v.signed_freq() * omegas[static_cast<size_t>(v.mode)];
    double cw = 0.0;
    for (double q : cum) cw += q;
    for (int y = 0; y < s.n(); ++y) {
      const cplx a = is_ket ? op(y, x) : op(x, y);
      if (a == cplx(0.0)) continue;
      if (j < levels) {
        const double mat = s.omega(y) - wg;
        const double rate = cw + (is_ket ? -mat : mat);
        lam[static_cast<size_t>(j)] = cplx(-effective_width(s, y), rate);
        if (max_rate) *max_rate = std::max(*max_rate, std::abs(rate));
      }
      rec(j + 1, y, amp * a);
    }
    cum[static_cast<size_t>(v.mode)] = save;
  };
  rec(0, s.ground, cplx(1.0));
}

/// Raw value curve of one loop: sum over material paths of the ordered (or
/// strand-factorized) nested time integrals.  Excludes the loop sign, family
/// weight, field amplitudes and all detection prefactors.
std::vector<cplx> loop_curve(const LevelScheme& s, const DipolePartition& dp,
                             const LoopDiagram& loop, const Process& p,
                             const std::vector<double>& omegas, int grid_n,
                             double h, TimeRoute route) {
  std::vector<cplx> curve(static_cast<size_t>(grid_n + 1), cplx(0.0));
  double max_rate = 0.0;
  if (route == TimeRoute::interleaved) {
    for (const FeynmanDiagram& fd : decompose(loop)) {
      const ThetaTerm th = compile_time(fd, p);
      std::vector<PathChain> chains;
      ordered_chains(s, dp, th, omegas, chains, &max_rate);
      for (const PathChain& pc : chains) {
        std::vector<cplx> J(static_cast<size_t>(grid_n + 1), cplx(1.0));
        for (cplx lm : pc.lambda) volterra_level(J, lm, h);
        for (size_t k = 0; k < J.size(); ++k) curve[k] += pc.amplitude * J[k];
      }
    }
  } else {
    // observation rides the evaluation time on the ket; kets with only the
    // observation vertex still contribute their dipole amplitudes.
    std::vector<std::vector<cplx>> ket_curves, bra_curves;
    strand_curves(s, dp, loop.ket, true, omegas, grid_n, h, ket_curves,
                  &max_rate);
    strand_curves(s, dp, loop.bra, false, omegas, grid_n, h, bra_curves,
                  &max_rate);
    for (int x = 0; x < s.n(); ++x) {
      const auto& kc = ket_curves[static_cast<size_t>(x)];
      const auto& bc = bra_curves[static_cast<size_t>(x)];
      if (kc.empty() || bc.empty()) continue;
      for (size_t k = 0; k < curve.size(); ++k) curve[k] += kc[k] * bc[k];
    }
  }
  if (h * max_rate > 2.0 * kPi / 20.0)
    throw numerical_guard_error(
        "time grid: step under-resolves an interaction detuning "
        "(need at least 20 nodes per oscillation period)");
  return curve;
}

}  // namespace

TimeSeries signal_time(const LevelScheme& s,
                       const std::vector<FieldMode>& modes, const Process& p,
                       const std::vector<double>& omegas,
                       const ModelConstants& c, const TimeGrid& grid,
                       TimeRoute route, bool include_vacuum) {
  if (p.detection == DetectionKind::amplitude)
    throw std::invalid_argument(
        "signal_time: amplitude detection has no rate; use polarization_time");
  const DipolePartition dp = partition_dipole(s);
  double h = 0.0;
  const int n = resolve_time_grid(s, grid, &h);
  const std::vector<LoopDiagram> loops = generate_loops(s, modes, p);
  std::vector<cplx> total(static_cast<size_t>(n + 1), cplx(0.0));
  for (const LoopDiagram& loop : loops) {
    const std::vector<cplx> curve =
        loop_curve(s, dp, loop, p, omegas, n, h, route);
    cplx w = classical_field_factor(c, modes, loop, omegas);
    w *= static_cast<double>(loop.sign * loop.family_weight);
    if (include_vacuum) w *= vacuum_weight(loop, modes);
    for (size_t k = 0; k < total.size(); ++k) total[k] += w * curve[k];
  }
  const double pref =
      signal_prefactor(c, p.detection, omegas[static_cast<size_t>(p.signal_mode)],
                       modes[static_cast<size_t>(p.signal_mode)].volume);
  const double par = balanced_parity(p, process_pairs(p));
  TimeSeries out;
  out.t.resize(total.size());
  out.value.resize(total.size());
  for (size_t k = 0; k < total.size(); ++k) {
    out.t[k] = static_cast<double>(k) * h;
    out.value[k] = pref * par * total[k].real();
  }
  return out;
}

ComplexSeries polarization_time(const LevelScheme& s,
                                const std::vector<FieldMode>& modes,
                                const Process& p,
                                const std::vector<double>& omegas,
                                const ModelConstants& c, const TimeGrid& grid,
                                TimeRoute route) {
  if (p.detection != DetectionKind::amplitude)
    throw std::invalid_argument("polarization_time: needs an amplitude process");
  const DipolePartition dp = partition_dipole(s);
  double h = 0.0;
  const int n = resolve_time_grid(s, grid, &h);
  const std::vector<LoopDiagram> loops = generate_loops(s, modes, p);
  std::vector<cplx> total(static_cast<size_t>(n + 1), cplx(0.0));
  for (const LoopDiagram& loop : loops) {
    const std::vector<cplx> curve =
        loop_curve(s, dp, loop, p, omegas, n, h, route);
    cplx w = classical_field_factor(c, modes, loop, omegas);
    w *= static_cast<double>(loop.sign) * vacuum_weight(loop, modes);
    for (size_t k = 0; k < total.size(); ++k) total[k] += w * curve[k];
  }
  const cplx phase = std::conj(ipow(p.expansion_order()));
  ComplexSeries out;
  out.t.resize(total.size());
  out.value.resize(total.size());
  for (size_t k = 0; k < total.size(); ++k) {
    out.t[k] = static_cast<double>(k) * h;
    out.value[k] = phase * total[k];
  }
  return out;
}

TimeSeries sle_time(const LevelScheme& s, const std::vector<FieldMode>& modes,
                    int in_mode, int sig_mode, double omega_in,
                    double omega_sig, const ModelConstants& c,
                    const TimeGrid& grid, TimeRoute route) {
  std::vector<double> w = base_frequencies(modes);
  w[static_cast<size_t>(in_mode)] = omega_in;
  w[static_cast<size_t>(sig_mode)] = omega_sig;
  return signal_time(s, modes, sle_process(in_mode, sig_mode), w, c, grid,
                     route, true);
}

TimeSeries pump_probe_time(const LevelScheme& s,
                           const std::vector<FieldMode>& modes, int pump_mode,
                           int probe_mode, double omega_pump,
                           double omega_probe, const ModelConstants& c,
                           const TimeGrid& grid, TimeRoute route,
                           bool include_vacuum) {
  std::vector<double> w = base_frequencies(modes);
  w[static_cast<size_t>(pump_mode)] = omega_pump;
  w[static_cast<size_t>(probe_mode)] = omega_probe;
  return signal_time(s, modes, pump_probe_process(pump_mode, probe_mode), w, c,
                     grid, route, include_vacuum);
}

TimeSeries pp_chi3(const LevelScheme& s, const std::vector<FieldMode>& modes,
                   int pump_mode, int probe_mode, double omega_pump,
                   double omega_probe, const ModelConstants& c,
                   const TimeGrid& grid, TimeRoute route) {
  return pump_probe_time(s, modes, pump_mode, probe_mode, omega_pump,
                         omega_probe, c, grid, route, false);
}

// ---------------------------------------------------------------------------
// bare-emitter two-point functions
// ---------------------------------------------------------------------------

GreenPair ground_state_greens(const LevelScheme& s, double t, double tau) {
  const DipolePartition dp = partition_dipole(s);
  const double wg = s.omega(s.ground);
  const double u = t - tau;
  cplx corr = 0.0;
  for (int x = 0; x < s.n(); ++x) {
    const double a2 = std::norm(dp.raising(x, s.ground));
    if (a2 == 0.0) continue;
    corr += a2 * std::exp(cplx(-effective_width(s, x) * std::abs(u),
                               (s.omega(x) - wg) * u));
  }
  return {cplx(0.0), cplx(0.0, -1.0 / kHbar) * corr};
}

cplx pm_correlator(const LevelScheme& s, double t, double tau) {
  if (tau > t) return cplx(0.0);
  const cplx corr = cplx(0.0, kHbar) * ground_state_greens(s, t, tau).rl;
  return tau == t ? -0.5 * corr : -corr;
}

double stimulated_rate(const LevelScheme& s, const ModelConstants& c,
                       const FieldMode& drive, double omega_drive) {
  const DipolePartition dp = partition_dipole(s);
  const double wg = s.omega(s.ground);
  const double inten = std::norm(envelope_at(c, drive, omega_drive));
  double rate = 0.0;
  for (int x = 0; x < s.n(); ++x) {
    const double a2 = std::norm(dp.raising(x, s.ground));
    if (a2 == 0.0) continue;
    const double gx = effective_width(s, x);
    const double det = omega_drive - (s.omega(x) - wg);
    rate += a2 * gx / (det * det + gx * gx);
  }
  return -2.0 * inten * rate / kHbar;
}

// ---------------------------------------------------------------------------
// generic wave mixing
// ---------------------------------------------------------------------------

double wave_mixing(const LevelScheme& s, const std::vector<FieldMode>& modes,
                   const Process& p, const std::vector<double>& omegas,
                   const ModelConstants& c, bool include_vacuum) {
  const DipolePartition dp = partition_dipole(s);
  const SignalPlan plan = make_plan(s, modes, p, c);
  return plan_rate(s, dp, modes, plan, omegas, c, include_vacuum);
}

cplx wave_mixing_amplitude(const LevelScheme& s,
                           const std::vector<FieldMode>& modes,
                           const Process& p,
                           const std::vector<double>& omegas,
                           const ModelConstants& c) {
  const DipolePartition dp = partition_dipole(s);
  const SignalPlan plan = make_plan(s, modes, p, c);
  return plan_amplitude(s, dp, modes, plan, omegas, c);
}

// ---------------------------------------------------------------------------
// grid scans
// ---------------------------------------------------------------------------

int thread_count() {
#ifdef NEGF_HAVE_OPENMP
  int n = omp_get_max_threads();
  if (const char* env = std::getenv("NEGF_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) n = std::min(n, v);
  }
  return n > 0 ? n : 1;
#else
  return 1;
#endif
}

std::vector<double> rate_scan(const LevelScheme& s,
                              const std::vector<FieldMode>& modes,
                              const SignalPlan& plan, const ModelConstants& c,
                              const std::vector<double>& base, int scan_mode,
                              const std::vector<double>& grid,
                              bool include_vacuum, bool parallel) {
  const DipolePartition dp = partition_dipole(s);
  std::vector<double> out(grid.size(), 0.0);
  const auto point = [&](size_t i) {
    std::vector<double> w = base;
    w[static_cast<size_t>(scan_mode)] = grid[i];
    out[i] = plan_rate(s, dp, modes, plan, w, c, include_vacuum);
  };
#ifdef NEGF_HAVE_OPENMP
  if (parallel) {
#pragma omp parallel for schedule(static) num_threads(thread_count())
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(grid.size()); ++i)
      point(static_cast<size_t>(i));
    return out;
  }
#else
  (void)parallel;
#endif
  for (size_t i = 0; i < grid.size(); ++i) point(i);
  return out;
}

RMat rate_map(const LevelScheme& s, const std::vector<FieldMode>& modes,
              const SignalPlan& plan, const ModelConstants& c,
              const std::vector<double>& base, int mode_a,
              const std::vector<double>& grid_a, int mode_b,
              const std::vector<double>& grid_b, bool include_vacuum,
              bool parallel) {
  const DipolePartition dp = partition_dipole(s);
  RMat out = RMat::Zero(static_cast<Eigen::Index>(grid_a.size()),
                        static_cast<Eigen::Index>(grid_b.size()));
  const auto row = [&](size_t i) {
    std::vector<double> w = base;
    w[static_cast<size_t>(mode_a)] = grid_a[i];
    for (size_t j = 0; j < grid_b.size(); ++j) {
      w[static_cast<size_t>(mode_b)] = grid_b[j];
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          plan_rate(s, dp, modes, plan, w, c, include_vacuum);
    }
  };
#ifdef NEGF_HAVE_OPENMP
  if (parallel) {
#pragma omp parallel for schedule(static) num_threads(thread_count())
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(grid_a.size()); ++i)
      row(static_cast<size_t>(i));
    return out;
  }
#else
  (void)parallel;
#endif
  for (size_t i = 0; i < grid_a.size(); ++i) row(i);
  return out;
}

}  // namespace negf
