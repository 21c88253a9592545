// Acceptance checks for the loop-diagram signal engine.  Each numbered
// check prints exactly one PASS/FAIL line with the measured quantities and
// the pinned tolerances; the binary exits nonzero when any check fails.
//
// The checks exercise the released surface only: closed-form line
// reproduction, diagram census, compiled-expression identities, the
// brute-force density-matrix oracle, ensemble scaling laws, the
// classical-field limit and heterodyne detection.

#include "negfspec/core_model.hpp"
#include "negfspec/diagram.hpp"
#include "negfspec/ensemble.hpp"
#include "negfspec/kernels.hpp"
#include "negfspec/oracle.hpp"
#include "negfspec/propagators.hpp"
#include "schemes.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace {

using namespace negf;
using Clock = std::chrono::steady_clock;
using Verdict = std::pair<bool, std::string>;

template <class... A>
std::string fmt(const char* f, A... a) {
  char buf[1024];
  std::snprintf(buf, sizeof buf, f, a...);
  return std::string(buf);
}

double rel_gap(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

double rel_gap(cplx a, cplx b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

// ---------------------------------------------------------------------------
// 1. the emission line of the three-level ladder matches the closed-form
//    resonance-scattering profile: peak position, half width, windowed area
// ---------------------------------------------------------------------------
Verdict criterion_1() {
  const LevelScheme s = fixtures::raman();
  const auto modes = fixtures::spont_modes(1.5, 1.0);
  ModelConstants c;
  c.prefactor_mode = PrefactorMode::normalized;
  const double w1 = 1.5;          // drive on the upper-level resonance
  const double line = 1.0;        // expected inelastic line: w1 - 0.5
  const double gamma = 0.02;      // final-level half width

  const DipolePartition dp = partition_dipole(s);
  const SignalPlan plan = make_plan(s, modes, sle_process(0, 1), c);
  auto S = [&](double w2) {
    return plan_rate(s, dp, modes, plan, {w1, w2}, c, true);
  };
  // the prebuilt plan must be the same kernel as the one-shot entry point
  for (double w2 : {0.93, 1.0, 1.07}) {
    if (rel_gap(S(w2), sle_frequency(s, modes, 0, 1, w1, w2, c)) > 1e-14) {
      return {false, "plan route disagrees with sle_frequency"};
    }
  }

  // +-50 gamma window around the line.  The elastic feature at w2 = w1
  // (an eta-narrow separate line 25 half-widths away) is excluded with a
  // +-0.01 notch; its wings contribute < 1e-4 of the expected area.
  const double step = 5e-4;
  const double lo = line - 50.0 * gamma, hi = line + 50.0 * gamma;
  const double notch_a = w1 - 0.01, notch_b = w1 + 0.01;

  double peak_w = lo, peak_v = -1.0;
  const int npts = static_cast<int>(std::lround((hi - lo) / step));
  for (int i = 0; i <= npts; ++i) {
    const double w2 = lo + i * step;
    if (w2 > notch_a && w2 < notch_b) continue;
    const double v = S(w2);
    if (v > peak_v) {
      peak_v = v;
      peak_w = w2;
    }
  }
  const double peak_err = std::abs(peak_w - line);

  // half-width via bisection on both flanks
  const double half = 0.5 * peak_v;
  auto cross = [&](double a, double b) {
    double fa = S(a) - half;
    for (int i = 0; i < 90; ++i) {
      const double m = 0.5 * (a + b);
      const double fm = S(m) - half;
      if ((fa < 0.0) == (fm < 0.0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    return 0.5 * (a + b);
  };
  const double left = cross(peak_w - 0.1, peak_w);
  const double right = cross(peak_w + 0.1, peak_w);
  const double hwhm = 0.5 * (right - left);
  const double center = 0.5 * (right + left);
  const double hwhm_err = std::abs(hwhm - gamma) / gamma;

  // windowed area against the analytic Lorentzian prediction over the same
  // (notched) window
  auto trap = [&](double a, double b) {
    const int n = std::max(1, static_cast<int>(std::lround((b - a) / step)));
    const double h = (b - a) / n;
    double acc = 0.5 * (S(a) + S(b));
    for (int i = 1; i < n; ++i) acc += S(a + i * h);
    return acc * h;
  };
  auto lorentz = [&](double a, double b) {
    return peak_v * gamma *
           (std::atan((b - center) / gamma) - std::atan((a - center) / gamma));
  };
  const double area = trap(lo, notch_a) + trap(notch_b, hi);
  const double expected = lorentz(lo, notch_a) + lorentz(notch_b, hi);
  const double area_err = std::abs(area / expected - 1.0);

  const bool pass = peak_err <= 1e-3 && hwhm_err <= 0.01 && area_err <= 0.01;
  return {pass, fmt("peak %.6f (err %.1e <= 1e-3), hwhm %.6f (err %.2f%% <= "
                    "1%%), area ratio %.5f (err %.3f%% <= 1%%)",
                    peak_w, peak_err, hwhm, 100.0 * hwhm_err, area / expected,
                    100.0 * area_err)};
}

// ---------------------------------------------------------------------------
// 2. diagram census: emission needs 1 loop (3 time-ordered diagrams),
//    probe transmission 8 loops (16), with per-loop counts {3,3,3,3,1,1,1,1}
// ---------------------------------------------------------------------------
Verdict criterion_2() {
  const auto sle_loops = generate_loops(fixtures::raman(),
                                        fixtures::spont_modes(1.5, 1.0),
                                        sle_process(0, 1));
  bool pass = sle_loops.size() == 1;
  long sle_fd = 0;
  for (const auto& l : sle_loops) {
    if (static_cast<long>(decompose(l).size()) != l.feynman_count())
      pass = false;
    sle_fd += l.feynman_count();
  }
  pass = pass && sle_fd == 3;

  const auto pp_loops = generate_loops(fixtures::esa(),
                                       fixtures::driven_modes(1.5, 0.97),
                                       pump_probe_process(0, 1));
  const std::vector<long> want = {3, 3, 3, 3, 1, 1, 1, 1};
  std::vector<long> got;
  long pp_fd = 0;
  for (const auto& l : pp_loops) {
    if (static_cast<long>(decompose(l).size()) != l.feynman_count())
      pass = false;
    got.push_back(l.feynman_count());
    pp_fd += l.feynman_count();
  }
  pass = pass && pp_loops.size() == 8 && pp_fd == 16 && got == want;

  std::string per = "{";
  for (size_t i = 0; i < got.size(); ++i)
    per += fmt("%s%ld", i ? "," : "", got[i]);
  per += "}";
  return {pass, fmt("emission %zu loop / %ld ordered, probe transmission %zu "
                    "loops / %ld ordered, per-loop %s",
                    sle_loops.size(), sle_fd, pp_loops.size(), pp_fd,
                    per.c_str())};
}

// ---------------------------------------------------------------------------
// 3. the compiled emission expression equals the hand-coded resolvent
//    product to 1e-12 relative over a 101x101 frequency grid
// ---------------------------------------------------------------------------
Verdict criterion_3() {
  const LevelScheme s = fixtures::raman();
  const auto modes = fixtures::spont_modes(1.5, 1.0);
  ModelConstants c;
  double worst = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double w1 = 1.2 + 0.6 * i / 100.0;
    for (int j = 0; j <= 100; ++j) {
      const double w2 = 0.7 + 0.6 * j / 100.0;
      const double a = sle_frequency(s, modes, 0, 1, w1, w2, c);
      const double b = sle_frequency_reference(s, modes, 0, 1, w1, w2, c);
      worst = std::max(worst, rel_gap(a, b));
    }
  }
  return {worst <= 1e-12,
          fmt("max relative gap %.2e <= 1e-12 over 101x101 points", worst)};
}

// ---------------------------------------------------------------------------
// 4. probe-transmission loops: the 8-term frequency expression equals the
//    sum of its 16 time-ordered terms, and matches a hand-maintained
//    transcription of the eight terms except for the one flagged entry
// ---------------------------------------------------------------------------

// One hand-transcribed bracket <g| V G(a3) P2 G(a2) P1 G(a1) V+ |g>, listed
// earliest segment first.  coef are the (w1, w2) coefficients of each
// resolvent argument (ground offset implied).
struct RefTerm {
  std::array<Branch, 3> br;
  std::array<std::array<int, 2>, 3> coef;
  std::array<VertexOp, 2> mid;  // P1 (between G1 and G2), then P2
};

cplx ref_bracket(const LevelScheme& s, const DipolePartition& dp,
                 const RefTerm& T, double w1, double w2) {
  auto G = [&](int k) {
    return resolvent(s, T.coef[k][0] * w1 + T.coef[k][1] * w2, T.br[k]);
  };
  auto P = [&](VertexOp v) -> const Mat& {
    return v == VertexOp::raise ? dp.raising : dp.lowering;
  };
  const Mat m = dp.lowering * G(2) * P(T.mid[1]) * G(1) * P(T.mid[0]) * G(0) *
                dp.raising;
  return m(s.ground, s.ground);
}

Verdict criterion_4() {
  const LevelScheme s = fixtures::esa();
  const auto modes = fixtures::driven_modes(1.5, 0.97);
  const DipolePartition dp = partition_dipole(s);
  const Process p = pump_probe_process(0, 1);
  const auto loops = generate_loops(s, modes, p);
  std::vector<FreqExpression> exprs;
  for (const auto& l : loops) exprs.push_back(compile_frequency(l, p));

  std::mt19937_64 rng(20260815);
  std::uniform_real_distribution<double> uw(0.6, 2.8);

  // (a) loop expression == sum of its fully time-ordered expansion
  double worst_sum = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<double> w = {uw(rng), uw(rng)};
    cplx total_loop = 0.0, total_ordered = 0.0;
    for (size_t i = 0; i < loops.size(); ++i) {
      const double fam = loops[i].family_weight;
      total_loop += fam * exprs[i].evaluate(s, dp, w);
      for (const auto& fd : decompose(loops[i]))
        total_ordered += fam * feynman_frequency_value(fd, s, dp, p, w);
    }
    worst_sum = std::max(worst_sum, rel_gap(total_loop, total_ordered));
  }

  // (b) term-by-term comparison against the hand-maintained listing.  The
  // listing's term 7 carries a retarded earliest resolvent where the loop
  // rules produce an advanced one; the check pins that known discrepancy.
  const Branch R = Branch::retarded, A = Branch::advanced;
  const VertexOp up = VertexOp::raise, dn = VertexOp::lower;
  const std::vector<RefTerm> listed = {
      {{R, A, A}, {{{1, 0}, {1, -1}, {1, 0}}}, {dn, up}},   // term 1
      {{R, R, A}, {{{1, 0}, {0, 0}, {0, 1}}}, {dn, up}},    // term 2
      {{R, A, A}, {{{1, 0}, {1, 1}, {1, 0}}}, {up, dn}},    // term 3
      {{R, A, A}, {{{1, 0}, {1, 1}, {0, 1}}}, {up, dn}},    // term 4
      {{A, A, A}, {{{0, 1}, {0, 0}, {1, 0}}}, {dn, up}},    // term 5
      {{A, A, A}, {{{0, 1}, {-1, 1}, {0, 1}}}, {dn, up}},   // term 6
      {{R, A, A}, {{{0, 1}, {1, 1}, {1, 0}}}, {up, dn}},    // term 7
      {{A, A, A}, {{{0, 1}, {1, 1}, {0, 1}}}, {up, dn}},    // term 8
  };

  const int nsample = 5;
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < nsample; ++i) pts.push_back({uw(rng), uw(rng)});

  auto close = [&](cplx a, cplx b) { return rel_gap(a, b) <= 1e-9; };
  auto matches = [&](const RefTerm& T, const FreqExpression& e) {
    bool direct = true, conj = true;
    for (const auto& w : pts) {
      const cplx ref = ref_bracket(s, dp, T, w[0], w[1]);
      const cplx eng = e.bracket(s, dp, w);
      direct = direct && close(ref, eng);
      conj = conj && close(std::conj(ref), eng);
    }
    return direct || conj;
  };

  std::vector<int> unmatched;
  std::vector<bool> loop_hit(loops.size(), false);
  for (size_t j = 0; j < listed.size(); ++j) {
    bool hit = false;
    for (size_t i = 0; i < loops.size(); ++i) {
      if (matches(listed[j], exprs[i])) {
        hit = true;
        loop_hit[i] = true;
      }
    }
    if (!hit) unmatched.push_back(static_cast<int>(j) + 1);
  }

  bool pass = worst_sum <= 1e-8;
  const bool only_seven = unmatched.empty() ||
                          (unmatched.size() == 1 && unmatched[0] == 7);
  pass = pass && only_seven;

  std::string fix = "listing fully matched";
  if (!unmatched.empty()) {
    // the flagged term must match the remaining loop once its earliest
    // resolvent branch is flipped to advanced
    RefTerm t7 = listed[6];
    t7.br[0] = A;
    bool corrected = false;
    for (size_t i = 0; i < loops.size(); ++i) {
      if (!loop_hit[i] && matches(t7, exprs[i])) corrected = true;
    }
    pass = pass && corrected;
    fix = corrected ? "term 7 matches after flipping its earliest branch"
                    : "term 7 unexplained";
  }

  std::string um = "{";
  for (size_t i = 0; i < unmatched.size(); ++i)
    um += fmt("%s%d", i ? "," : "", unmatched[i]);
  um += "}";
  return {pass, fmt("loop vs ordered sum max gap %.2e <= 1e-8 (20 points); "
                    "unmatched listing terms %s (allowed {7}); %s",
                    worst_sum, um.c_str(), fix.c_str())};
}

// ---------------------------------------------------------------------------
// 5. brute-force density-matrix oracle (emitter + one quantized mode with
//    3 Fock states) reproduces the emission line and its scaling laws
// ---------------------------------------------------------------------------
Verdict criterion_5() {
  const LevelScheme s = fixtures::raman();
  std::vector<FieldMode> modes(2);
  modes[0].omega = 1.5;
  modes[0].alpha = 0.003;
  modes[0].volume = 1000.0;
  modes[1].omega = 1.0;
  modes[1].alpha = 0.0;
  modes[1].role = ModeRole::signal;
  modes[1].volume = 1e6;
  ModelConstants c;
  const std::vector<OracleDrive> drives = {{0, 1.5}};
  OracleOptions opt;
  opt.n_max = 2;
  opt.t_end = 400.0;
  opt.step_check = 1e-3;

  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(0.92 + 0.004 * i);
  const auto orc = oracle_spectrum(s, modes, drives, 1, grid, c, opt);

  std::vector<double> kh;
  for (double w : grid)
    kh.push_back(kramers_heisenberg(s, modes, 0, 1, 1.5, w, c));

  const auto argmax = [](const std::vector<double>& v) {
    return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
  };
  const int po = argmax(orc), pk = argmax(kh);
  const bool peak_ok = std::abs(po - pk) <= 1;

  // half width from linearly interpolated half crossings
  auto hwhm_of = [&](const std::vector<double>& v) {
    const int p = argmax(v);
    const double half = 0.5 * v[p];
    double xl = grid.front(), xr = grid.back();
    for (int i = p; i > 0; --i) {
      if (v[i - 1] <= half && v[i] > half) {
        const double f = (half - v[i - 1]) / (v[i] - v[i - 1]);
        xl = grid[i - 1] + f * (grid[i] - grid[i - 1]);
        break;
      }
    }
    for (int i = p; i + 1 < static_cast<int>(v.size()); ++i) {
      if (v[i] > half && v[i + 1] <= half) {
        const double f = (v[i] - half) / (v[i] - v[i + 1]);
        xr = grid[i] + f * (grid[i + 1] - grid[i]);
        break;
      }
    }
    return 0.5 * (xr - xl);
  };
  const double hw = hwhm_of(orc);
  const double hw_err = std::abs(hw - 0.02) / 0.02;
  const bool hw_ok = hw_err <= 0.05;

  // intensity scaling: rate quadruples when the drive amplitude doubles
  const double peak_rate = orc[po];
  auto m2 = modes;
  m2[0].alpha = 0.006;
  const double quad =
      oracle_emission_rate(s, m2, drives, 1, grid[po], c, opt);
  const double amp_err = std::abs(quad / peak_rate / 4.0 - 1.0);
  const bool amp_ok = amp_err <= 0.03;

  // volume scaling: rate halves when the signal quantization volume doubles
  auto m3 = modes;
  m3[1].volume = 2e6;
  const double halfvol =
      oracle_emission_rate(s, m3, drives, 1, grid[po], c, opt);
  const double vol_err = std::abs(halfvol / peak_rate / 0.5 - 1.0);
  const bool vol_ok = vol_err <= 0.02;

  const bool pass = peak_ok && hw_ok && amp_ok && vol_ok;
  return {pass,
          fmt("peak bin %d vs %d (within 1 step of 0.004), hwhm %.5f (err "
              "%.2f%% <= 5%%), |E|^2 scaling err %.2f%% <= 3%%, 1/volume "
              "scaling err %.2f%% <= 2%%",
              po, pk, hw, 100.0 * hw_err, 100.0 * amp_err, 100.0 * vol_err)};
}

// ---------------------------------------------------------------------------
// 6. ensemble identities: explicit pair double sum, N(N-1) coherent scaling,
//    real phase-matching sum, |f|^2 = F + N
// ---------------------------------------------------------------------------
Verdict criterion_6() {
  const LevelScheme s = fixtures::raman();
  std::vector<FieldMode> modes(2);
  modes[0].omega = 1.5;
  modes[0].alpha = 1.0;
  modes[0].volume = 1000.0;
  modes[1].omega = 1.5;
  modes[1].alpha = 0.0;
  modes[1].role = ModeRole::signal;
  modes[1].volume = 1000.0;
  ModelConstants c;
  Process amp;
  amp.detection = DetectionKind::amplitude;
  amp.signal_mode = 1;
  amp.incoming = {{0, 1}};
  amp.net = {1};
  const Process balanced = sle_process(0, 1);
  const std::vector<double> w = {1.5, 1.5};

  const double single = wave_mixing(s, modes, balanced, w, c);
  const double coh = coherent_term(s, modes, amp, w, c);

  // the single-emitter elastic rate is eta-dominated (~1e9), so the
  // coherent part cannot be recovered by subtraction; exactness is pinned
  // through the pair sum itself plus the machine-exact total composition
  double worst_total = 0.0, worst_quad = 0.0;
  for (int n : {1, 2, 3, 4, 8, 16, 32, 64}) {
    const auto pos = random_positions(n, 6.0, 11 + n);
    const double total =
        total_spontaneous(s, modes, balanced, amp, w, c, pos, Vec3::Zero());
    double pairsum = 0.0;  // literal double sum over ordered pairs, dk = 0
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (a != b) pairsum += 1.0;
    const double explicit_total = n * single + coh * pairsum;
    worst_total = std::max(worst_total, rel_gap(total, explicit_total));
    // coherent weight at perfect phase matching is exactly n(n-1)
    const double F0 = phase_matching_sum(pos, Vec3::Zero());
    worst_quad = std::max(worst_quad,
                          std::abs(F0 - static_cast<double>(n) * (n - 1)));
  }

  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> un(2, 12);
  std::uniform_real_distribution<double> ub(1.0, 10.0), uk(-3.0, 3.0);
  double worst_imag = 0.0, worst_ident = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = un(rng);
    const auto pos = random_positions(n, ub(rng), 1000 + trial);
    const Vec3 dk(uk(rng), uk(rng), uk(rng));
    const double F = phase_matching_sum(pos, dk);
    const cplx Fc = phase_matching_sum_complex(pos, dk);
    worst_imag = std::max(
        {worst_imag, std::abs(Fc.imag()), std::abs(F - Fc.real())});
    const cplx f = structure_factor(pos, dk);
    worst_ident = std::max(worst_ident,
                           std::abs(std::norm(f) - (F + n)) / (n * double(n)));
  }

  const bool pass = worst_total <= 1e-14 && worst_quad == 0.0 &&
                    worst_imag <= 1e-9 && worst_ident <= 1e-12;
  return {pass,
          fmt("pair double-sum gap %.1e <= 1e-14 (N up to 64), F(0)-N(N-1) "
              "gap %.1e (exact), Im F %.1e <= 1e-9, |f|^2-F-N "
              "%.1e <= 1e-12 (1000 draws)",
              worst_total, worst_quad, worst_imag, worst_ident)};
}

// ---------------------------------------------------------------------------
// 7. the cross-emitter term of stimulated detection vanishes identically,
//    while the spontaneous pair weight does not
// ---------------------------------------------------------------------------
Verdict criterion_7() {
  ModelConstants c;
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> ug(0.01, 0.2), uw(0.8, 2.2),
      ua(0.3, 2.0), uph(0.0, 2.0 * std::numbers::pi), uv(200.0, 2000.0),
      ut(0.5, 20.0), ud(0.5, 2.5), usc(0.5, 1.5);
  std::uniform_int_distribution<int> ukind(0, 2), umode(0, 1);

  double worst = 0.0;
  double best_pair = 0.0;
  int nonzero_pairs = 0;
  for (int trial = 0; trial < 100; ++trial) {
    LevelScheme s;
    switch (ukind(rng)) {
      case 0:
        s = fixtures::two_level(ug(rng));
        break;
      case 1: {
        s = fixtures::raman();
        s.omega(1) = uw(rng);
        s.omega(2) = 0.5 * usc(rng);
        s.dephasing(0, 1) = s.dephasing(1, 0) = ug(rng);
        s.dephasing(0, 2) = s.dephasing(2, 0) = ug(rng);
        break;
      }
      default: {
        s = fixtures::esa();
        s.omega(1) = uw(rng);
        s.omega(2) = s.omega(1) + usc(rng);
        s.dephasing(0, 1) = s.dephasing(1, 0) = ug(rng);
        s.dephasing(0, 2) = s.dephasing(2, 0) = ug(rng);
        break;
      }
    }
    std::vector<FieldMode> m(2);
    for (auto& mode : m) {
      mode.omega = uw(rng);
      mode.alpha = std::polar(ua(rng), uph(rng));
      mode.volume = uv(rng);
    }
    const int drive = umode(rng);
    const double wd = ud(rng);
    const double t = ut(rng), tau = ut(rng);
    worst = std::max(worst,
                     stimulated_coherent_term(s, m, drive, wd, c, t, tau));

    // spontaneous pair weight of the matching elastic configuration
    std::vector<FieldMode> em(2);
    em[0] = m[drive];
    em[0].omega = wd;
    em[0].role = ModeRole::incoming;
    em[1].omega = wd;
    em[1].alpha = 0.0;
    em[1].role = ModeRole::signal;
    em[1].volume = em[0].volume;
    Process amp;
    amp.detection = DetectionKind::amplitude;
    amp.signal_mode = 1;
    amp.incoming = {{0, 1}};
    amp.net = {1};
    const double pair = coherent_term(s, em, amp, {wd, wd}, c);
    best_pair = std::max(best_pair, pair);
    if (pair > 1e-6) ++nonzero_pairs;
  }

  const bool pass = worst <= 1e-12 && nonzero_pairs >= 1;
  return {pass, fmt("stimulated cross term max %.2e <= 1e-12 (100 draws); "
                    "spontaneous pair weight > 1e-6 in %d draws (max %.3g)",
                    worst, nonzero_pairs, best_pair)};
}

// ---------------------------------------------------------------------------
// 8. classical-field limit: the gap between the probe-transmission kernel
//    and its classical (vacuum-stripped) limit scales as 1/volume when the
//    classical envelopes are held fixed
// ---------------------------------------------------------------------------
Verdict criterion_8() {
  const LevelScheme s = fixtures::raman();
  ModelConstants c;
  const TimeGrid grid{60.0, 0.0};
  std::vector<double> lx, ly;
  for (double vol : {1e2, 1e3, 1e4, 1e5}) {
    // amplitudes grow as sqrt(volume) so every classical envelope
    // sqrt(2 pi w / volume) * alpha stays fixed across the sweep
    const double alpha = std::sqrt(vol / 1e2);
    auto modes = fixtures::driven_modes(1.5, 0.97, alpha, alpha, vol);
    const TimeSeries full = pump_probe_time(s, modes, 0, 1, 1.5, 0.97, c,
                                            grid, TimeRoute::interleaved);
    const TimeSeries cls = pp_chi3(s, modes, 0, 1, 1.5, 0.97, c, grid,
                                   TimeRoute::interleaved);
    const double gap = std::abs(full.value.back() - cls.value.back());
    lx.push_back(std::log(vol));
    ly.push_back(std::log(gap));
  }
  double mx = 0, my = 0;
  for (size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= lx.size();
  my /= ly.size();
  double num = 0, den = 0;
  for (size_t i = 0; i < lx.size(); ++i) {
    num += (lx[i] - mx) * (ly[i] - my);
    den += (lx[i] - mx) * (lx[i] - mx);
  }
  const double slope = num / den;
  const bool pass = std::abs(slope + 1.0) <= 0.1;
  return {pass, fmt("log-log slope %.4f within -1 +/- 0.1 over volume 1e2.."
                    "1e5 at fixed envelopes",
                    slope)};
}

// ---------------------------------------------------------------------------
// 9. heterodyne detection with the probe as its own local oscillator equals
//    the probe-transmission kernel at weak fields and scales exactly with N
// ---------------------------------------------------------------------------
Verdict criterion_9() {
  const LevelScheme s = fixtures::two_level();
  std::vector<FieldMode> m(3);
  m[0].omega = 1.5;
  m[0].alpha = 100.0;
  m[0].volume = 1e8;
  m[1].omega = 0.97;
  m[1].alpha = 100.0;
  m[1].volume = 1e8;
  m[2] = m[1];
  m[2].role = ModeRole::local_oscillator;
  ModelConstants c;
  Process amp;
  amp.detection = DetectionKind::amplitude;
  amp.signal_mode = 2;
  amp.incoming = {{0, 2}, {1, 1}};
  amp.net = {0, 1};
  const std::vector<double> w = {1.5, 0.97, 0.97};
  const TimeGrid grid{100.0, 0.0};
  const std::vector<Vec3> one{Vec3::Zero()};

  const TimeSeries het =
      heterodyne_signal(s, m, amp, w, c, grid, 2, one, Vec3::Zero());
  const std::vector<FieldMode> m2(m.begin(), m.begin() + 2);
  const TimeSeries pp = pump_probe_time(s, m2, 0, 1, 1.5, 0.97, c, grid);
  if (het.value.size() != pp.value.size())
    return {false, "grid size mismatch"};

  double worst = 0.0, scale = 0.0;
  for (size_t i = 0; i < het.value.size(); ++i) {
    worst = std::max(worst, std::abs(het.value[i] - pp.value[i]));
    scale = std::max(scale, std::abs(pp.value[i]));
  }
  const double rel = worst / scale;

  const std::vector<Vec3> three{Vec3(0, 0, 0), Vec3(3, 1, 2), Vec3(7, 2, 5)};
  const TimeSeries het3 =
      heterodyne_signal(s, m, amp, w, c, grid, 2, three, Vec3::Zero());
  double worst_n = 0.0;
  for (size_t i = 0; i < het.value.size(); ++i) {
    worst_n = std::max(worst_n,
                       std::abs(het3.value[i] - 3.0 * het.value[i]));
  }

  const bool pass = rel <= 0.01 && worst_n <= 1e-14 * scale;
  return {pass, fmt("sup gap %.2e of scale (<= 1%% at 1/|alpha|^2 = 1e-4); "
                    "N=3 scaling gap %.1e <= 1e-14 of scale",
                    rel, worst_n)};
}

}  // namespace

int main() {
  int failures = 0;
  auto run = [&](int idx, const char* title, double budget,
                 Verdict (*body)()) {
    const auto t0 = Clock::now();
    Verdict v{false, ""};
    try {
      v = body();
    } catch (const std::exception& e) {
      v = {false, fmt("exception: %s", e.what())};
    }
    const double sec =
        std::chrono::duration<double>(Clock::now() - t0).count();
    if (budget > 0.0) {
      v.second += fmt("; %.2f s < %g s", sec, budget);
      if (sec >= budget) v.first = false;
    } else {
      v.second += fmt("; %.2f s", sec);
    }
    std::printf("%s criterion %d: %s -- %s\n", v.first ? "PASS" : "FAIL",
                idx, title, v.second.c_str());
    std::fflush(stdout);
    if (!v.first) ++failures;
  };

  run(1, "emission line matches the closed-form profile", 1.0, criterion_1);
  run(2, "loop and time-ordered diagram counts", 1.0, criterion_2);
  run(3, "compiled expression matches the hand-coded reference", 5.0,
      criterion_3);
  run(4, "probe-transmission expansion identity and reference listing", 30.0,
      criterion_4);
  run(5, "density-matrix oracle reproduces the emission line", 60.0,
      criterion_5);
  run(6, "ensemble phase-matching identities and pair scaling", 0.0,
      criterion_6);
  run(7, "stimulated cross-emitter term vanishes, spontaneous does not", 0.0,
      criterion_7);
  run(8, "classical-field limit gap scales as 1/volume", 60.0, criterion_8);
  run(9, "self-referenced heterodyne equals probe transmission", 0.0,
      criterion_9);

  std::printf("acceptance: %d/9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
