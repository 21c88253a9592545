#include "negfspec/ensemble.hpp"

#include "negfspec/propagators.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace negf {

namespace {
constexpr double kPi = std::numbers::pi;
}

cplx structure_factor(const std::vector<Vec3>& positions, const Vec3& dk) {
  cplx f = 0.0;
  for (const Vec3& r : positions) {
    const double ph = dk.dot(r);
    f += cplx(std::cos(ph), -std::sin(ph));
  }
  return f;
}

double phase_matching_sum(const std::vector<Vec3>& positions, const Vec3& dk) {
  double acc = 0.0;
  for (size_t a = 0; a + 1 < positions.size(); ++a)
    for (size_t b = a + 1; b < positions.size(); ++b)
      acc += 2.0 * std::cos(dk.dot(positions[a] - positions[b]));
  return acc;
}

cplx phase_matching_sum_complex(const std::vector<Vec3>& positions,
                                const Vec3& dk) {
  cplx acc = 0.0;
  for (size_t a = 0; a < positions.size(); ++a)
    for (size_t b = 0; b < positions.size(); ++b) {
      if (a == b) continue;
      const double ph = dk.dot(positions[a] - positions[b]);
      acc += cplx(std::cos(ph), -std::sin(ph));
    }
  return acc;
}

std::vector<Vec3> random_positions(int n, double box, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, box);
  std::vector<Vec3> out(static_cast<size_t>(n));
  for (Vec3& r : out) {
    // fixed evaluation order (distribution calls in brace-init order are
    // unspecified across compilers)
    const double x = u(rng), y = u(rng), z = u(rng);
    r = Vec3(x, y, z);
  }
  return out;
}

double coherent_term(const LevelScheme& s, const std::vector<FieldMode>& modes,
                     const Process& amp, const std::vector<double>& omegas,
                     const ModelConstants& c) {
  const cplx p = wave_mixing_amplitude(s, modes, amp, omegas, c);
  if (c.prefactor_mode == PrefactorMode::normalized) return std::norm(p);
  const size_t sig = static_cast<size_t>(amp.signal_mode);
  return 2.0 * kPi / modes[sig].volume * omegas[sig] * std::norm(p) /
         (kHbar * kHbar);
}

double total_spontaneous(const LevelScheme& s,
                         const std::vector<FieldMode>& modes,
                         const Process& balanced, const Process& amp,
                         const std::vector<double>& omegas,
                         const ModelConstants& c,
                         const std::vector<Vec3>& positions, const Vec3& dk) {
  const double single = wave_mixing(s, modes, balanced, omegas, c, true);
  const double pair = coherent_term(s, modes, amp, omegas, c);
  const double n = static_cast<double>(positions.size());
  return n * single + phase_matching_sum(positions, dk) * pair;
}

TimeSeries heterodyne_signal(const LevelScheme& s,
                             const std::vector<FieldMode>& modes,
                             const Process& amp,
                             const std::vector<double>& omegas,
                             const ModelConstants& c, const TimeGrid& grid,
                             int lo_mode, const std::vector<Vec3>& positions,
                             const Vec3& dk, TimeRoute route) {
  const ComplexSeries p = polarization_time(s, modes, amp, omegas, c, grid, route);
  const cplx lo = std::conj(
      envelope_at(c, modes[static_cast<size_t>(lo_mode)],
                  omegas[static_cast<size_t>(lo_mode)]));
  const cplx f = structure_factor(positions, dk);
  const double pref =
      signal_prefactor(c, DetectionKind::stimulated, 0.0, 1.0) / kHbar;
  TimeSeries out;
  out.t = p.t;
  out.value.resize(p.value.size());
  for (size_t k = 0; k < p.value.size(); ++k)
    out.value[k] = pref * (lo * p.value[k] * f).imag();
  return out;
}

double stimulated_coherent_term(const LevelScheme& s,
                                const std::vector<FieldMode>& modes,
                                int drive_mode, double omega_drive,
                                const ModelConstants& c, double t, double tau) {
  const DipolePartition dp = partition_dipole(s);
  const double wg = s.omega(s.ground);
  const cplx env = envelope_at(c, modes[static_cast<size_t>(drive_mode)],
                               omega_drive);
  // first-order coherence of one driven emitter, switch-on at time zero:
  // <V>(u) = -i E sum_x |mu_gx|^2 e^{-i w u} (1 - e^{(i(w - w_xg) - G_x) u})
  //          / (G_x + i(w_xg - w))
  const auto coherence = [&](double u) {
    cplx acc = 0.0;
    for (int x = 0; x < s.n(); ++x) {
      const double a2 = std::norm(dp.raising(x, s.ground));
      if (a2 == 0.0) continue;
      const double gx = effective_width(s, x);
      const double det = omega_drive - (s.omega(x) - wg);
      const cplx pole(gx, -det);
      const cplx grow = 1.0 - std::exp(cplx(-gx * u, det * u));
      acc += a2 * grow / pole;
    }
    return cplx(0.0, -1.0) * env * acc * std::exp(cplx(0.0, -omega_drive * u));
  };
  // ordering 1: emitter alpha's raising coherence at t, then beta's lowering
  // coherence at tau; ordering 2: the operators applied in the opposite
  // contour order.  Both factorize into the same single-emitter values.
  const cplx order1 = std::conj(coherence(t)) * coherence(tau);
  const cplx beta_first = coherence(tau);
  const cplx order2 = beta_first * std::conj(coherence(t));
  return std::abs(order1 - order2);
}

}  // namespace negf
