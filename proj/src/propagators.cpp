#include "negfspec/propagators.hpp"

#include <cmath>

namespace negf {

double effective_width(const LevelScheme& s, int x) {
  return s.gamma_level(x) + kEtaFloor;
}

Mat resolvent(const LevelScheme& s, double omega, Branch b) {
  const int n = s.n();
  const double wg = s.omega(s.ground);
  Mat g = Mat::Zero(n, n);
  for (int x = 0; x < n; ++x) {
    const cplx den(omega + wg - s.omega(x), effective_width(s, x));
    const cplx val = kHbar / (kHbar * den);
    g(x, x) = (b == Branch::retarded) ? val : std::conj(val);
  }
  return g;
}

Mat time_propagator(const LevelScheme& s, double t) {
  const int n = s.n();
  if (t < 0.0) return Mat::Zero(n, n);
  if (t == 0.0) return Mat::Identity(n, n);
  Mat u = Mat::Zero(n, n);
  for (int x = 0; x < n; ++x) {
    u(x, x) = std::exp(cplx(-effective_width(s, x) * t, -s.omega(x) * t));
  }
  return u;
}

cplx field_green(const std::vector<FieldMode>& modes, FieldGreenKind kind,
                 int s, int sp, double t, double tau) {
  const FieldMode& a = modes.at(static_cast<size_t>(s));
  const FieldMode& b = modes.at(static_cast<size_t>(sp));
  cplx weight = a.alpha * std::conj(b.alpha);
  if (kind == FieldGreenKind::RL && s == sp) weight += 1.0;
  const cplx phase = std::exp(cplx(0.0, -a.omega * t + b.omega * tau));
  return cplx(0.0, -1.0 / kHbar) * weight * phase;
}

}  // namespace negf
