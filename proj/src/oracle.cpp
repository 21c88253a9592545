#include "negfspec/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <numbers>
#include <string>
#include <vector>

namespace negf {
namespace {

constexpr double kPi = std::numbers::pi;

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

cplx trace_prod(const Mat& a, const Mat& rho) {
  cplx out = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out += a(i, j) * rho(j, i);
  return out;
}

double tail_slope(const std::vector<double>& t, const std::vector<double>& y,
                  double tail_fraction) {
  const size_t n = t.size();
  size_t first = static_cast<size_t>(std::floor((1.0 - tail_fraction) * static_cast<double>(n)));
  if (first + 2 > n) first = (n >= 2) ? n - 2 : 0;
  double tm = 0.0, ym = 0.0;
  const size_t m = n - first;
  for (size_t k = first; k < n; ++k) {
    tm += t[k];
    ym += y[k];
  }
  tm /= static_cast<double>(m);
  ym /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (size_t k = first; k < n; ++k) {
    sxx += (t[k] - tm) * (t[k] - tm);
    sxy += (t[k] - tm) * (y[k] - ym);
  }
  return sxy / sxx;
}

struct JointSystem {
  int dim = 0;
  double g = 0.0;            // emitter/signal-mode coupling
  Mat h_static;              // emitter + photon + RWA coupling
  Mat raise_joint;           // V^dag (x) 1
  Mat lower_joint;           // V (x) 1
  Mat source;                // V (x) a^dag: generation observable
  Mat number;                // 1 (x) a^dag a
  Eigen::ArrayXXd damp;      // elementwise widths gamma_x + gamma_y
  std::vector<cplx> drive_amp;
  std::vector<double> drive_omega;
};

JointSystem build_joint(const LevelScheme& s, const std::vector<FieldMode>& modes,
                        const std::vector<OracleDrive>& drives, int sig_mode,
                        double omega_sig, const ModelConstants& c, int n_max) {
  const int nl = static_cast<int>(s.n());
  const int np = n_max + 1;
  JointSystem j;
  j.dim = nl * np;

  Mat id_mol = Mat::Identity(nl, nl);
  Mat id_ph = Mat::Identity(np, np);
  Mat a = Mat::Zero(np, np);
  for (int n = 1; n < np; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  Mat adag = a.adjoint();
  Mat nph = adag * a;

  DipolePartition dp = partition_dipole(s);
  const double volume = modes.at(static_cast<size_t>(sig_mode)).volume;
  j.g = std::sqrt(2.0 * kPi * kHbar * omega_sig / volume);

  Mat h_mol = Mat::Zero(nl, nl);
  for (int x = 0; x < nl; ++x) h_mol(x, x) = s.omega(x);

  j.h_static = kron(h_mol, id_ph) + omega_sig * kron(id_mol, nph) +
               j.g * (kron(dp.raising, a) + kron(dp.lowering, adag));
  j.raise_joint = kron(dp.raising, id_ph);
  j.lower_joint = kron(dp.lowering, id_ph);
  j.source = kron(dp.lowering, adag);
  j.number = kron(id_mol, nph);

  j.damp = Eigen::ArrayXXd::Zero(j.dim, j.dim);
  for (int i = 0; i < j.dim; ++i)
    for (int k = 0; k < j.dim; ++k)
      j.damp(i, k) = s.gamma_level(i / np) + s.gamma_level(k / np);

  for (const OracleDrive& d : drives) {
    j.drive_amp.push_back(envelope_amplitude(c, modes.at(static_cast<size_t>(d.mode))));
    j.drive_omega.push_back(d.omega);
  }
  return j;
}

// d rho/dt = -i [H(t), rho] - damp .* rho
void liouville(const JointSystem& j, double t, const Mat& rho, Mat& h_buf, Mat& out) {
  h_buf = j.h_static;
  for (size_t d = 0; d < j.drive_amp.size(); ++d) {
    const cplx z = j.drive_amp[d] * std::exp(cplx(0.0, -j.drive_omega[d] * t));
    h_buf += z * j.raise_joint + std::conj(z) * j.lower_joint;
  }
  out.noalias() = h_buf * rho;
  out.noalias() -= rho * h_buf;
  out *= cplx(0.0, -1.0);
  out.array() -= j.damp * rho.array();
}

double fastest_scale(const LevelScheme& s, const std::vector<OracleDrive>& drives,
                     double omega_sig, int n_max) {
  double scale = (s.omega.maxCoeff() - s.omega.minCoeff()) +
                 static_cast<double>(n_max) * std::abs(omega_sig);
  for (const OracleDrive& d : drives) scale = std::max(scale, std::abs(d.omega));
  return std::max(scale, 1e-12);
}

double evolve_rate(const JointSystem& j, const LevelScheme& s, double t_end, double dt,
                   double tail_fraction, int n_max) {
  const auto steps = static_cast<size_t>(std::llround(std::ceil(t_end / dt)));
  const double h = t_end / static_cast<double>(steps);

  Mat rho = Mat::Zero(j.dim, j.dim);
  const int np = n_max + 1;
  rho(static_cast<int>(s.ground) * np, static_cast<int>(s.ground) * np) = 1.0;

  Mat k1(j.dim, j.dim), k2(j.dim, j.dim), k3(j.dim, j.dim), k4(j.dim, j.dim);
  Mat tmp(j.dim, j.dim), h_buf(j.dim, j.dim);

  std::vector<double> ts, emitted;
  ts.reserve(steps + 1);
  emitted.reserve(steps + 1);
  double cum = 0.0;
  double gen_prev = 2.0 * j.g * std::imag(trace_prod(j.source, rho));
  ts.push_back(0.0);
  emitted.push_back(0.0);

  for (size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * h;
    liouville(j, t, rho, h_buf, k1);
    tmp = rho + (0.5 * h) * k1;
    liouville(j, t + 0.5 * h, tmp, h_buf, k2);
    tmp = rho + (0.5 * h) * k2;
    liouville(j, t + 0.5 * h, tmp, h_buf, k3);
    tmp = rho + h * k3;
    liouville(j, t + h, tmp, h_buf, k4);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    const cplx tr = rho.trace();
    if (std::abs(tr.imag()) > 1e-9 || tr.real() > 1.0 + 1e-9 || tr.real() < -1e-9)
      throw numerical_guard_error("reference evolution lost the trace bound");
    const double nbar = std::real(trace_prod(j.number, rho));
    if (nbar > 0.5 * static_cast<double>(n_max))
      throw numerical_guard_error("reference evolution saturated the photon ladder");

    const double gen = 2.0 * j.g * std::imag(trace_prod(j.source, rho));
    cum += 0.5 * h * (gen_prev + gen);
    gen_prev = gen;
    ts.push_back(static_cast<double>(k + 1) * h);
    emitted.push_back(cum);
  }
  return tail_slope(ts, emitted, tail_fraction);
}

double rate_with_options(const LevelScheme& s, const std::vector<FieldMode>& modes,
                         const std::vector<OracleDrive>& drives, int sig_mode,
                         double omega_sig, const ModelConstants& c,
                         const OracleOptions& opt, bool do_half_check) {
  const double scale = fastest_scale(s, drives, omega_sig, opt.n_max);
  const double period = 2.0 * kPi / scale;
  double dt = (opt.dt > 0.0) ? opt.dt : period / 80.0;
  if (dt > period / 20.0)
    throw numerical_guard_error("reference time step under-resolves the fastest oscillation");

  JointSystem j = build_joint(s, modes, drives, sig_mode, omega_sig, c, opt.n_max);
  const double rate = evolve_rate(j, s, opt.t_end, dt, opt.tail_fraction, opt.n_max);
  if (do_half_check && opt.check_half_step) {
    const double rate_half = evolve_rate(j, s, opt.t_end, 0.5 * dt, opt.tail_fraction, opt.n_max);
    const double ref = std::max(std::abs(rate_half), 1e-300);
    if (std::abs(rate - rate_half) / ref > opt.step_check)
      throw numerical_guard_error("reference evolution failed the half-step consistency check");
  }
  return rate;
}

}  // namespace

double oracle_emission_rate(const LevelScheme& s, const std::vector<FieldMode>& modes,
                            const std::vector<OracleDrive>& drives, int sig_mode,
                            double omega_sig, const ModelConstants& c,
                            const OracleOptions& opt) {
  return rate_with_options(s, modes, drives, sig_mode, omega_sig, c, opt, true);
}

std::vector<double> oracle_spectrum(const LevelScheme& s, const std::vector<FieldMode>& modes,
                                    const std::vector<OracleDrive>& drives, int sig_mode,
                                    const std::vector<double>& omega_grid,
                                    const ModelConstants& c, const OracleOptions& opt) {
  std::vector<double> out(omega_grid.size(), 0.0);
  if (omega_grid.empty()) return out;

  // Half-step consistency is established once, on the first grid point.
  out[0] = rate_with_options(s, modes, drives, sig_mode, omega_grid[0], c, opt, true);

  const auto n = static_cast<std::int64_t>(omega_grid.size());
  std::exception_ptr failure = nullptr;
#if defined(NEGF_HAVE_OPENMP)
#pragma omp parallel for schedule(dynamic) num_threads(thread_count())
#endif
  for (std::int64_t i = 1; i < n; ++i) {
    bool skip = false;
#if defined(NEGF_HAVE_OPENMP)
#pragma omp critical(negf_oracle_failure)
#endif
    {
      if (failure) skip = true;
    }
    if (skip) continue;
    try {
      out[static_cast<size_t>(i)] = rate_with_options(
          s, modes, drives, sig_mode, omega_grid[static_cast<size_t>(i)], c, opt, false);
    } catch (...) {
#if defined(NEGF_HAVE_OPENMP)
#pragma omp critical(negf_oracle_failure)
#endif
      {
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

cplx two_time_correlator(const LevelScheme& s, const Mat& op_late, const Mat& op_early,
                         double t, double tau) {
  const int nl = static_cast<int>(s.n());
  const double u = t - tau;
  Mat rho = Mat::Zero(nl, nl);
  rho.col(static_cast<int>(s.ground)) = op_early.col(static_cast<int>(s.ground));
  for (int x = 0; x < nl; ++x)
    for (int y = 0; y < nl; ++y) {
      const double det = s.omega(x) - s.omega(y);
      const double width = s.gamma_level(x) + s.gamma_level(y);
      rho(x, y) *= std::exp(cplx(-width * u, -det * u));
    }
  return trace_prod(op_late, rho);
}

}  // namespace negf
