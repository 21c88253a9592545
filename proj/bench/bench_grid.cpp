// Times the two-frequency rate map with the parallel scan against the serial
// reference path and checks that they produce bitwise-identical grids.

#include "negfspec/kernels.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <vector>

using namespace negf;

namespace {

LevelScheme ladder() {
  LevelScheme s;
  s.omega.resize(3);
  s.omega << 0.0, 1.5, 0.5;
  s.ground = 0;
  s.dipole = Mat::Zero(3, 3);
  s.dipole(0, 1) = s.dipole(1, 0) = 1.0;
  s.dipole(1, 2) = s.dipole(2, 1) = 1.0;
  s.dephasing = RMat::Zero(3, 3);
  s.dephasing(0, 1) = s.dephasing(1, 0) = 0.05;
  s.dephasing(0, 2) = s.dephasing(2, 0) = 0.02;
  return s;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> g(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    g[static_cast<size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return g;
}

}  // namespace

int main(int argc, char** argv) {
  int n = 160;
  if (argc > 1) n = std::atoi(argv[1]);

  const LevelScheme s = ladder();
  std::vector<FieldMode> modes(2);
  modes[0].omega = 1.5;
  modes[0].alpha = 1.0;
  modes[0].volume = 1000.0;
  modes[1].omega = 1.0;
  modes[1].alpha = 0.0;
  modes[1].role = ModeRole::signal;
  modes[1].volume = 1000.0;

  ModelConstants c;
  const Process p = sle_process(0, 1);
  const SignalPlan plan = make_plan(s, modes, p, c);
  const std::vector<double> base = {1.5, 1.0};
  const std::vector<double> ga = linspace(1.3, 1.7, n);
  const std::vector<double> gb = linspace(0.8, 1.2, n);

  using clock = std::chrono::steady_clock;

  auto t0 = clock::now();
  const RMat serial = rate_map(s, modes, plan, c, base, 0, ga, 1, gb,
                               true, false);
  auto t1 = clock::now();
  const RMat parallel = rate_map(s, modes, plan, c, base, 0, ga, 1, gb,
                                 true, true);
  auto t2 = clock::now();

  const double ts = std::chrono::duration<double>(t1 - t0).count();
  const double tp = std::chrono::duration<double>(t2 - t1).count();
  double max_diff = 0.0;
  bool bitwise = true;
  for (int i = 0; i < serial.rows(); ++i)
    for (int j = 0; j < serial.cols(); ++j) {
      const double d = std::abs(serial(i, j) - parallel(i, j));
      if (d > max_diff) max_diff = d;
      if (serial(i, j) != parallel(i, j)) bitwise = false;
    }

  std::printf("grid          : %d x %d\n", n, n);
  std::printf("threads       : %d\n", thread_count());
  std::printf("serial        : %.3f s\n", ts);
  std::printf("parallel      : %.3f s\n", tp);
  std::printf("speedup       : %.2fx\n", ts / tp);
  std::printf("max |diff|    : %.3g\n", max_diff);
  std::printf("bitwise equal : %s\n", bitwise ? "yes" : "no");
  return bitwise ? 0 : 1;
}
