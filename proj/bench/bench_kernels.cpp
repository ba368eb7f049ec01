// Serial reference vs OpenMP kernels. On one core the two should be close;
// the point is that both paths exist and agree.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <omp.h>

#include "normbranch/branch.hpp"
#include "normbranch/pass.hpp"

using namespace normbranch;

namespace {

template <class F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main() {
  std::printf("threads available: %d\n", omp_get_max_threads());

  ProblemSpec bn;
  bn.dimension = 4;
  bn.q = 4.0;
  const auto w = offset_window(admissible_window(bn), 0.01);
  StepPolicy par, ser;
  ser.parallel = false;
  Branch a, b;
  const double tp = seconds([&] { a = trace_branch(bn, w.first, w.second, par); });
  const double ts = seconds([&] { b = trace_branch(bn, w.first, w.second, ser); });
  const double ra = find_rho_star(a).rhoStar, rb = find_rho_star(b).rhoStar;
  std::printf("trace_branch N=4: openmp %.3f s (%zu points), serial %.3f s (%zu points), rho* diff %.1e\n", tp,
              a.points.size(), ts, b.points.size(), std::abs(ra - rb));

  ProblemSpec s;
  s.dimension = 4;
  s.mu = 1.0;
  s.p = 3.0;
  s.q = 4.0;
  const double rho = 0.1;
  PassConfig pc;
  pc.stringIterations = 200;
  const auto mesh = std::make_shared<const Mesh>(4, 1.0, pc.intervals);
  const double alpha = default_alpha(s, rho);
  const InitialPath init = initial_path(choose_eps0(s, rho, mesh, alpha, pc.cutoff), pc.nodes, s, rho, mesh, alpha);
  PathState pa, pb;
  const double sp = seconds([&] { pa = string_relax(init.arclength, s, pc); });
  const double ss = seconds([&] { pb = string_relax_serial(init.arclength, s, pc); });
  std::printf("string_relax (%d nodes, %d iterations max): openmp %.3f s, serial %.3f s, path max diff %.1e\n",
              pc.nodes, pc.stringIterations, sp, ss, std::abs(pa.max_energy() - pb.max_energy()));
  return 0;
}
