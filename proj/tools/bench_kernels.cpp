// Compares the OpenMP kernels against their serial reference implementations:
// same answer, wall-clock side by side. Run with OMP_NUM_THREADS to taste.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>

#include "perimlab/energy.hpp"
#include "perimlab/geometry.hpp"
#include "perimlab/ginibre.hpp"
#include "perimlab/kernel.hpp"
#include "perimlab/reference.hpp"

using namespace perimlab;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

void print_row(const char* name, double parallel_s, double serial_s, double a, double b,
               double tol) {
  const double rel = std::abs(a - b) / std::max(std::abs(b), 1e-300);
  std::printf("%-24s %10.3fs %10.3fs %8.2fx   %.6e vs %.6e  (rel %.2e)  %s\n", name,
              parallel_s, serial_s, serial_s / std::max(parallel_s, 1e-9), a, b, rel,
              rel <= tol ? "agree" : "DISAGREE");
}

}  // namespace

int main(int argc, char** argv) {
  std::int64_t mc_samples = 2000000;
  int variance_n = 50;
  if (argc > 1) mc_samples = std::atoll(argv[1]);
  if (argc > 2) variance_n = std::atoi(argv[2]);

  std::printf("%-24s %11s %11s %9s   %s\n", "kernel", "parallel", "serial", "speedup",
              "values");

  {
    const Polygon square = make_square(1.0);
    const RadialKernel kernel = RadialKernel::gaussian();
    const double t = 0.1;

    auto t0 = clock_type::now();
    const Estimate par = energy_direct_mc(square, kernel, t, mc_samples, 99);
    const double par_s = seconds_since(t0);

    t0 = clock_type::now();
    const Estimate ser = reference::energy_direct_mc_serial(square, kernel, t, mc_samples, 99);
    const double ser_s = seconds_since(t0);

    // Different streams, so agreement is statistical: 5 combined sigmas.
    const double tol = 5.0 * std::hypot(par.se, ser.se) / std::max(ser.value, 1e-300);
    print_row("energy_direct_mc", par_s, ser_s, par.value, ser.value, tol);
  }

  {
    const Polygon disk = make_regular_ngon(0.5);
    const KernelQuadrature quad = KernelQuadrature::build(disk, variance_n);

    auto t0 = clock_type::now();
    const double fast = kernel_variance_exact(variance_n, disk, quad);
    const double fast_s = seconds_since(t0);

    t0 = clock_type::now();
    const double slow = reference::kernel_variance_pairwise(variance_n, quad);
    const double slow_s = seconds_since(t0);

    print_row("kernel_variance", fast_s, slow_s, fast, slow, 1e-9);
  }

  return 0;
}
