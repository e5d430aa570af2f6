#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference
// implementation and, on x86-64, an AVX2+FMA variant compiled in its own
// translation unit; `active_isa()` picks one at runtime (overridable with the
// MFBM_SIMD environment variable: "scalar" or "avx2").

#include <cstddef>
#include <string_view>

namespace mfbm::kernels {

/// Coefficients of one interval, one 32-byte row so a vector lane loads it whole.
struct alignas(32) CubicRow {
  double c[4];
};

/// Piecewise-cubic table of an even function f on t >= 0. Interval j covers
/// [j h, (j+1) h) and f((j+u) h) = c0 + c1 u + c2 u^2 + c3 u^3 for u in [0,1).
/// Beyond the last interval f is taken as 0.
struct EvenCubicTable {
  const CubicRow* rows = nullptr;
  std::size_t intervals = 0;
  double inv_step = 0.0;
};

/// sum_{p=0}^{n-1} f(t0 + p dt) x[p] with f evaluated at |t| from the table.
using WindowedDotFn = double (*)(const EvenCubicTable&, const double* x, std::size_t n,
                                 double t0, double dt);

double windowed_dot_scalar(const EvenCubicTable& table, const double* x, std::size_t n,
                           double t0, double dt);
#if defined(MFBM_HAVE_AVX2_KERNELS)
double windowed_dot_avx2(const EvenCubicTable& table, const double* x, std::size_t n,
                         double t0, double dt);
#endif

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);
bool isa_supported(Isa isa);

/// Kernel set used by the library. Defaults to the best supported ISA.
Isa active_isa();
/// Throws ArgumentError when `isa` is not supported on this CPU/build.
void set_active_isa(Isa isa);
/// Parses "scalar" / "avx2"; throws ArgumentError otherwise.
Isa parse_isa(std::string_view name);

WindowedDotFn windowed_dot_for(Isa isa);

inline double windowed_dot(const EvenCubicTable& table, const double* x, std::size_t n, double t0,
                           double dt) {
  return windowed_dot_for(active_isa())(table, x, n, t0, dt);
}

}  // namespace mfbm::kernels
