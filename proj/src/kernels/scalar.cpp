#include <cmath>

#include "mfbm/kernels.hpp"

namespace mfbm::kernels {

double windowed_dot_scalar(const EvenCubicTable& table, const double* x, std::size_t n, double t0,
                           double dt) {
  const double limit = static_cast<double>(table.intervals);
  double acc = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    const double t = t0 + static_cast<double>(p) * dt;
    const double u = std::abs(t) * table.inv_step;
    if (!(u < limit)) continue;
    const auto j = static_cast<std::size_t>(u);
    const double frac = u - static_cast<double>(j);
    const double* c = table.rows[j].c;
    const double f = c[0] + frac * (c[1] + frac * (c[2] + frac * c[3]));
    acc += f * x[p];
  }
  return acc;
}

}  // namespace mfbm::kernels
