#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace mfbm {

/// Geometric frequency grid f_k = (f_min / beta) q^k, k = 0..a_N, with
/// q = ((f_max / f_min)(beta / alpha))^(1/a_N) so that f_{a_N} = f_max / alpha.
/// tau = floor(log(beta/alpha) / log q) is the transition-zone length in grid
/// steps. Built by `build_grid` (changepoint.hpp).
struct FrequencyGrid {
  double f_min = 0.0;
  double f_max = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t N = 0;
  double delta = 0.0;
  std::size_t a_N = 0;
  double q = 0.0;
  std::size_t tau = 0;
  std::vector<double> f;
  std::vector<std::string> warnings;

  std::size_t size() const noexcept { return f.size(); }
};

}  // namespace mfbm
