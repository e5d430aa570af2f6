#pragma once

// Change-frequency detection on the log wavelet spectrum. A segmentation
// T = (t_0 = 0, t_1, ..., t_K, t_{K+1} = a_N + tau) splits the grid into K+1
// segments; segment j is regressed on indices t_j + 1 .. t_{j+1} - tau, the
// tau indices before each change being a transition zone where the wavelet
// band straddles the change frequency.

#include <cstddef>
#include <vector>

#include "mfbm/grid.hpp"

namespace mfbm {

class BandWavelet;

/// Errors: invalid bounds (ArgumentError); a_N < 2 (tau + 1) (ArgumentError).
/// Soft guidance violations (N f_min / beta < 10, f_max / alpha > 1 / delta)
/// are recorded in `warnings`.
FrequencyGrid build_grid(std::size_t N, double delta, double f_min, double f_max, double alpha,
                         double beta);
FrequencyGrid build_grid(std::size_t N, double delta, double f_min, double f_max,
                         const BandWavelet& w);

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
  double operator()(double x) const noexcept { return slope * x + intercept; }
};

struct Segmentation {
  std::vector<std::size_t> T;  // t_0 .. t_{K+1}
  std::vector<Line> lambda;    // one per segment
  double Q = 0.0;

  std::size_t K() const noexcept { return T.size() - 2; }
  /// First and last regression index of segment j.
  std::size_t first(std::size_t j) const noexcept { return T[j] + 1; }
  std::size_t last(std::size_t j, std::size_t tau) const noexcept { return T[j + 1] - tau; }
};

/// Full breakpoint vector check: endpoints, ascending, gaps > tau.
bool admissible(const std::vector<std::size_t>& T, const FrequencyGrid& grid);

/// Q = sum_j sum_{i = t_j + 1}^{t_{j+1} - tau} (Y_i - lambda_j(log f_i))^2.
double criterion_Q(const std::vector<double>& Y, const FrequencyGrid& grid,
                   const std::vector<std::size_t>& T, const std::vector<Line>& lambda);

/// Global minimizer of Q over admissible T with K changes, each segment
/// holding at least 3 regression points and fitted by OLS. Exact dynamic
/// programming; near-ties go to the lexicographically smallest T.
/// Throws InfeasibleError when no admissible T exists.
Segmentation minimize_Q(const std::vector<double>& Y, const FrequencyGrid& grid, std::size_t K);

/// Ordinary least-squares line through (log f_i, Y_i), i in [first, last].
Line ols_line(const std::vector<double>& Y, const FrequencyGrid& grid, std::size_t first,
              std::size_t last);

/// omega_j = alpha f_{t_j}, j = 1..K.
std::vector<double> omega_hat(const FrequencyGrid& grid, const Segmentation& seg);

/// Per segment: t_j + k s, k = 1..m, with s = floor((t_{j+1} - t_j - tau) / (m + 1)).
/// Throws ArgumentError when m < 3 or some s is 0.
std::vector<std::vector<std::size_t>> refine_points(const Segmentation& seg,
                                                    const FrequencyGrid& grid, std::size_t m);

/// Limits of the refine-point frequencies for true change frequencies `omega`:
/// segment j runs geometrically from lo_j to hi_j at exponents k / (m + 1),
/// lo_0 = f_min / beta, lo_j = omega_j / alpha, hi_j = omega_{j+1} / beta,
/// hi_K = f_max / alpha.
std::vector<std::vector<double>> refine_targets(const std::vector<double>& omega,
                                                const FrequencyGrid& grid, std::size_t m);

}  // namespace mfbm
