#pragma once

// Multiscale fractional Brownian motion: parameterization and exact
// second-order structure.
//
// A (M_K)-FBM has K frequency change points 0 < w_1 < ... < w_K and, on each
// band [w_i, w_{i+1}) of the Fourier variable, a Hurst index H_i and scale
// sigma_i. Its spectral weight is sigma_i^2 |xi|^-(2 H_i + 1) on that band and
// its variogram is
//
//   V(d) = 4 sum_i sigma_i^2 d^(2 H_i) int_{d w_i}^{d w_{i+1}} (1 - cos v) v^-(2 H_i + 1) dv.
//
// Frequencies are raw Fourier variables (no 2*pi Hz conversion).

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace mfbm {

struct ModelSpec {
  std::vector<double> omega;  // K ascending change frequencies
  std::vector<double> H;      // K+1 Hurst indices in (0,1)
  std::vector<double> sigma;  // K+1 positive scales

  std::size_t K() const noexcept { return omega.size(); }

  /// Throws ArgumentError naming the violated invariant.
  void validate() const;

  /// Single-regime FBM (K = 0).
  static ModelSpec fbm(double H, double sigma = 1.0);
};

/// Uniformly sampled trajectory X(delta), ..., X(N delta); X(0) = 0 is implicit.
struct SampledPath {
  double delta = 0.0;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  void validate() const;
};

/// rho^-2(xi): sigma_i^2 |xi|^-(2H_i+1) for |xi| in [w_i, w_{i+1}). Throws DomainError at xi = 0.
double spectral_weight(const ModelSpec& model, double xi);

/// C(H) = int_0^inf (1 - cos v) / v^(2H+1) dv, computed by quadrature and cached per H.
double c_const(double H);

/// int_{x0}^{x1} (1 - cos v) / v^(2H+1) dv for 0 <= x0 <= x1 <= +inf.
double band_integral(double H, double x0, double x1);

/// Theoretical variogram V(delta) = E (X(t+delta) - X(t))^2.
double variogram(const ModelSpec& model, double delta);

/// V at lags step, 2 step, ..., n step (index 0 holds V(0) = 0, so size n+1).
std::vector<double> variogram_ladder(const ModelSpec& model, double step, std::size_t n);

enum class Regime { low_frequency, high_frequency };

struct Asymptote {
  Regime regime;
  double slope;
  double intercept;  // natural log
};

/// Log-log asymptotes of V: delta -> inf (slope 2H_0) and delta -> 0 (slope 2H_K).
std::pair<Asymptote, Asymptote> variogram_asymptotes(const ModelSpec& model);

/// Cov(X(s), X(t)) = (V(s) + V(t) - V(|t - s|)) / 2 for s, t >= 0.
double covariance(const ModelSpec& model, double s, double t);

/// V_N(lag) = (N - lag)^-1 sum_i (X_{i+lag} - X_i)^2, 1 <= lag < N.
double empirical_variogram(const SampledPath& path, std::size_t lag);

}  // namespace mfbm
