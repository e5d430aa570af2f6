#pragma once

// Band-limited analyzing wavelets: psi_hat even, real, nonnegative and
// supported on alpha <= |xi| <= beta, so
//
//   psi(t) = (1/pi) int_alpha^beta psi_hat(xi) cos(t xi) dxi.
//
// psi is tabulated once per sampling step (cubic Hermite between nodes) and
// every wavelet coefficient is a windowed Riemann sum against that table.

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "mfbm/grid.hpp"
#include "mfbm/kernels.hpp"
#include "mfbm/model.hpp"

namespace mfbm {

enum class WaveletKind { bump, meyer_shifted, custom_table };

std::string_view wavelet_kind_name(WaveletKind kind);
/// "bump", "meyer-shifted" or "custom-table"; throws ArgumentError otherwise.
WaveletKind parse_wavelet_kind(std::string_view name);

/// Time-domain samples of psi on t >= 0 (psi is even).
struct WaveletTable {
  double step = 0.0;
  double reach = 0.0;     // psi treated as 0 for |t| >= reach
  double max_abs = 0.0;   // max |psi|
  double tail_ratio = 0.0;  // max |psi| beyond reach over max_abs (estimate)
  std::vector<kernels::CubicRow> rows;  // Hermite coefficients per interval

  std::size_t intervals() const noexcept { return rows.size(); }
  kernels::EvenCubicTable view() const noexcept {
    return {rows.data(), intervals(), 1.0 / step};
  }
  double eval(double t) const noexcept;
};

class BandWavelet {
 public:
  /// exp(-1 / ((|xi| - alpha)(beta - |xi|))) on the band.
  static BandWavelet bump(double alpha = 5.0, double beta = 10.0);
  /// Lemarie-Meyer modulus (nu(x) = x^4 (35 - 84x + 70x^2 - 20x^3)) moved
  /// affinely from [2pi/3, 8pi/3] onto [pi, 2pi].
  static BandWavelet meyer_shifted();
  /// Piecewise-linear profile through (xi_i, value_i), all strictly inside
  /// (alpha, beta); zero at both band edges.
  static BandWavelet custom(double alpha, double beta, std::vector<double> xi,
                            std::vector<double> value);
  /// Reads a two-column whitespace/comma separated (xi, psi_hat) file.
  static BandWavelet load_custom(const std::string& path, double alpha, double beta);

  WaveletKind kind() const noexcept;
  double alpha() const noexcept;
  double beta() const noexcept;

  double psi_hat(double xi) const;
  /// Kinks or knots of psi_hat inside (alpha, beta), used to split quadratures.
  const std::vector<double>& breakpoints() const noexcept;

  /// psi(t) from the default table (step 2 pi / (64 beta)); 0 beyond its reach.
  double psi_time(double t) const;

  /// Table with step min(delta, 2 pi / (64 beta)); built once per step, shared by copies.
  std::shared_ptr<const WaveletTable> table(double delta) const;
  std::shared_ptr<const WaveletTable> default_table() const;

 private:
  struct State;
  explicit BandWavelet(std::shared_ptr<State> state);
  std::shared_ptr<State> state_;
};

/// K_H = 2 int_lo^hi profile(u)^2 u^(-2H-1) du for an arbitrary profile on [lo, hi].
double k_const(const std::function<double(double)>& profile, double lo, double hi, double H,
               const std::vector<double>& breakpoints = {});
double k_const(const BandWavelet& w, double H);

/// I_1(a) = a int |psi_hat(a u)|^2 rho^-2(u) du.
double theoretical_variance(const ModelSpec& model, const BandWavelet& w, double a);

/// e_X(a, k delta) = (delta / sqrt a) sum_p psi(p delta / a - k delta) X_p, with
/// the stored sample values[p] at position p.
double empirical_coeff(const SampledPath& path, const BandWavelet& w, double a, std::size_t k);

/// Shift indices D_N(a) = {floor(r N / a), ..., floor((1 - r) N / a)}.
struct ShiftRange {
  std::size_t first = 0;
  std::size_t last = 0;
  std::size_t count() const noexcept { return last - first + 1; }
};
ShiftRange shift_range(std::size_t N, double a, double r);

/// J_N(a): mean of e_X(a, k delta)^2 over D_N(a).
double wavelet_variance(const SampledPath& path, const BandWavelet& w, double a, double r);

struct WaveletSpectrum {
  FrequencyGrid grid;
  std::vector<double> Y;  // log J_N(1 / f_k)
  double r = 0.0;
  std::vector<std::size_t> counts;

  std::vector<double> log_f() const;
};

/// Y_k = log J_N(1/f_k) for every grid frequency. Constant or all-zero paths
/// raise DegeneratePathError. `threads` > 1 splits the scales across workers.
WaveletSpectrum spectrum(const SampledPath& path, const BandWavelet& w, const FrequencyGrid& grid,
                         double r = 0.1, unsigned threads = 1);

}  // namespace mfbm
