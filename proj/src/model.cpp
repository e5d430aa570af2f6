#include "mfbm/model.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

#include "mfbm/error.hpp"
#include "mfbm/quadrature.hpp"

namespace mfbm {

namespace {

constexpr double kPi = std::numbers::pi;
// Above this abscissa the oscillatory tail is summed asymptotically.
constexpr double kTailStart = 128.0 * kPi;
constexpr double kRelTol = 1e-12;

// (1 - cos v) / v^2 without cancellation near 0.
double one_minus_cos_over_sq(double v) {
  if (std::abs(v) < 1e-4) return 0.5 - v * v / 24.0;
  const double s = std::sin(0.5 * v);
  return 2.0 * s * s / (v * v);
}

// int_{x0}^{x1} for 0 <= x0 <= x1 <= 1. Substituting w = v^(2-2H) turns
// v^(1-2H) dv into dw / (2-2H) and removes the endpoint singularity.
double head_integral(double H, double x0, double x1) {
  const double s = 2.0 - 2.0 * H;
  auto f = [s](double w) { return one_minus_cos_over_sq(std::pow(w, 1.0 / s)); };
  const auto r = quad::integrate(f, std::pow(x0, s), std::pow(x1, s), {kRelTol, 0.0, 4000});
  return r.value / s;
}

// int_{x0}^{x1} for 1 <= x0 <= x1 <= kTailStart, one panel per period.
double middle_integral(double H, double x0, double x1) {
  const double p = 2.0 * H + 1.0;
  auto f = [p](double v) {
    const double s = std::sin(0.5 * v);
    return 2.0 * s * s * std::pow(v, -p);
  };
  std::vector<double> breaks;
  for (double b = std::ceil(x0 / (2.0 * kPi)) * 2.0 * kPi; b < x1; b += 2.0 * kPi) {
    breaks.push_back(b);
  }
  return quad::integrate(f, x0, x1, {kRelTol, 0.0, 20000}, breaks).value;
}

// int_x^inf (1 - cos v) v^-p dv for x >= kTailStart:
//   x^(1-p)/(p-1) - Re int_x^inf e^{iv} v^-p dv,
// the latter from int_x^inf e^{iv} v^-p dv = i e^{ix} sum_n (-i)^n (p)_n x^(-p-n).
double tail_integral(double H, double x) {
  const double p = 2.0 * H + 1.0;
  std::complex<double> sum = 0.0;
  std::complex<double> term = std::pow(x, -p);
  const std::complex<double> minus_i(0.0, -1.0);
  for (int n = 0; n < 60; ++n) {
    sum += term;
    const auto next = term * minus_i * (p + n) / x;
    if (std::abs(next) < 1e-18 * std::abs(sum)) break;
    term = next;
  }
  const std::complex<double> osc = std::complex<double>(0.0, 1.0) * std::polar(1.0, x) * sum;
  return std::pow(x, 1.0 - p) / (p - 1.0) - osc.real();
}

void check_hurst(double H) {
  if (!(H > 0.0 && H < 1.0)) {
    throw ArgumentError("Hurst index must lie in (0,1), got " + std::to_string(H));
  }
}

}  // namespace

void ModelSpec::validate() const {
  if (H.size() != omega.size() + 1 || sigma.size() != omega.size() + 1) {
    throw ArgumentError("model needs K+1 Hurst indices and scales for K change frequencies");
  }
  for (std::size_t i = 0; i < omega.size(); ++i) {
    if (!(omega[i] > 0.0) || !std::isfinite(omega[i])) {
      throw ArgumentError("change frequencies must be positive and finite");
    }
    if (i > 0 && !(omega[i] > omega[i - 1])) {
      throw ArgumentError("change frequencies must be strictly ascending");
    }
  }
  for (std::size_t i = 0; i < H.size(); ++i) {
    check_hurst(H[i]);
    if (!(sigma[i] > 0.0) || !std::isfinite(sigma[i])) {
      throw ArgumentError("scale parameters must be positive and finite");
    }
  }
  for (std::size_t i = 0; i + 1 < H.size(); ++i) {
    const double dh = H[i + 1] - H[i];
    const double ds = sigma[i + 1] - sigma[i];
    if (dh * dh + ds * ds <= 0.0) {
      throw ArgumentError("adjacent regimes " + std::to_string(i) + " and " +
                          std::to_string(i + 1) + " have identical (H, sigma)");
    }
  }
}

ModelSpec ModelSpec::fbm(double H, double sigma) { return ModelSpec{{}, {H}, {sigma}}; }

void SampledPath::validate() const {
  if (values.size() < 2) throw ArgumentError("a path needs at least 2 samples");
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw ArgumentError("sampling step must be positive");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw ArgumentError("path contains non-finite values");
  }
}

double spectral_weight(const ModelSpec& model, double xi) {
  if (xi == 0.0) throw DomainError("spectral weight has a non-integrable pole at xi = 0");
  const double ax = std::abs(xi);
  const auto band = static_cast<std::size_t>(
      std::upper_bound(model.omega.begin(), model.omega.end(), ax) - model.omega.begin());
  const double s = model.sigma[band];
  return s * s * std::pow(ax, -(2.0 * model.H[band] + 1.0));
}

double band_integral(double H, double x0, double x1) {
  check_hurst(H);
  if (!(x0 >= 0.0) || !(x1 >= x0)) throw ArgumentError("band_integral needs 0 <= x0 <= x1");
  if (x0 == x1) return 0.0;
  double total = 0.0;
  if (x0 < 1.0) total += head_integral(H, x0, std::min(x1, 1.0));
  if (x1 > 1.0 && x0 < kTailStart) {
    const double lo = std::max(x0, 1.0);
    const double hi = std::min(x1, kTailStart);
    if (hi > lo) total += middle_integral(H, lo, hi);
  }
  if (x1 > kTailStart) {
    const double lo = std::max(x0, kTailStart);
    total += tail_integral(H, lo);
    if (std::isfinite(x1)) total -= tail_integral(H, x1);
  }
  return total;
}

double c_const(double H) {
  check_hurst(H);
  static std::mutex mutex;
  static std::map<double, double> cache;
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(H); it != cache.end()) return it->second;
  }
  const double value = band_integral(H, 0.0, std::numeric_limits<double>::infinity());
  std::lock_guard lock(mutex);
  cache.emplace(H, value);
  return value;
}

double variogram(const ModelSpec& model, double delta) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw ArgumentError("lag must be >= 0");
  if (delta == 0.0) return 0.0;
  const std::size_t K = model.K();
  double v = 0.0;
  for (std::size_t j = 0; j <= K; ++j) {
    const double lo = j == 0 ? 0.0 : delta * model.omega[j - 1];
    const double hi = j == K ? std::numeric_limits<double>::infinity() : delta * model.omega[j];
    const double H = model.H[j];
    double piece = 0.0;
    if (lo == 0.0 && !std::isfinite(hi)) {
      piece = c_const(H);
    } else if (!std::isfinite(hi) && lo < kTailStart) {
      // C(H) minus the head keeps the cached constant in play for the last band.
      piece = c_const(H) - band_integral(H, 0.0, lo);
    } else {
      piece = band_integral(H, lo, hi);
    }
    v += 4.0 * model.sigma[j] * model.sigma[j] * std::pow(delta, 2.0 * H) * piece;
  }
  return v;
}

std::vector<double> variogram_ladder(const ModelSpec& model, double step, std::size_t n) {
  std::vector<double> out(n + 1, 0.0);
  for (std::size_t k = 1; k <= n; ++k) out[k] = variogram(model, step * static_cast<double>(k));
  return out;
}

std::pair<Asymptote, Asymptote> variogram_asymptotes(const ModelSpec& model) {
  model.validate();
  const std::size_t K = model.K();
  auto line = [&](std::size_t j, Regime regime) {
    const double s2 = model.sigma[j] * model.sigma[j];
    return Asymptote{regime, 2.0 * model.H[j], std::log(4.0 * s2 * c_const(model.H[j]))};
  };
  return {line(0, Regime::low_frequency), line(K, Regime::high_frequency)};
}

double covariance(const ModelSpec& model, double s, double t) {
  if (!(s >= 0.0 && t >= 0.0)) throw ArgumentError("covariance needs s, t >= 0");
  return 0.5 * (variogram(model, s) + variogram(model, t) - variogram(model, std::abs(t - s)));
}

double empirical_variogram(const SampledPath& path, std::size_t lag) {
  const std::size_t n = path.size();
  if (lag < 1 || lag >= n) {
    throw ArgumentError("empirical variogram lag must satisfy 1 <= lag < N");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i + lag < n; ++i) {
    const double d = path.values[i + lag] - path.values[i];
    acc += d * d;
  }
  return acc / static_cast<double>(n - lag);
}

}  // namespace mfbm
