#include "mfbm/wavelet.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "mfbm/error.hpp"
#include "mfbm/quadrature.hpp"

namespace mfbm {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kReachThreshold = 1e-10;
constexpr std::size_t kMinFft = std::size_t{1} << 14;
constexpr std::size_t kMaxFft = std::size_t{1} << 23;

// The FFTW planner is not re-entrant.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

double meyer_nu(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return x * x * x * x * (35.0 - 84.0 * x + 70.0 * x * x - 20.0 * x * x * x);
}

// |psi_hat| of the Lemarie-Meyer wavelet, support 2pi/3 <= w <= 8pi/3.
double meyer_modulus(double w) {
  if (w <= 2.0 * kPi / 3.0 || w >= 8.0 * kPi / 3.0) return 0.0;
  if (w <= 4.0 * kPi / 3.0) return std::sin(0.5 * kPi * meyer_nu(3.0 * w / (2.0 * kPi) - 1.0));
  return std::cos(0.5 * kPi * meyer_nu(3.0 * w / (4.0 * kPi) - 1.0));
}

struct FftBuffers {
  explicit FftBuffers(std::size_t n)
      : n(n), in(fftw_alloc_real(n)), out(fftw_alloc_complex(n / 2 + 1)) {
    if (in == nullptr || out == nullptr) {
      release();
      throw ResourceError("cannot allocate FFT buffers of length " + std::to_string(n));
    }
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
  }
  ~FftBuffers() { release(); }
  FftBuffers(const FftBuffers&) = delete;
  FftBuffers& operator=(const FftBuffers&) = delete;

  void release() {
    std::lock_guard lock(fftw_planner_mutex());
    if (plan != nullptr) fftw_destroy_plan(plan);
    if (in != nullptr) fftw_free(in);
    if (out != nullptr) fftw_free(out);
    plan = nullptr;
    in = nullptr;
    out = nullptr;
  }

  std::size_t n;
  double* in;
  fftw_complex* out;
  fftw_plan plan = nullptr;
};

}  // namespace

std::string_view wavelet_kind_name(WaveletKind kind) {
  switch (kind) {
    case WaveletKind::bump: return "bump";
    case WaveletKind::meyer_shifted: return "meyer-shifted";
    case WaveletKind::custom_table: return "custom-table";
  }
  return "unknown";
}

WaveletKind parse_wavelet_kind(std::string_view name) {
  if (name == "bump") return WaveletKind::bump;
  if (name == "meyer-shifted") return WaveletKind::meyer_shifted;
  if (name == "custom-table") return WaveletKind::custom_table;
  throw ArgumentError("unknown wavelet kind '" + std::string(name) +
                      "' (expected bump, meyer-shifted or custom-table)");
}

double WaveletTable::eval(double t) const noexcept {
  const double u = std::abs(t) / step;
  if (!(u < static_cast<double>(intervals()))) return 0.0;
  const auto j = static_cast<std::size_t>(u);
  const double x = u - static_cast<double>(j);
  const double* c = rows[j].c;
  return c[0] + x * (c[1] + x * (c[2] + x * c[3]));
}

struct BandWavelet::State {
  WaveletKind kind;
  double alpha;
  double beta;
  std::function<double(double)> profile;  // on alpha < x < beta
  std::vector<double> breaks;

  std::mutex mutex;
  std::map<double, std::shared_ptr<const WaveletTable>> tables;

  double psi_hat(double xi) const {
    const double x = std::abs(xi);
    if (!(x > alpha && x < beta)) return 0.0;
    return profile(x);
  }

  std::shared_ptr<const WaveletTable> build(double step) const;
};

// Trapezoid samples xi_m = m dxi with dxi = 2 pi / (L h) turn the cosine
// integral into one real FFT: by Poisson summation the result is exactly
// sum_n psi(t_j + n L h), so L h >= 3 reach keeps aliases below threshold.
std::shared_ptr<const WaveletTable> BandWavelet::State::build(double step) const {
  for (std::size_t L = kMinFft;; L *= 2) {
    FftBuffers fft(L);
    const double dxi = 2.0 * kPi / (static_cast<double>(L) * step);
    const std::size_t half = L / 2;
    for (std::size_t m = 0; m < L; ++m) fft.in[m] = psi_hat(static_cast<double>(m) * dxi);
    fftw_execute(fft.plan);
    std::vector<double> psi(half + 1), dpsi(half + 1);
    for (std::size_t j = 0; j <= half; ++j) psi[j] = dxi / kPi * fft.out[j][0];
    for (std::size_t m = 0; m < L; ++m) fft.in[m] *= static_cast<double>(m) * dxi;
    fftw_execute(fft.plan);
    for (std::size_t j = 0; j <= half; ++j) dpsi[j] = dxi / kPi * fft.out[j][1];

    double max_abs = 0.0;
    for (double v : psi) max_abs = std::max(max_abs, std::abs(v));
    if (!(max_abs > 0.0)) throw NumericError("wavelet profile integrates to zero");
    std::size_t last = half - 1;
    while (last > 0 && std::abs(psi[last]) <= kReachThreshold * max_abs) --last;

    const bool capped = 2 * L > kMaxFft;
    if (3 * (last + 1) > L && !capped) continue;

    auto table = std::make_shared<WaveletTable>();
    std::size_t intervals = last + 1;
    if (3 * intervals > L) intervals = L / 3;  // reach cap for slowly decaying profiles
    table->step = step;
    table->reach = static_cast<double>(intervals) * step;
    table->max_abs = max_abs;
    double tail = 0.0;
    for (std::size_t j = intervals; j <= half; ++j) tail = std::max(tail, std::abs(psi[j]));
    table->tail_ratio = tail / max_abs;
    table->rows.resize(intervals);
    for (std::size_t j = 0; j < intervals; ++j) {
      const double p0 = psi[j], p1 = psi[j + 1];
      const double d0 = step * dpsi[j], d1 = step * dpsi[j + 1];
      double* c = table->rows[j].c;
      c[0] = p0;
      c[1] = d0;
      c[2] = 3.0 * (p1 - p0) - 2.0 * d0 - d1;
      c[3] = 2.0 * (p0 - p1) + d0 + d1;
    }
    return table;
  }
}

BandWavelet::BandWavelet(std::shared_ptr<State> state) : state_(std::move(state)) {}

BandWavelet BandWavelet::bump(double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > alpha) || !std::isfinite(beta)) {
    throw ArgumentError("wavelet band needs 0 < alpha < beta");
  }
  auto s = std::make_shared<State>();
  s->kind = WaveletKind::bump;
  s->alpha = alpha;
  s->beta = beta;
  s->profile = [alpha, beta](double x) { return std::exp(-1.0 / ((x - alpha) * (beta - x))); };
  return BandWavelet(std::move(s));
}

BandWavelet BandWavelet::meyer_shifted() {
  auto s = std::make_shared<State>();
  s->kind = WaveletKind::meyer_shifted;
  s->alpha = kPi;
  s->beta = 2.0 * kPi;
  // x in [pi, 2pi] <-> w = 2 (x - pi) + 2pi/3 in [2pi/3, 8pi/3].
  s->profile = [](double x) { return meyer_modulus(2.0 * (x - kPi) + 2.0 * kPi / 3.0); };
  s->breaks = {4.0 * kPi / 3.0};
  return BandWavelet(std::move(s));
}

BandWavelet BandWavelet::custom(double alpha, double beta, std::vector<double> xi,
                                std::vector<double> value) {
  if (!(alpha > 0.0) || !(beta > alpha) || !std::isfinite(beta)) {
    throw ArgumentError("wavelet band needs 0 < alpha < beta");
  }
  if (xi.size() != value.size() || xi.empty()) {
    throw ArgumentError("custom wavelet profile needs matching, non-empty xi and value lists");
  }
  for (std::size_t i = 0; i < xi.size(); ++i) {
    if (!(xi[i] > alpha && xi[i] < beta)) {
      throw ArgumentError("custom wavelet knots must lie strictly inside (alpha, beta)");
    }
    if (i > 0 && !(xi[i] > xi[i - 1])) {
      throw ArgumentError("custom wavelet knots must be strictly ascending");
    }
    if (!(value[i] >= 0.0) || !std::isfinite(value[i])) {
      throw ArgumentError("custom wavelet profile values must be finite and nonnegative");
    }
  }
  if (*std::max_element(value.begin(), value.end()) <= 0.0) {
    throw ArgumentError("custom wavelet profile is identically zero");
  }
  std::vector<double> x{alpha}, y{0.0};
  x.insert(x.end(), xi.begin(), xi.end());
  y.insert(y.end(), value.begin(), value.end());
  x.push_back(beta);
  y.push_back(0.0);

  auto s = std::make_shared<State>();
  s->kind = WaveletKind::custom_table;
  s->alpha = alpha;
  s->beta = beta;
  s->breaks = xi;
  s->profile = [x = std::move(x), y = std::move(y)](double v) {
    const auto it = std::upper_bound(x.begin(), x.end(), v);
    const auto i = static_cast<std::size_t>(it - x.begin());
    if (i == 0 || i >= x.size()) return 0.0;
    const double w = (v - x[i - 1]) / (x[i] - x[i - 1]);
    return (1.0 - w) * y[i - 1] + w * y[i];
  };
  return BandWavelet(std::move(s));
}

BandWavelet BandWavelet::load_custom(const std::string& path, double alpha, double beta) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open wavelet profile '" + path + "'");
  std::vector<double> xi, value;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double a, b;
    if (!(ss >> a)) {
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#' || lineno == 1) continue;
      throw ArgumentError(path + ":" + std::to_string(lineno) + ": expected two numbers");
    }
    if (!(ss >> b)) {
      throw ArgumentError(path + ":" + std::to_string(lineno) + ": expected two numbers");
    }
    xi.push_back(a);
    value.push_back(b);
  }
  return custom(alpha, beta, std::move(xi), std::move(value));
}

WaveletKind BandWavelet::kind() const noexcept { return state_->kind; }
double BandWavelet::alpha() const noexcept { return state_->alpha; }
double BandWavelet::beta() const noexcept { return state_->beta; }
double BandWavelet::psi_hat(double xi) const { return state_->psi_hat(xi); }
const std::vector<double>& BandWavelet::breakpoints() const noexcept { return state_->breaks; }

std::shared_ptr<const WaveletTable> BandWavelet::table(double delta) const {
  if (!(delta > 0.0)) throw ArgumentError("table step must be positive");
  const double step = std::min(delta, 2.0 * kPi / (64.0 * state_->beta));
  std::lock_guard lock(state_->mutex);
  auto& slot = state_->tables[step];
  if (!slot) slot = state_->build(step);
  return slot;
}

std::shared_ptr<const WaveletTable> BandWavelet::default_table() const {
  return table(2.0 * kPi / (64.0 * state_->beta));
}

double BandWavelet::psi_time(double t) const { return default_table()->eval(t); }

double k_const(const std::function<double(double)>& profile, double lo, double hi, double H,
               const std::vector<double>& breakpoints) {
  if (!(H > 0.0 && H < 1.0)) throw ArgumentError("K_H needs H in (0,1)");
  if (!(lo > 0.0 && hi > lo)) throw ArgumentError("K_H needs 0 < lo < hi");
  const double p = -2.0 * H - 1.0;
  auto f = [&](double u) {
    const double v = profile(u);
    return v * v * std::pow(u, p);
  };
  return 2.0 * quad::integrate(f, lo, hi, {1e-12, 0.0, 4000}, breakpoints).value;
}

double k_const(const BandWavelet& w, double H) {
  return k_const([&w](double u) { return w.psi_hat(u); }, w.alpha(), w.beta(), H,
                 w.breakpoints());
}

double theoretical_variance(const ModelSpec& model, const BandWavelet& w, double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw ArgumentError("scale must be positive");
  model.validate();
  // Substituting xi = a u: 2 int_alpha^beta psi_hat(xi)^2 rho^-2(xi / a) dxi.
  std::vector<double> breaks = w.breakpoints();
  for (double om : model.omega) {
    const double x = a * om;
    if (x > w.alpha() && x < w.beta()) breaks.push_back(x);
  }
  std::sort(breaks.begin(), breaks.end());
  auto f = [&](double xi) {
    const double v = w.psi_hat(xi);
    return v * v * spectral_weight(model, xi / a);
  };
  return 2.0 * quad::integrate(f, w.alpha(), w.beta(), {1e-12, 0.0, 4000}, breaks).value;
}

namespace {

double coeff_with_table(const std::vector<double>& x, double delta, const WaveletTable& table,
                        double a, std::size_t k) {
  const std::size_t N = x.size();
  const double dt = delta / a;
  const double t0 = -static_cast<double>(k) * delta;
  // psi(p dt + t0) vanishes unless |p dt + t0| < reach.
  const double center = -t0 / dt;
  const double half = table.reach / dt;
  const double lo = std::ceil(center - half);
  const double hi = std::floor(center + half);
  if (hi < 0.0 || lo > static_cast<double>(N - 1)) return 0.0;
  const std::size_t p0 = lo <= 0.0 ? 0 : static_cast<std::size_t>(lo);
  const std::size_t p1 = hi >= static_cast<double>(N - 1) ? N - 1 : static_cast<std::size_t>(hi);
  if (p0 > p1) return 0.0;
  const double s = kernels::windowed_dot(table.view(), x.data() + p0, p1 - p0 + 1,
                                         t0 + static_cast<double>(p0) * dt, dt);
  return delta / std::sqrt(a) * s;
}

double variance_with_table(const std::vector<double>& x, double delta, const WaveletTable& table,
                           double a, const ShiftRange& range) {
  double acc = 0.0;
  for (std::size_t k = range.first; k <= range.last; ++k) {
    const double e = coeff_with_table(x, delta, table, a, k);
    acc += e * e;
  }
  return acc / static_cast<double>(range.count());
}

bool is_constant(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

}  // namespace

double empirical_coeff(const SampledPath& path, const BandWavelet& w, double a, std::size_t k) {
  if (!(a > 0.0) || !std::isfinite(a)) throw ArgumentError("scale must be positive");
  if (path.values.empty()) throw ArgumentError("path is empty");
  if (!(path.delta > 0.0)) throw ArgumentError("sampling step must be positive");
  return coeff_with_table(path.values, path.delta, *w.table(path.delta), a, k);
}

ShiftRange shift_range(std::size_t N, double a, double r) {
  if (!(r > 0.0 && r < 1.0 / 3.0)) throw ArgumentError("trimming fraction r must lie in (0, 1/3)");
  if (!(a > 0.0)) throw ArgumentError("scale must be positive");
  const double n = static_cast<double>(N);
  return {static_cast<std::size_t>(std::floor(r * n / a)),
          static_cast<std::size_t>(std::floor((1.0 - r) * n / a))};
}

double wavelet_variance(const SampledPath& path, const BandWavelet& w, double a, double r) {
  path.validate();
  return variance_with_table(path.values, path.delta, *w.table(path.delta), a,
                             shift_range(path.size(), a, r));
}

std::vector<double> WaveletSpectrum::log_f() const {
  std::vector<double> out(grid.f.size());
  std::transform(grid.f.begin(), grid.f.end(), out.begin(), [](double f) { return std::log(f); });
  return out;
}

WaveletSpectrum spectrum(const SampledPath& path, const BandWavelet& w, const FrequencyGrid& grid,
                         double r, unsigned threads) {
  path.validate();
  if (grid.f.empty()) throw ArgumentError("frequency grid is empty");
  if (grid.alpha != w.alpha() || grid.beta != w.beta()) {
    throw ArgumentError("frequency grid was built for a different wavelet band");
  }
  if (is_constant(path.values)) {
    throw DegeneratePathError("path is constant; its wavelet spectrum is degenerate");
  }
  const auto table = w.table(path.delta);

  WaveletSpectrum out;
  out.grid = grid;
  out.r = r;
  const std::size_t n = grid.f.size();
  out.Y.assign(n, 0.0);
  out.counts.assign(n, 0);
  std::vector<double> J(n, 0.0);
  std::vector<ShiftRange> ranges(n);
  for (std::size_t i = 0; i < n; ++i) {
    ranges[i] = shift_range(path.size(), 1.0 / grid.f[i], r);
    out.counts[i] = ranges[i].count();
  }

  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < n; i += stride) {
      J[i] = variance_with_table(path.values, path.delta, *table, 1.0 / grid.f[i], ranges[i]);
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          work(t, threads);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (!(J[i] > 0.0)) {
      throw DegeneratePathError(
          "wavelet variance vanishes at f = " + std::to_string(grid.f[i]), grid.f[i]);
    }
    out.Y[i] = std::log(J[i]);
    if (!std::isfinite(out.Y[i])) {
      throw AnalysisError("non-finite log wavelet variance at f = " + std::to_string(grid.f[i]),
                          grid.f[i]);
    }
  }
  return out;
}

}  // namespace mfbm
