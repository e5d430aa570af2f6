#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <vector>

#include "mfbm/changepoint.hpp"
#include "mfbm/error.hpp"
#include "mfbm/simulate.hpp"
#include "mfbm/wavelet.hpp"
#include "oracles.hpp"

using namespace mfbm;

namespace {

constexpr double kPi = std::numbers::pi;

double bump_profile(double x) {
  if (!(x > 5.0 && x < 10.0)) return 0.0;
  return std::exp(-1.0 / ((x - 5.0) * (10.0 - x)));
}

double meyer_profile(double xi) {
  auto nu = [](double x) {
    x = std::clamp(x, 0.0, 1.0);
    return x * x * x * x * (35 - 84 * x + 70 * x * x - 20 * x * x * x);
  };
  const double w = 2.0 * (std::abs(xi) - kPi) + 2.0 * kPi / 3.0;
  if (w <= 2 * kPi / 3 || w >= 8 * kPi / 3) return 0.0;
  if (w <= 4 * kPi / 3) return std::sin(kPi / 2 * nu(3 * w / (2 * kPi) - 1));
  return std::cos(kPi / 2 * nu(3 * w / (4 * kPi) - 1));
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

// Table-node sums h sum_j t_j^m psi(t_j) over the whole reach.
double table_moment(const WaveletTable& tab, int m) {
  const auto n = static_cast<long>(tab.intervals());
  double s = 0.0;
  for (long j = -n; j <= n; ++j) {
    const double t = j * tab.step;
    s += std::pow(t, m) * tab.eval(t);
  }
  return tab.step * s;
}

}  // namespace

TEST_CASE("bump profile") {
  const auto w = BandWavelet::bump(5.0, 10.0);
  CHECK(w.kind() == WaveletKind::bump);
  CHECK(w.psi_hat(11.0) == 0.0);
  CHECK(w.psi_hat(5.0) == 0.0);
  CHECK(w.psi_hat(10.0) == 0.0);
  CHECK(w.psi_hat(7.5) == doctest::Approx(std::exp(-0.16)).epsilon(1e-15));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 12.0);
  for (int i = 0; i < 100; ++i) {
    const double xi = u(rng);
    CHECK(w.psi_hat(-xi) == w.psi_hat(xi));
    CHECK(w.psi_hat(xi) == doctest::Approx(bump_profile(xi)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(BandWavelet::bump(10.0, 5.0), ArgumentError);
  CHECK(parse_wavelet_kind("meyer-shifted") == WaveletKind::meyer_shifted);
  CHECK_THROWS_AS(parse_wavelet_kind("haar"), ArgumentError);
}

TEST_CASE("time-domain wavelet matches direct cosine synthesis") {
  const auto w = BandWavelet::bump();
  const double at0 = w.psi_time(0.0);
  const double ref0 = oracle::psi_direct(bump_profile, 5.0, 10.0, 0.0);
  CHECK(at0 > 0.0);
  CHECK(at0 == doctest::Approx(ref0).epsilon(1e-9));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double t = u(rng);
    CHECK(w.psi_time(-t) == w.psi_time(t));
    worst = std::max(worst, std::abs(w.psi_time(t) - oracle::psi_direct(bump_profile, 5.0, 10.0, t)));
  }
  CHECK(worst <= 1e-6 * at0);
  const auto tab = w.default_table();
  CHECK(w.psi_time(tab->reach * 1.01) == 0.0);
  CHECK(tab->tail_ratio < 1e-10);
}

TEST_CASE("admissibility of the shipped wavelets") {
  const auto custom = BandWavelet::custom(2.0, 5.0, {2.5, 3.0, 4.0}, {0.5, 1.0, 0.2});
  for (const auto& w : {BandWavelet::bump(), BandWavelet::meyer_shifted(), custom}) {
    const auto tab = w.table(0.01);
    INFO("kind " << wavelet_kind_name(w.kind()));
    CHECK(std::abs(table_moment(*tab, 0)) <= 1e-8);
    CHECK(std::abs(table_moment(*tab, 1)) <= 1e-8);
  }
}

TEST_CASE("meyer-shifted profile") {
  const auto w = BandWavelet::meyer_shifted();
  CHECK(w.alpha() == doctest::Approx(kPi));
  CHECK(w.beta() == doctest::Approx(2 * kPi));
  CHECK(w.psi_hat(4 * kPi / 3) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(w.psi_hat(0.99 * kPi) == 0.0);
  CHECK(w.psi_hat(2.01 * kPi) == 0.0);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(kPi, 2 * kPi);
  for (int i = 0; i < 100; ++i) {
    const double xi = u(rng);
    CHECK(w.psi_hat(xi) == doctest::Approx(meyer_profile(xi)).epsilon(1e-13));
    CHECK(w.psi_hat(-xi) == w.psi_hat(xi));
  }
  CHECK(w.psi_time(0.7) ==
        doctest::Approx(oracle::psi_direct(meyer_profile, kPi, 2 * kPi, 0.7)).epsilon(1e-5));
}

TEST_CASE("custom-table profile") {
  const auto w = BandWavelet::custom(2.0, 5.0, {2.5, 3.0, 4.0}, {0.5, 1.0, 0.2});
  CHECK(w.psi_hat(3.0) == 1.0);
  CHECK(w.psi_hat(3.5) == doctest::Approx(0.6));
  CHECK(w.psi_hat(2.25) == doctest::Approx(0.25));
  CHECK(w.psi_hat(4.5) == doctest::Approx(0.1));
  CHECK(w.psi_hat(5.5) == 0.0);
  CHECK_THROWS_AS(BandWavelet::custom(2.0, 5.0, {1.0}, {1.0}), ArgumentError);
  CHECK_THROWS_AS(BandWavelet::custom(2.0, 5.0, {3.0, 2.5}, {1.0, 1.0}), ArgumentError);
  CHECK_THROWS_AS(BandWavelet::custom(2.0, 5.0, {3.0}, {-1.0}), ArgumentError);

  const auto file = std::filesystem::temp_directory_path() / "mfbm_custom_profile.txt";
  {
    std::ofstream out(file);
    out << "# xi psi_hat\n2.5 0.5\n3.0,1.0\n4.0 0.2\n";
  }
  const auto loaded = BandWavelet::load_custom(file.string(), 2.0, 5.0);
  CHECK(loaded.kind() == WaveletKind::custom_table);
  CHECK(loaded.psi_hat(3.5) == w.psi_hat(3.5));
  std::filesystem::remove(file);
  CHECK_THROWS_AS(BandWavelet::load_custom("/nonexistent/profile.txt", 2.0, 5.0), ArgumentError);
}

TEST_CASE("K_H constant") {
  auto indicator = [](double u) { return (u >= 1.0 && u <= 2.0) ? 1.0 : 0.0; };
  CHECK(k_const(indicator, 1.0, 2.0, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(k_const(indicator, 1.0, 2.0, 0.25) ==
        doctest::Approx(4.0 * (1.0 - std::pow(2.0, -0.5))).epsilon(1e-12));
  const auto w = BandWavelet::bump();
  const double ref = oracle::k_trapezoid(bump_profile, 5.0, 10.0, 0.6, 1000000);
  CHECK(k_const(w, 0.6) == doctest::Approx(ref).epsilon(1e-8));
  CHECK_THROWS_AS(k_const(w, 1.0), ArgumentError);
}

TEST_CASE("theoretical wavelet variance") {
  const auto w = BandWavelet::bump();
  CHECK(theoretical_variance(ModelSpec::fbm(0.6, 2.0), w, 1.0) ==
        doctest::Approx(4.0 * k_const(w, 0.6)).epsilon(1e-10));

  for (double H : {0.2, 0.6, 0.85}) {
    const auto m = ModelSpec::fbm(H, 1.3);
    const double base = std::log(theoretical_variance(m, w, 1.0));
    double worst = 0.0;
    for (int i = 1; i <= 10; ++i) {
      const double a = std::pow(10.0, i / 10.0);
      const double dev = std::log(theoretical_variance(m, w, a)) - base - (2 * H + 1) * std::log(a);
      worst = std::max(worst, std::abs(dev));
    }
    CHECK(worst <= 1e-8);
  }

  // Band [alpha/a, beta/a] = [1/30, 1/15] straddles omega_1 = 0.05.
  const ModelSpec fig3{{0.05, 0.5}, {0.9, 0.2, 0.5}, {5.0, 5.0, 5.0}};
  const double a = 150.0;
  const double mixed = theoretical_variance(fig3, w, a);
  const double low = std::pow(a, 2 * 0.9 + 1) * 25.0 * k_const(w, 0.9);
  const double high = std::pow(a, 2 * 0.2 + 1) * 25.0 * k_const(w, 0.2);
  CHECK(mixed < low);
  CHECK(mixed > high);

  // Inside one regime of a K=1 model the single-regime formula holds.
  const ModelSpec m1{{5.0}, {0.2, 0.7}, {std::sqrt(10.0), std::sqrt(5.0)}};
  CHECK(theoretical_variance(m1, w, 4.0) ==
        doctest::Approx(std::pow(4.0, 1.4) * 10.0 * k_const(w, 0.2)).epsilon(1e-6));
  CHECK(theoretical_variance(m1, w, 0.5) ==
        doctest::Approx(std::pow(0.5, 2.4) * 5.0 * k_const(w, 0.7)).epsilon(1e-6));
  CHECK_THROWS_AS(theoretical_variance(m1, w, 0.0), ArgumentError);
}

TEST_CASE("wavelet coefficients annihilate constants and lines") {
  const auto w = BandWavelet::bump();
  const std::size_t N = 20000;
  const double delta = 0.01, a = 0.05;
  // psi(p delta / a - k delta) is centered at p = k a.
  const std::size_t k = static_cast<std::size_t>(N / 2 / a);
  SampledPath flat{delta, std::vector<double>(N, 7.0)};
  CHECK(std::abs(empirical_coeff(flat, w, a, k)) <= 1e-3 * 7.0 * std::sqrt(a));
  SampledPath line{delta, std::vector<double>(N)};
  for (std::size_t p = 0; p < N; ++p) line.values[p] = p * delta;
  CHECK(std::abs(empirical_coeff(line, w, a, k)) <= 1e-3 * std::sqrt(a));
  SampledPath zero{delta, std::vector<double>(N, 0.0)};
  CHECK(empirical_coeff(zero, w, a, k) == 0.0);
  // A window entirely past the end of the path.
  CHECK(empirical_coeff(flat, w, a, 100 * k) == 0.0);
}

TEST_CASE("coefficients agree with the literal Riemann sum") {
  const auto w = BandWavelet::bump();
  const auto path = simulate_path({ModelSpec::fbm(0.5), 800, 0.05, 2, 0});
  const auto tab = w.table(path.delta);
  for (double a : {0.3, 1.0, 2.5}) {
    for (std::size_t k : {std::size_t{0}, std::size_t{40}, shift_range(800, a, 0.1).last}) {
      double s = 0.0;
      for (std::size_t p = 0; p < path.values.size(); ++p)
        s += tab->eval(p * path.delta / a - k * path.delta) * path.values[p];
      const double ref = path.delta / std::sqrt(a) * s;
      CHECK(empirical_coeff(path, w, a, k) == doctest::Approx(ref).epsilon(1e-11).scale(1e-12));
    }
  }
}

TEST_CASE("shift range") {
  const auto d = shift_range(6000, 2.0, 0.1);
  CHECK(d.first == 300);
  CHECK(d.last == 2700);
  CHECK(d.count() == 2401);
  CHECK_THROWS_AS(shift_range(100, 1.0, 0.0), ArgumentError);
  CHECK_THROWS_AS(shift_range(100, 1.0, 0.34), ArgumentError);
  CHECK_THROWS_AS(shift_range(100, -1.0, 0.1), ArgumentError);
}

TEST_CASE("spectrum of degenerate paths") {
  const auto w = BandWavelet::bump();
  const auto grid = build_grid(500, 0.03, 0.5, 20.0, w);
  CHECK_THROWS_AS(spectrum(SampledPath{0.03, std::vector<double>(500, 0.0)}, w, grid),
                  DegeneratePathError);
  CHECK_THROWS_AS(spectrum(SampledPath{0.03, std::vector<double>(500, 2.0)}, w, grid),
                  DegeneratePathError);
  const auto other = build_grid(500, 0.03, 0.5, 20.0, BandWavelet::meyer_shifted());
  const auto path = simulate_path({ModelSpec::fbm(0.5), 500, 0.03, 1, 0});
  CHECK_THROWS_AS(spectrum(path, w, other), ArgumentError);
}

TEST_CASE("spectrum scaling and threading") {
  const auto w = BandWavelet::bump();
  const auto path = simulate_path({ModelSpec::fbm(0.3), 1200, 0.05, 6, 0});
  const auto grid = build_grid(1200, 0.05, 0.5, 10.0, w);
  const auto s = spectrum(path, w, grid);
  REQUIRE(s.Y.size() == grid.a_N + 1);
  for (auto c : s.counts) CHECK(c >= 1);
  SampledPath scaled = path;
  const double c = 3.7;
  for (double& v : scaled.values) v *= c;
  const auto t = spectrum(scaled, w, grid);
  for (std::size_t i = 0; i < s.Y.size(); ++i) CHECK(std::abs(t.Y[i] - s.Y[i] - 2 * std::log(c)) <= 1e-12);
  const auto par = spectrum(path, w, grid, 0.1, 3);
  CHECK(par.Y == s.Y);
}

TEST_CASE("FBM H=0.6 spectrum slope") {
  const auto w = BandWavelet::bump();
  const auto path = simulate_path({ModelSpec::fbm(0.6), 6000, 0.03, 1, 0});
  const auto grid = build_grid(6000, 0.03, 0.05, 20.0, w);
  const auto s = spectrum(path, w, grid);
  const double slope = ols_slope(s.log_f(), s.Y);
  INFO("slope " << slope);
  CHECK(std::abs(slope + 2.2) <= 0.15);
}

TEST_CASE("Monte Carlo mean of J_N matches the theoretical variance") {
  const auto w = BandWavelet::bump();
  const auto m = ModelSpec::fbm(0.6, 1.0);
  const PathSampler sampler(m, 2048, 0.05);
  const std::vector<double> scales{1.0, 2.0, 3.0};
  const int reps = 200;
  std::vector<double> sum(scales.size(), 0.0), sum2(scales.size(), 0.0);
  for (int r = 0; r < reps; ++r) {
    const auto p = sampler.draw(3, r);
    for (std::size_t i = 0; i < scales.size(); ++i) {
      const double j = wavelet_variance(p, w, scales[i], 0.1);
      sum[i] += j;
      sum2[i] += j * j;
    }
  }
  for (std::size_t i = 0; i < scales.size(); ++i) {
    const double mean = sum[i] / reps;
    const double se = std::sqrt((sum2[i] / reps - mean * mean) / (reps - 1));
    const double I = theoretical_variance(m, w, scales[i]);
    INFO("a=" << scales[i] << " mean=" << mean << " I=" << I << " se=" << se);
    CHECK(std::abs(mean - I) <= 3.0 * se);
  }
}
