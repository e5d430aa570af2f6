#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mfbm/changepoint.hpp"
#include "mfbm/error.hpp"
#include "mfbm/kernels.hpp"
#include "mfbm/simulate.hpp"
#include "mfbm/wavelet.hpp"

using namespace mfbm;
using namespace mfbm::kernels;

namespace {

// Plain evaluation of the piecewise cubic, no vector tricks.
double naive_eval(const std::vector<CubicRow>& rows, double h, double t) {
  const double x = std::abs(t) / h;
  const double j = std::floor(x);
  if (j >= static_cast<double>(rows.size())) return 0.0;
  const double u = x - j;
  const auto& c = rows[static_cast<std::size_t>(j)].c;
  return c[0] + u * (c[1] + u * (c[2] + u * c[3]));
}

double naive_dot(const std::vector<CubicRow>& rows, double h, const std::vector<double>& x,
                 double t0, double dt) {
  double s = 0.0;
  for (std::size_t p = 0; p < x.size(); ++p) s += naive_eval(rows, h, t0 + p * dt) * x[p];
  return s;
}

struct RandomCase {
  std::vector<CubicRow> rows;
  double h;
  std::vector<double> x;
  double t0, dt;
};

RandomCase random_case(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RandomCase rc;
  rc.rows.resize(1 + rng() % 400);
  for (auto& r : rc.rows)
    for (double& c : r.c) c = u(rng);
  rc.h = 0.01 + 0.1 * std::abs(u(rng));
  rc.x.resize(rng() % 300);
  for (double& v : rc.x) v = 10.0 * u(rng);
  const double reach = rc.h * rc.rows.size();
  rc.t0 = 2.0 * reach * u(rng);  // includes starts far outside the window
  rc.dt = 0.5 * rc.h * (0.05 + std::abs(u(rng)));
  if (rng() % 4 == 0) rc.dt = -rc.dt;
  return rc;
}

}  // namespace

TEST_CASE("isa names and parsing") {
  CHECK(parse_isa("scalar") == Isa::scalar);
  CHECK(parse_isa("avx2") == Isa::avx2);
  CHECK_THROWS_AS(parse_isa("neon"), ArgumentError);
  CHECK(isa_name(Isa::avx2) == "avx2");
  CHECK(isa_supported(Isa::scalar));
}

TEST_CASE("scalar windowed dot equals naive evaluation") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const auto rc = random_case(rng);
    const EvenCubicTable t{rc.rows.data(), rc.rows.size(), 1.0 / rc.h};
    const double ref = naive_dot(rc.rows, rc.h, rc.x, rc.t0, rc.dt);
    double scale = 0.0;
    for (double v : rc.x) scale += std::abs(v);
    INFO("trial " << trial);
    CHECK(std::abs(windowed_dot_scalar(t, rc.x.data(), rc.x.size(), rc.t0, rc.dt) - ref) <=
          1e-12 * (scale + 1.0));
  }
}

TEST_CASE("avx2 windowed dot equals the scalar reference") {
  if (!isa_supported(Isa::avx2)) {
    MESSAGE("avx2 not supported here; skipped");
    return;
  }
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 500; ++trial) {
    const auto rc = random_case(rng);
    const EvenCubicTable t{rc.rows.data(), rc.rows.size(), 1.0 / rc.h};
    const double a = windowed_dot_scalar(t, rc.x.data(), rc.x.size(), rc.t0, rc.dt);
    const double b = windowed_dot_avx2(t, rc.x.data(), rc.x.size(), rc.t0, rc.dt);
    double scale = 0.0;
    for (double v : rc.x) scale += std::abs(v);
    INFO("trial " << trial << " n=" << rc.x.size());
    CHECK(std::abs(a - b) <= 1e-12 * (scale + 1.0));
  }
  // Empty input and a window entirely outside the table.
  std::vector<CubicRow> rows(4, CubicRow{{1.0, 0.0, 0.0, 0.0}});
  const EvenCubicTable t{rows.data(), rows.size(), 1.0};
  std::vector<double> x(37, 1.0);
  CHECK(windowed_dot_avx2(t, x.data(), 0, 0.0, 0.1) == 0.0);
  CHECK(windowed_dot_avx2(t, x.data(), x.size(), 10.0, 0.1) == 0.0);
  CHECK(windowed_dot_avx2(t, x.data(), x.size(), -1.8, 0.1) ==
        doctest::Approx(windowed_dot_scalar(t, x.data(), x.size(), -1.8, 0.1)));
}

TEST_CASE("wavelet table rows agree with WaveletTable::eval") {
  const auto w = BandWavelet::bump();
  const auto tab = w.table(0.03);
  std::vector<CubicRow> rows(tab->rows.begin(), tab->rows.end());
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  std::vector<double> x(500);
  for (double& v : x) v = n01(rng);
  const double t0 = -3.0, dt = 0.013;
  double ref = 0.0;
  for (std::size_t p = 0; p < x.size(); ++p) ref += tab->eval(t0 + p * dt) * x[p];
  CHECK(naive_dot(rows, tab->step, x, t0, dt) == doctest::Approx(ref).epsilon(1e-12));
  CHECK(windowed_dot_scalar(tab->view(), x.data(), x.size(), t0, dt) ==
        doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("spectrum is the same under either kernel") {
  if (!isa_supported(Isa::avx2)) return;
  const auto path = simulate_path({ModelSpec::fbm(0.4), 1500, 0.05, 4, 0});
  const auto w = BandWavelet::bump();
  const auto grid = build_grid(path.values.size(), path.delta, 0.2, 5.0, w);
  const Isa before = active_isa();
  set_active_isa(Isa::scalar);
  const auto s = spectrum(path, w, grid);
  set_active_isa(Isa::avx2);
  const auto v = spectrum(path, w, grid);
  set_active_isa(before);
  REQUIRE(s.Y.size() == v.Y.size());
  for (std::size_t i = 0; i < s.Y.size(); ++i) CHECK(std::abs(s.Y[i] - v.Y[i]) <= 1e-12);
}
