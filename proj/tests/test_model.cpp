#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "mfbm/error.hpp"
#include "mfbm/model.hpp"
#include "oracles.hpp"

using namespace mfbm;

namespace {

ModelSpec figure3() { return ModelSpec{{0.05, 0.5}, {0.9, 0.2, 0.5}, {5.0, 5.0, 5.0}}; }

ModelSpec random_model(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> H(0.1, 0.9), s(0.5, 3.0), w(0.05, 5.0);
  const int K = static_cast<int>(rng() % 3);
  ModelSpec m;
  double last = 0.0;
  for (int i = 0; i < K; ++i) {
    last = (i == 0) ? w(rng) : last * (2.0 + 3.0 * std::uniform_real_distribution<>(0, 1)(rng));
    m.omega.push_back(last);
  }
  for (int i = 0; i <= K; ++i) {
    m.H.push_back(H(rng));
    m.sigma.push_back(s(rng));
  }
  m.validate();
  return m;
}

}  // namespace

TEST_CASE("model validation") {
  CHECK_NOTHROW(figure3().validate());
  CHECK_THROWS_AS((ModelSpec{{}, {1.0}, {1.0}}.validate()), ArgumentError);
  CHECK_THROWS_AS((ModelSpec{{}, {0.5}, {0.0}}.validate()), ArgumentError);
  CHECK_THROWS_AS((ModelSpec{{2.0, 1.0}, {0.2, 0.4, 0.6}, {1, 1, 1}}.validate()), ArgumentError);
  CHECK_THROWS_AS((ModelSpec{{-1.0}, {0.2, 0.4}, {1, 1}}.validate()), ArgumentError);
  CHECK_THROWS_AS((ModelSpec{{1.0}, {0.3, 0.3}, {2, 2}}.validate()), ArgumentError);  // identical regimes
  CHECK_THROWS_AS((ModelSpec{{1.0}, {0.3}, {2}}.validate()), ArgumentError);         // length mismatch
}

TEST_CASE("spectral weight") {
  CHECK(spectral_weight(ModelSpec::fbm(0.5, 1.0), 2.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(spectral_weight(figure3(), 0.1) == doctest::Approx(25.0 * std::pow(0.1, -1.4)).epsilon(1e-14));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.001, 10.0);
  for (int i = 0; i < 50; ++i) {
    const double xi = u(rng);
    CHECK(spectral_weight(figure3(), -xi) == spectral_weight(figure3(), xi));
  }
  // Regime boundaries are left-closed: [w_i, w_{i+1}).
  CHECK(spectral_weight(figure3(), 0.05) == doctest::Approx(25.0 * std::pow(0.05, -1.4)));
  CHECK_THROWS_AS(spectral_weight(figure3(), 0.0), DomainError);
}

TEST_CASE("C(1/2) and the Brownian variogram") {
  CHECK(c_const(0.5) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-10));
  CHECK(variogram(ModelSpec::fbm(0.5, 1.0), 0.0) == 0.0);
  CHECK(variogram(ModelSpec::fbm(0.5, 1.0), 1.0) ==
        doctest::Approx(2.0 * std::numbers::pi).epsilon(1e-9));
}

TEST_CASE("single-regime scaling is exact") {
  for (double H : {0.1, 0.35, 0.6, 0.9}) {
    const auto m = ModelSpec::fbm(H, 1.7);
    for (double d : {0.01, 0.3, 7.0}) {
      CHECK(variogram(m, 2 * d) / variogram(m, d) ==
            doctest::Approx(std::pow(2.0, 2 * H)).epsilon(1e-12));
    }
    // log V affine in log d over a decade, slope 2H.
    const double v0 = std::log(variogram(m, 1.0));
    double worst = 0.0;
    for (int i = 1; i <= 10; ++i) {
      const double d = std::pow(10.0, i / 10.0);
      worst = std::max(worst, std::abs(std::log(variogram(m, d)) - v0 - 2 * H * std::log(d)));
    }
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("variogram matches direct spectral quadrature on random models") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> logd(std::log(0.01), std::log(10.0));
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = random_model(rng);
    const double d = std::exp(logd(rng));
    const double ref = oracle::variogram(m, d);
    INFO("trial " << trial << " K=" << m.K() << " d=" << d);
    CHECK(std::abs(variogram(m, d) - ref) <= 1e-6 * ref);
  }
}

TEST_CASE("variogram ladder agrees with pointwise evaluation") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const auto m = random_model(rng);
    const auto lad = variogram_ladder(m, 0.05, 40);
    REQUIRE(lad.size() == 41);
    CHECK(lad[0] == 0.0);
    for (std::size_t i = 1; i < lad.size(); ++i) {
      CHECK(lad[i] == doctest::Approx(variogram(m, 0.05 * i)).epsilon(1e-12));
    }
  }
}

TEST_CASE("variogram is positive and nondecreasing for the reference models") {
  const std::vector<ModelSpec> models{ModelSpec::fbm(0.2), ModelSpec::fbm(0.8, 3.0), figure3(),
                                      ModelSpec{{5.0}, {0.2, 0.7}, {std::sqrt(10.0), std::sqrt(5.0)}}};
  for (const auto& m : models) {
    double prev = 0.0;
    for (int i = -30; i <= 30; ++i) {
      const double v = variogram(m, std::pow(10.0, i / 10.0));
      CHECK(v > prev);
      prev = v;
    }
  }
}

TEST_CASE("an upward jump of the spectral weight can make the variogram decrease") {
  // V'(d) = int 2 xi sin(d xi) rho^-2(xi) dxi changes sign when rho^-2 carries
  // a strong band; both evaluations agree on the dip.
  const ModelSpec m{{2.00202, 5.55025}, {0.352748, 0.102688, 0.853891}, {1.43666, 2.61624, 1.25094}};
  const double v1 = variogram(m, 1.0), v2 = variogram(m, 1.2589254117941673);
  CHECK(v2 < v1);
  CHECK(std::abs(v1 - oracle::variogram(m, 1.0)) <= 1e-6 * v1);
  CHECK(std::abs(v2 - oracle::variogram(m, 1.2589254117941673)) <= 1e-6 * v2);
}

TEST_CASE("asymptotes") {
  const auto [lo, hi] = variogram_asymptotes(figure3());
  CHECK(lo.regime == Regime::low_frequency);
  CHECK(hi.regime == Regime::high_frequency);
  CHECK(lo.slope == doctest::Approx(1.8));
  CHECK(hi.slope == doctest::Approx(1.0));
  CHECK(lo.intercept == doctest::Approx(std::log(4 * 25 * c_const(0.9))));

  const auto [a, b] = variogram_asymptotes(ModelSpec::fbm(0.3, 2.0));
  CHECK(a.slope == b.slope);
  CHECK(a.intercept == b.intercept);

  // K=1, H=(0.2,0.7): log V approaches the low-frequency line as d grows, at rate d^(-2H_0).
  const ModelSpec m{{1.0}, {0.2, 0.7}, {1.0, 1.0}};
  const auto [low, high] = variogram_asymptotes(m);
  (void)high;
  double prev = 1e300;
  for (double d : {10.0, 100.0, 1000.0}) {
    const double err = std::abs(std::log(variogram(m, d)) - (low.slope * std::log(d) + low.intercept));
    CHECK(err < prev);
    CHECK(err * std::pow(d, 0.4) < 1.0);
    prev = err;
  }
}

TEST_CASE("covariance") {
  const auto m = figure3();
  CHECK(covariance(m, 0.7, 0.7) == doctest::Approx(variogram(m, 0.7)).epsilon(1e-14));
  CHECK(covariance(m, 0.0, 3.0) == doctest::Approx(0.0).scale(variogram(m, 3.0)).epsilon(1e-14));
  CHECK(covariance(m, 0.4, 2.5) == covariance(m, 2.5, 0.4));
  const auto bm = ModelSpec::fbm(0.5, 1.5);
  for (auto [s, t] : {std::pair{0.3, 1.2}, {2.0, 0.5}, {4.0, 4.5}}) {
    CHECK(covariance(bm, s, t) ==
          doctest::Approx(2 * std::numbers::pi * 2.25 * std::min(s, t)).epsilon(1e-9));
  }
}

TEST_CASE("covariance matrices are positive semidefinite") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> step(0.01, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = random_model(rng);
    const int n = 64;
    const double h = step(rng);
    Eigen::MatrixXd C(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) C(i, j) = covariance(m, (i + 1) * h, (j + 1) * h);
    CHECK((C - C.transpose()).cwiseAbs().maxCoeff() == 0.0);
    const double floor = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(C).eigenvalues().minCoeff();
    CHECK(floor >= -1e-8 * C.trace());
  }
}

TEST_CASE("empirical variogram") {
  SampledPath flat{0.1, std::vector<double>(50, 3.0)};
  for (std::size_t lag : {1u, 7u, 49u}) CHECK(empirical_variogram(flat, lag) == 0.0);
  SampledPath p{1.0, {0.0, 1.0, 0.0}};
  CHECK(empirical_variogram(p, 1) == 1.0);
  CHECK(empirical_variogram(p, 2) == 0.0);
  CHECK_THROWS_AS(empirical_variogram(p, 3), ArgumentError);
  CHECK_THROWS_AS(empirical_variogram(p, 0), ArgumentError);
}
