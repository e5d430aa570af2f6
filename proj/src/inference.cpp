#include "mfbm/inference.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "mfbm/error.hpp"
#include "mfbm/quadrature.hpp"

namespace mfbm {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kConditionCap = 1e12;

Eigen::MatrixXd design(const FrequencyGrid& grid, const std::vector<std::size_t>& points) {
  Eigen::MatrixXd X(points.size(), 2);
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (points[k] >= grid.f.size()) throw ArgumentError("refine point outside the grid");
    X(k, 0) = std::log(grid.f[points[k]]);
    X(k, 1) = 1.0;
  }
  return X;
}

Eigen::VectorXd response(const std::vector<double>& Y, const std::vector<std::size_t>& points) {
  Eigen::VectorXd y(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (points[k] >= Y.size()) throw ArgumentError("refine point outside the spectrum");
    y(k) = Y[points[k]];
  }
  return y;
}

std::vector<double> frequencies(const FrequencyGrid& grid, const std::vector<std::size_t>& points) {
  std::vector<double> g;
  for (auto p : points) g.push_back(grid.f.at(p));
  return g;
}

double prefactor(SigmaConvention c, double r) {
  return c == SigmaConvention::trimmed ? 2.0 / (1.0 - 2.0 * r) : 2.0;
}

// 4 pi int psi_hat(xi/gk)^2 psi_hat(xi/gl)^2 xi^(-4H-2) dxi over the band
// intersection: by Parseval this is int_R (int_R phi(xi) e^{-iu xi} dxi)^2 du
// for phi(xi) = psi_hat(xi/gk) psi_hat(xi/gl) |xi|^(-2H-1).
double entry_parseval(double H, double gk, double gl, const BandWavelet& w, double lo,
                      double hi) {
  std::vector<double> breaks;
  for (double b : w.breakpoints()) {
    for (double x : {b * gk, b * gl}) {
      if (x > lo && x < hi) breaks.push_back(x);
    }
  }
  std::sort(breaks.begin(), breaks.end());
  const double p = -4.0 * H - 2.0;
  auto f = [&](double xi) {
    const double v = w.psi_hat(xi / gk) * w.psi_hat(xi / gl);
    return v * v * std::pow(xi, p);
  };
  // Entries of thin band intersections are nearly 0, so relative accuracy is
  // measured against a bound on the integral rather than its value.
  double peak = 0.0;
  for (int i = 0; i <= 256; ++i) {
    peak = std::max(peak, w.psi_hat(w.alpha() + (w.beta() - w.alpha()) * i / 256.0));
  }
  const double bound = std::pow(peak, 4) * (hi - lo) * std::pow(lo, p);
  return 4.0 * kPi * quad::integrate(f, lo, hi, {1e-11, 1e-13 * bound, 4000}, breaks).value;
}

// Same quantity evaluated literally: F(u) = 2 int_lo^hi phi(xi) cos(u xi) dxi
// on fixed Gauss-Legendre panels, then 2 int_0^U F(u)^2 du with U where the
// envelope of F drops below 1e-8 of F(0).
double entry_oscillatory(double H, double gk, double gl, const BandWavelet& w, double lo,
                         double hi) {
  using GL = boost::math::quadrature::gauss<double, 16>;
  const double width = hi - lo;
  const double center = 0.5 * (lo + hi);
  const double u_cap = 3000.0 / width;

  auto phi = [&](double xi) {
    return w.psi_hat(xi / gk) * w.psi_hat(xi / gl) * std::pow(xi, -2.0 * H - 1.0);
  };
  // Panels of two oscillation periods at u_cap (8 nodes per period).
  const auto panels =
      static_cast<std::size_t>(std::ceil(width * u_cap / (4.0 * kPi))) + 8;
  std::vector<double> node, weight;
  const auto& abscissa = GL::abscissa();
  const auto& wts = GL::weights();
  const double h = width / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = lo + (static_cast<double>(p) + 0.5) * h;
    for (std::size_t i = 0; i < abscissa.size(); ++i) {
      for (double s : {-1.0, 1.0}) {
        if (abscissa[i] == 0.0 && s > 0.0) continue;
        const double x = mid + s * 0.5 * h * abscissa[i];
        node.push_back(x - center);
        weight.push_back(0.5 * h * wts[i] * phi(x));
      }
    }
  }

  // Demodulated transform G(u) = int phi(xi) e^{-iu(xi - c)} dxi; F = 2 Re(e^{-iuc} G).
  auto G = [&](double u) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < node.size(); ++i) acc += weight[i] * std::polar(1.0, -u * node[i]);
    return acc;
  };
  auto F = [&](double u) { return 2.0 * (std::polar(1.0, -u * center) * G(u)).real(); };

  const double g0 = std::abs(G(0.0));
  if (!(g0 > 0.0)) return 0.0;
  const double du = kPi / (4.0 * width);
  double U = 0.0;
  for (double u = du; u <= u_cap; u += du) {
    if (std::abs(G(u)) >= 1e-8 * g0) U = u + du;
  }
  if (U + du > u_cap) {
    throw NumericError("oscillatory covariance integral did not decay within u <= " +
                       std::to_string(u_cap));
  }
  std::vector<double> breaks;
  for (double b = kPi / hi; b < U; b += kPi / hi) breaks.push_back(b);
  auto F2 = [&](double u) {
    const double v = F(u);
    return v * v;
  };
  return 2.0 * quad::integrate(F2, 0.0, U, {1e-9, 0.0, 200000}, breaks).value;
}

[[noreturn]] void rethrow_tagged(const std::string& prefix) {
  try {
    throw;
  } catch (const DegeneratePathError& e) {
    throw DegeneratePathError(prefix + e.what(), e.frequency());
  } catch (const AnalysisError& e) {
    throw AnalysisError(prefix + e.what(), e.frequency());
  } catch (const SimulationError& e) {
    throw SimulationError(prefix + e.what(), e.achieved());
  } catch (const NumericError& e) {
    throw NumericError(prefix + e.what(), e.achieved());
  } catch (const InfeasibleError& e) {
    throw InfeasibleError(prefix + e.what());
  } catch (const ResourceError& e) {
    throw ResourceError(prefix + e.what());
  } catch (const DomainError& e) {
    throw DomainError(prefix + e.what());
  } catch (const ArgumentError& e) {
    throw ArgumentError(prefix + e.what());
  }
}

}  // namespace

std::string_view flavor_name(Flavor f) { return f == Flavor::ols ? "ols" : "fgls"; }

std::string_view sigma_convention_name(SigmaConvention c) {
  return c == SigmaConvention::trimmed ? "2/(1-2r)" : "2";
}

SigmaConvention parse_sigma_convention(std::string_view name) {
  if (name == "trimmed" || name == "2/(1-2r)") return SigmaConvention::trimmed;
  if (name == "plain" || name == "2") return SigmaConvention::plain;
  throw ArgumentError("unknown covariance convention '" + std::string(name) +
                      "' (expected trimmed or plain)");
}

SegmentEstimate recover(const Line& lambda, const BandWavelet& w, Flavor flavor) {
  SegmentEstimate s;
  s.lambda = lambda;
  s.flavor = flavor;
  double H = -(lambda.slope + 1.0) / 2.0;
  if (!std::isfinite(H)) throw NumericError("non-finite slope in parameter recovery");
  if (H < kMinHurst || H > kMaxHurst) {
    H = std::clamp(H, kMinHurst, kMaxHurst);
    s.clamped = true;
  }
  s.H = H;
  s.sigma2 = std::exp(lambda.intercept - std::log(k_const(w, H)));
  return s;
}

SegmentEstimate ols_estimate(const std::vector<double>& Y, const FrequencyGrid& grid,
                             const std::vector<std::size_t>& points, const BandWavelet& w) {
  if (points.size() < 3) throw ArgumentError("OLS recovery needs at least 3 points");
  const Eigen::MatrixXd X = design(grid, points);
  const Eigen::VectorXd y = response(Y, points);
  const Eigen::VectorXd x = X.col(0);
  const double mx = x.mean();
  const double sxx = (x.array() - mx).square().sum();
  if (!(sxx > 0.0)) throw ArgumentError("OLS design has zero variance");
  const double my = y.mean();
  const double slope = ((x.array() - mx) * (y.array() - my)).sum() / sxx;
  auto s = recover({slope, my - slope * mx}, w, Flavor::ols);
  s.points = points;
  return s;
}

bool bands_overlap(double g1, double g2, const BandWavelet& w) {
  return std::max(g1, g2) * w.alpha() < std::min(g1, g2) * w.beta();
}

Eigen::MatrixXd sigma_matrix(double H, const std::vector<double>& g, const BandWavelet& w,
                             double r, SigmaConvention convention, SigmaMethod method) {
  if (!(H > 0.0 && H < 1.0)) throw ArgumentError("covariance matrix needs H in (0,1)");
  if (!(r > 0.0 && r < 1.0 / 3.0)) throw ArgumentError("trimming fraction r must lie in (0, 1/3)");
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!(g[k] > 0.0) || (k > 0 && !(g[k] > g[k - 1]))) {
      throw ArgumentError("covariance frequencies must be positive and ascending");
    }
  }
  const double kh = k_const(w, H);
  const double scale = prefactor(convention, r) / (kh * kh);
  const auto m = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    for (Eigen::Index l = k; l < m; ++l) {
      const double gk = g[k], gl = g[l];
      if (!bands_overlap(gk, gl, w)) continue;
      const double lo = w.alpha() * std::max(gk, gl);
      const double hi = w.beta() * std::min(gk, gl);
      const double integral = method == SigmaMethod::parseval
                                  ? entry_parseval(H, gk, gl, w, lo, hi)
                                  : entry_oscillatory(H, gk, gl, w, lo, hi);
      const double v = scale * std::pow(gk * gl, 2.0 * H) * integral;
      S(k, l) = v;
      S(l, k) = v;
    }
  }
  return S;
}

SegmentEstimate fgls_estimate(const std::vector<double>& Y, const FrequencyGrid& grid,
                              const std::vector<std::size_t>& points, const Eigen::MatrixXd& Sigma,
                              const BandWavelet& w) {
  const auto m = static_cast<Eigen::Index>(points.size());
  if (m < 3) throw ArgumentError("FGLS needs at least 3 points");
  if (Sigma.rows() != m || Sigma.cols() != m) {
    throw ArgumentError("covariance matrix size does not match the number of points");
  }
  const Eigen::MatrixXd X = design(grid, points);
  const Eigen::VectorXd y = response(Y, points);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Sigma, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues()(0);
  const double lmax = eig.eigenvalues()(m - 1);
  const double condition = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
  Eigen::MatrixXd S = Sigma;
  bool ridge = false;
  if (!(condition <= kConditionCap)) {
    const double eps = 1e-10 * Sigma.trace() / static_cast<double>(m);
    S.diagonal().array() += eps;
    ridge = true;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) {
    throw NumericError("covariance matrix is not positive definite (condition estimate " +
                           std::to_string(condition) + ")",
                       condition);
  }
  // Whitened least squares: L^-1 X lambda ~ L^-1 y.
  const Eigen::MatrixXd Xw = llt.matrixL().solve(X);
  const Eigen::VectorXd yw = llt.matrixL().solve(y);
  const Eigen::Vector2d lam = Xw.colPivHouseholderQr().solve(yw);

  auto s = recover({lam(0), lam(1)}, w, Flavor::fgls);
  s.points = points;
  s.Sigma = S;
  s.ridge = ridge;
  s.condition = condition;
  s.Gamma = (Xw.transpose() * Xw).inverse();
  return s;
}

TestStatistic test_statistic(const std::vector<double>& Y, const FrequencyGrid& grid,
                             const std::vector<SegmentEstimate>& segments) {
  if (segments.empty()) throw ArgumentError("test statistic needs at least one segment");
  const std::size_t m = segments.front().points.size();
  if (m < 3) throw ArgumentError("test statistic needs m >= 3 points per segment");
  double total = 0.0;
  for (const auto& s : segments) {
    if (s.points.size() != m) throw ArgumentError("segments must share the same m");
    const Eigen::MatrixXd X = design(grid, s.points);
    const Eigen::VectorXd y = response(Y, s.points);
    const Eigen::VectorXd res =
        y - X * Eigen::Vector2d(s.lambda.slope, s.lambda.intercept);
    Eigen::LLT<Eigen::MatrixXd> llt(s.Sigma);
    if (llt.info() != Eigen::Success) {
      throw NumericError("covariance matrix is not positive definite in the test statistic");
    }
    total += res.dot(llt.solve(res));
  }
  const double span = static_cast<double>(grid.N) * grid.delta;
  return {span * std::max(0.0, total), segments.size() * (m - 2)};
}

double chi2_upper_tail(double x, double dof) {
  if (!(dof > 0.0)) throw ArgumentError("chi-square needs dof > 0");
  if (!(x > 0.0)) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

double chi2_cdf(double x, double dof) {
  if (!(dof > 0.0)) throw ArgumentError("chi-square needs dof > 0");
  if (!(x > 0.0)) return 0.0;
  if (std::isinf(x)) return 1.0;
  return boost::math::gamma_p(0.5 * dof, 0.5 * x);
}

FitResult fit_order(const WaveletSpectrum& spec, const BandWavelet& w, std::size_t K,
                    const FitConfig& cfg) {
  if (!(cfg.level > 0.0 && cfg.level < 1.0)) throw ArgumentError("test level must lie in (0,1)");
  const auto& grid = spec.grid;
  FitResult out;
  out.K = K;
  out.level = cfg.level;
  out.convention = cfg.convention;
  out.segmentation = minimize_Q(spec.Y, grid, K);
  out.omegas = omega_hat(grid, out.segmentation);
  const auto points = refine_points(out.segmentation, grid, cfg.m);

  for (std::size_t j = 0; j + 1 < points.size(); ++j) {
    const double f_hi = grid.f[points[j].back()];
    const double f_lo = grid.f[points[j + 1].front()];
    if (bands_overlap(f_hi, f_lo, w)) {
      throw NumericError("refine points of segments " + std::to_string(j) + " and " +
                         std::to_string(j + 1) + " share wavelet frequencies");
    }
  }

  for (const auto& pts : points) {
    auto ols = ols_estimate(spec.Y, grid, pts, w);
    const auto g = frequencies(grid, pts);
    ols.Sigma = sigma_matrix(ols.H, g, w, spec.r, cfg.convention, cfg.method);
    auto fgls = fgls_estimate(spec.Y, grid, pts, ols.Sigma, w);
    const Eigen::MatrixXd X = design(grid, pts);
    const Eigen::Matrix2d XtXi = (X.transpose() * X).inverse();
    ols.Gamma = XtXi * X.transpose() * ols.Sigma * X * XtXi;
    out.ols.push_back(std::move(ols));
    out.segments.push_back(std::move(fgls));
  }

  const auto t = test_statistic(spec.Y, grid, out.segments);
  out.T_stat = t.value;
  out.dof = t.dof;
  out.p_value = chi2_upper_tail(t.value, static_cast<double>(t.dof));
  out.accepted = out.p_value >= cfg.level;
  return out;
}

Selection select_K(const WaveletSpectrum& spec, const BandWavelet& w, const FitConfig& cfg) {
  Selection sel;
  for (std::size_t K = 0; K <= cfg.K_max; ++K) {
    try {
      sel.attempts.push_back(fit_order(spec, w, K, cfg));
    } catch (const Error&) {
      rethrow_tagged("K=" + std::to_string(K) + ": ");
    }
    if (sel.attempts.back().accepted) break;
  }
  sel.result = sel.attempts.back();
  return sel;
}

}  // namespace mfbm
