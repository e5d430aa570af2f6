#include "mfbm/changepoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mfbm/error.hpp"
#include "mfbm/wavelet.hpp"

namespace mfbm {

namespace {

constexpr std::size_t kMinSegmentPoints = 3;

// Running co-moments of (x, y) (Welford update).
struct Moments {
  double n = 0.0, mx = 0.0, my = 0.0, cxx = 0.0, cxy = 0.0, cyy = 0.0;

  void add(double x, double y) {
    n += 1.0;
    const double dx = x - mx;
    mx += dx / n;
    const double dy = y - my;
    my += dy / n;
    cxx += dx * (x - mx);
    cxy += dx * (y - my);
    cyy += dy * (y - my);
  }
  double rss() const { return cxx > 0.0 ? std::max(0.0, cyy - cxy * cxy / cxx) : cyy; }
};

void check_spectrum(const std::vector<double>& Y, const FrequencyGrid& grid) {
  if (Y.size() != grid.size()) {
    throw ArgumentError("spectrum has " + std::to_string(Y.size()) + " values but the grid has " +
                        std::to_string(grid.size()) + " frequencies");
  }
}

}  // namespace

FrequencyGrid build_grid(std::size_t N, double delta, double f_min, double f_max, double alpha,
                         double beta) {
  if (N < 2) throw ArgumentError("grid needs N >= 2");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ArgumentError("grid needs delta > 0");
  if (!(f_min > 0.0) || !(f_max > f_min) || !std::isfinite(f_max)) {
    throw ArgumentError("frequency band needs 0 < f_min < f_max");
  }
  if (!(alpha > 0.0) || !(beta > alpha)) throw ArgumentError("wavelet band needs 0 < alpha < beta");

  FrequencyGrid g;
  g.f_min = f_min;
  g.f_max = f_max;
  g.alpha = alpha;
  g.beta = beta;
  g.N = N;
  g.delta = delta;
  const double span = static_cast<double>(N) * delta;
  g.a_N = static_cast<std::size_t>(std::llround(span));
  if (g.a_N < 1) {
    throw ArgumentError("N * delta = " + std::to_string(span) + " gives an empty grid");
  }
  const double log_ratio = std::log(f_max / f_min) + std::log(beta / alpha);
  g.q = std::exp(log_ratio / static_cast<double>(g.a_N));
  const double steps = std::log(beta / alpha) / std::log(g.q);
  g.tau = static_cast<std::size_t>(std::floor(steps * (1.0 + 1e-12)));
  if (g.tau < 1 || g.a_N < 2 * (g.tau + 1)) {
    throw ArgumentError("frequency band [" + std::to_string(f_min) + ", " +
                        std::to_string(f_max) + "] is too narrow for a grid of " +
                        std::to_string(g.a_N) + " steps (transition length " +
                        std::to_string(g.tau) + ")");
  }
  g.f.resize(g.a_N + 1);
  const double f0 = f_min / beta;
  for (std::size_t k = 0; k <= g.a_N; ++k) {
    g.f[k] = f0 * std::exp(log_ratio * static_cast<double>(k) / static_cast<double>(g.a_N));
  }
  g.f.front() = f0;
  g.f.back() = f_max / alpha;

  if (static_cast<double>(N) * f_min / beta < 10.0) {
    g.warnings.push_back("N * f_min / beta = " +
                         std::to_string(static_cast<double>(N) * f_min / beta) +
                         " < 10: the lowest frequencies see very few wavelet shifts");
  }
  if (f_max / alpha > 1.0 / delta) {
    g.warnings.push_back("f_max / alpha = " + std::to_string(f_max / alpha) +
                         " exceeds 1 / delta: the highest frequencies alias the sampling step");
  }
  return g;
}

FrequencyGrid build_grid(std::size_t N, double delta, double f_min, double f_max,
                         const BandWavelet& w) {
  return build_grid(N, delta, f_min, f_max, w.alpha(), w.beta());
}

bool admissible(const std::vector<std::size_t>& T, const FrequencyGrid& grid) {
  if (T.size() < 2 || T.front() != 0 || T.back() != grid.a_N + grid.tau) return false;
  for (std::size_t j = 0; j + 1 < T.size(); ++j) {
    if (T[j + 1] <= T[j] || T[j + 1] - T[j] <= grid.tau) return false;
  }
  return true;
}

double criterion_Q(const std::vector<double>& Y, const FrequencyGrid& grid,
                   const std::vector<std::size_t>& T, const std::vector<Line>& lambda) {
  check_spectrum(Y, grid);
  if (!admissible(T, grid)) throw ArgumentError("segmentation is not admissible");
  if (lambda.size() + 1 != T.size()) {
    throw ArgumentError("need one line per segment (" + std::to_string(T.size() - 1) + ")");
  }
  double q = 0.0;
  for (std::size_t j = 0; j < lambda.size(); ++j) {
    for (std::size_t i = T[j] + 1; i <= T[j + 1] - grid.tau; ++i) {
      const double r = Y[i] - lambda[j](std::log(grid.f[i]));
      q += r * r;
    }
  }
  return q;
}

Line ols_line(const std::vector<double>& Y, const FrequencyGrid& grid, std::size_t first,
              std::size_t last) {
  check_spectrum(Y, grid);
  if (last >= Y.size() || last < first + 1) throw ArgumentError("OLS needs at least 2 points");
  const double n = static_cast<double>(last - first + 1);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = first; i <= last; ++i) {
    mx += std::log(grid.f[i]);
    my += Y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = first; i <= last; ++i) {
    const double dx = std::log(grid.f[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (Y[i] - my);
  }
  if (!(sxx > 0.0)) throw ArgumentError("OLS design has zero variance");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

Segmentation minimize_Q(const std::vector<double>& Y, const FrequencyGrid& grid, std::size_t K) {
  check_spectrum(Y, grid);
  const std::size_t tau = grid.tau;
  const std::size_t B = grid.a_N + tau;
  const std::size_t min_len = tau + kMinSegmentPoints;  // t_{j+1} - t_j
  if ((K + 1) * min_len > B) {
    throw InfeasibleError("no admissible segmentation with K = " + std::to_string(K) +
                          " changes on a grid of " + std::to_string(grid.a_N) +
                          " steps (transition length " + std::to_string(tau) + ")");
  }

  // cost[s][e]: OLS residual sum for a segment starting at t_j = s, ending at t_{j+1} = e.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> cost(B + 1, std::vector<double>(B + 1, kInf));
  for (std::size_t s = 0; s + min_len <= B; ++s) {
    Moments m;
    for (std::size_t i = s + 1; i + tau <= B; ++i) {
      m.add(std::log(grid.f[i]), Y[i]);
      const std::size_t e = i + tau;
      if (e - s >= min_len) cost[s][e] = m.rss();
    }
  }

  // best[j][t]: minimal cost of segments j..K given t_j = t.
  std::vector<std::vector<double>> best(K + 1, std::vector<double>(B + 1, kInf));
  for (std::size_t t = 0; t <= B; ++t) best[K][t] = cost[t][B];
  for (std::size_t j = K; j-- > 0;) {
    for (std::size_t t = 0; t < B; ++t) {
      double b = kInf;
      for (std::size_t u = t + min_len; u < B; ++u) {
        if (best[j + 1][u] < kInf) b = std::min(b, cost[t][u] + best[j + 1][u]);
      }
      best[j][t] = b;
    }
  }
  if (!(best[0][0] < kInf)) {
    throw InfeasibleError("no admissible segmentation with K = " + std::to_string(K) + " changes");
  }

  Moments all;
  for (std::size_t i = 1; i <= grid.a_N; ++i) all.add(std::log(grid.f[i]), Y[i]);
  const double slack = 1e-14 * (1.0 + all.cyy);

  Segmentation seg;
  seg.T.push_back(0);
  for (std::size_t j = 0; j < K; ++j) {
    const std::size_t t = seg.T.back();
    const double target = best[j][t];
    const double tol = 1e-12 * target + slack;
    std::size_t pick = B;
    for (std::size_t u = t + min_len; u < B; ++u) {
      if (cost[t][u] + best[j + 1][u] <= target + tol) {
        pick = u;
        break;
      }
    }
    seg.T.push_back(pick);
  }
  seg.T.push_back(B);
  for (std::size_t j = 0; j <= K; ++j) {
    seg.lambda.push_back(ols_line(Y, grid, seg.first(j), seg.last(j, tau)));
  }
  seg.Q = criterion_Q(Y, grid, seg.T, seg.lambda);
  return seg;
}

std::vector<double> omega_hat(const FrequencyGrid& grid, const Segmentation& seg) {
  std::vector<double> out;
  for (std::size_t j = 1; j + 1 < seg.T.size(); ++j) {
    if (seg.T[j] >= grid.f.size()) throw ArgumentError("breakpoint outside the grid");
    out.push_back(grid.alpha * grid.f[seg.T[j]]);
  }
  return out;
}

std::vector<std::vector<std::size_t>> refine_points(const Segmentation& seg,
                                                    const FrequencyGrid& grid, std::size_t m) {
  if (m < 3) throw ArgumentError("refinement needs m >= 3 points per segment");
  if (!admissible(seg.T, grid)) throw ArgumentError("segmentation is not admissible");
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t j = 0; j + 1 < seg.T.size(); ++j) {
    const std::size_t span = seg.T[j + 1] - seg.T[j] - grid.tau;
    const std::size_t step = span / (m + 1);
    if (step == 0) {
      throw ArgumentError("segment " + std::to_string(j) + " spans " + std::to_string(span) +
                          " grid steps, too short for m = " + std::to_string(m) +
                          " refine points; widen the frequency band or lower m");
    }
    std::vector<std::size_t> pts(m);
    for (std::size_t k = 1; k <= m; ++k) pts[k - 1] = seg.T[j] + k * step;
    out.push_back(std::move(pts));
  }
  return out;
}

std::vector<std::vector<double>> refine_targets(const std::vector<double>& omega,
                                                const FrequencyGrid& grid, std::size_t m) {
  if (m < 3) throw ArgumentError("refinement needs m >= 3 points per segment");
  const std::size_t K = omega.size();
  std::vector<std::vector<double>> out;
  for (std::size_t j = 0; j <= K; ++j) {
    const double lo = j == 0 ? grid.f_min / grid.beta : omega[j - 1] / grid.alpha;
    const double hi = j == K ? grid.f_max / grid.alpha : omega[j] / grid.beta;
    std::vector<double> g(m);
    for (std::size_t k = 1; k <= m; ++k) {
      g[k - 1] = lo * std::pow(hi / lo, static_cast<double>(k) / static_cast<double>(m + 1));
    }
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace mfbm
