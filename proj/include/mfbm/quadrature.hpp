#pragma once

// Globally adaptive Gauss-Kronrod integration (QAG-style interval bisection
// driven by a max-heap of local error estimates).

#include <cmath>
#include <queue>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mfbm/error.hpp"

namespace mfbm::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
};

struct Options {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  int max_intervals = 4000;
};

namespace detail {

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

// 21-point Kronrod / 10-point Gauss pair on [a, b]. The roundoff floor is
// scaled with the panel (boost's own estimate floors at 2 eps of the value
// mapped to [-1, 1], which stalls bisection on small integrals).
template <class F>
Panel gk21(F& f, double a, double b) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
  using G = boost::math::quadrature::gauss<double, 10>;
  const auto& x = GK::abscissa();
  const auto& wk = GK::weights();
  const auto& wg = G::weights();
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double f0 = f(c);
  double kron = f0 * wk[0];
  double gauss = 0.0;  // 10-point rule has no node at the center
  double l1 = std::abs(f0) * wk[0];
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double fp = f(c + h * x[i]);
    const double fm = f(c - h * x[i]);
    kron += (fp + fm) * wk[i];
    l1 += (std::abs(fp) + std::abs(fm)) * wk[i];
    if (i % 2 == 1) gauss += (fp + fm) * wg[i / 2];
  }
  kron *= h;
  gauss *= h;
  l1 *= std::abs(h);
  const double err = std::max(std::abs(kron - gauss), 50.0 * 2.220446049250313e-16 * l1);
  return {a, b, kron, err};
}

}  // namespace detail

/// Integrates f over [a, b] (finite). `breakpoints` seeds the initial
/// partition, e.g. at known discontinuities or oscillation periods.
/// Throws NumericError when the interval budget runs out before
/// max(abs_tol, rel_tol*|I|) is reached.
template <class F>
Result integrate(F f, double a, double b, const Options& opt = {},
                 const std::vector<double>& breakpoints = {}) {
  if (!(std::isfinite(a) && std::isfinite(b))) {
    throw ArgumentError("quad::integrate: bounds must be finite");
  }
  if (a == b) return {};
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }

  std::priority_queue<detail::Panel> heap;
  double value = 0.0;
  double error = 0.0;
  double left = a;
  auto push = [&](double lo, double hi) {
    auto p = detail::gk21(f, lo, hi);
    value += p.value;
    error += p.error;
    heap.push(p);
  };
  for (double bp : breakpoints) {
    if (bp > left && bp < b) {
      push(left, bp);
      left = bp;
    }
  }
  push(left, b);

  auto resum = [&] {
    auto copy = heap;
    value = 0.0;
    error = 0.0;
    while (!copy.empty()) {
      value += copy.top().value;
      error += copy.top().error;
      copy.pop();
    }
  };
  int intervals = static_cast<int>(heap.size());
  while (error > std::max(opt.abs_tol, opt.rel_tol * std::abs(value))) {
    if (intervals % 64 == 0 || intervals >= opt.max_intervals) {
      // The running add/subtract totals drift; refresh before judging.
      resum();
      if (error <= std::max(opt.abs_tol, opt.rel_tol * std::abs(value))) break;
    }
    if (intervals >= opt.max_intervals) {
      throw NumericError("adaptive quadrature did not converge on [" + std::to_string(a) +
                             ", " + std::to_string(b) + "], achieved error " +
                             std::to_string(error) + " (value " + std::to_string(value) + ")",
                         error);
    }
    auto worst = heap.top();
    heap.pop();
    value -= worst.value;
    error -= worst.error;
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Interval cannot be split further in double precision.
      value += worst.value;
      error += worst.error;
      throw NumericError("adaptive quadrature hit machine resolution", error);
    }
    push(worst.a, mid);
    push(mid, worst.b);
    ++intervals;
  }
  // Re-sum to avoid drift from the running add/subtract updates.
  value = 0.0;
  error = 0.0;
  while (!heap.empty()) {
    value += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  return {sign * value, error};
}

}  // namespace mfbm::quad
