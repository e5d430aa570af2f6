#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace mfbm {

double mean(std::span<const double> x);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double stddev(std::span<const double> x);

/// P(sup |B| > x) for a Brownian bridge B (Kolmogorov distribution tail).
double kolmogorov_tail(double x);

struct KsResult {
  double D = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

/// One-sample Kolmogorov-Smirnov test, asymptotic p-value at sqrt(n) D.
/// Throws ArgumentError for fewer than 5 samples.
KsResult ks_test(std::span<const double> samples, const std::function<double(double)>& cdf);

}  // namespace mfbm
