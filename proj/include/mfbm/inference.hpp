#pragma once

// Parameter recovery on refine points, the asymptotic covariance of the log
// spectrum, feasible GLS, the goodness-of-fit statistic T_K and the
// sequential choice of K.

#include <cstddef>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mfbm/changepoint.hpp"
#include "mfbm/wavelet.hpp"

namespace mfbm {

inline constexpr double kMinHurst = 0.05;
inline constexpr double kMaxHurst = 0.95;

enum class Flavor { ols, fgls };
std::string_view flavor_name(Flavor f);

/// Prefactor of the covariance entries: 2 / (1 - 2r) (limit of the trimmed
/// estimator, the default) or the bare 2.
enum class SigmaConvention { trimmed, plain };
std::string_view sigma_convention_name(SigmaConvention c);
SigmaConvention parse_sigma_convention(std::string_view name);

/// How the inner/outer integral pair of a covariance entry is evaluated:
/// collapsed to one integral by Parseval's identity, or literally (inner
/// Fourier integral by Gauss-Legendre panels, outer integral truncated).
enum class SigmaMethod { parseval, oscillatory };

struct SegmentEstimate {
  double H = 0.0;
  double sigma2 = 0.0;
  bool clamped = false;          // H was pulled back into [kMinHurst, kMaxHurst]
  Line lambda;                   // (-(2H+1), log sigma2 + log K_H) before clamping
  std::vector<std::size_t> points;
  Eigen::MatrixXd Sigma;         // covariance used (may include ridge)
  Eigen::Matrix2d Gamma = Eigen::Matrix2d::Zero();  // asymptotic covariance of lambda
  Flavor flavor = Flavor::ols;
  bool ridge = false;            // Sigma was regularized before inversion
  double condition = 1.0;        // condition number of Sigma as supplied
};

/// Inverts lambda into (H, sigma2), clamping H.
SegmentEstimate recover(const Line& lambda, const BandWavelet& w, Flavor flavor);

/// OLS of Y_i on (log f_i, 1) over `points` (>= 3, distinct frequencies).
SegmentEstimate ols_estimate(const std::vector<double>& Y, const FrequencyGrid& grid,
                             const std::vector<std::size_t>& points, const BandWavelet& w);

/// True when the wavelet bands at frequencies g1, g2 intersect, i.e.
/// max/min < beta/alpha. Entries of disjoint pairs are exactly 0.
bool bands_overlap(double g1, double g2, const BandWavelet& w);

/// Asymptotic covariance matrix of sqrt(N delta) (Y_i) at frequencies `g`.
Eigen::MatrixXd sigma_matrix(double H, const std::vector<double>& g, const BandWavelet& w,
                             double r, SigmaConvention convention = SigmaConvention::trimmed,
                             SigmaMethod method = SigmaMethod::parseval);

/// Generalized least squares with `Sigma`; condition numbers above 1e12 fall
/// back to Sigma + eps I, eps = 1e-10 tr / m (flagged).
SegmentEstimate fgls_estimate(const std::vector<double>& Y, const FrequencyGrid& grid,
                              const std::vector<std::size_t>& points, const Eigen::MatrixXd& Sigma,
                              const BandWavelet& w);

struct TestStatistic {
  double value = 0.0;
  std::size_t dof = 0;
};

/// T_K = N delta sum_j (Y_j - X_j lambda_j)' Sigma_j^-1 (Y_j - X_j lambda_j),
/// dof = (K+1)(m-2).
TestStatistic test_statistic(const std::vector<double>& Y, const FrequencyGrid& grid,
                             const std::vector<SegmentEstimate>& segments);

/// P(chi2(dof) > x).
double chi2_upper_tail(double x, double dof);
double chi2_cdf(double x, double dof);

struct FitConfig {
  std::size_t m = 5;
  double level = 0.05;
  std::size_t K_max = 2;
  SigmaConvention convention = SigmaConvention::trimmed;
  SigmaMethod method = SigmaMethod::parseval;
};

struct FitResult {
  std::size_t K = 0;
  Segmentation segmentation;
  std::vector<double> omegas;
  std::vector<SegmentEstimate> ols;
  std::vector<SegmentEstimate> segments;  // FGLS
  double T_stat = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
  double level = 0.05;
  bool accepted = false;
  SigmaConvention convention = SigmaConvention::trimmed;
};

/// Full pipeline for a fixed K on a computed spectrum.
FitResult fit_order(const WaveletSpectrum& spec, const BandWavelet& w, std::size_t K,
                    const FitConfig& cfg = {});

struct Selection {
  FitResult result;               // first accepted order, else the K_max fit
  std::vector<FitResult> attempts;  // K = 0, 1, ... in order
  bool accepted() const noexcept { return result.accepted; }
};

/// K = 0, 1, ..., K_max until the test accepts at `cfg.level`. Errors carry
/// the order they occurred at in their message.
Selection select_K(const WaveletSpectrum& spec, const BandWavelet& w, const FitConfig& cfg = {});

}  // namespace mfbm
