#pragma once

// Exact Gaussian synthesis of (M_K)-FBM paths by Cholesky factorization of the
// covariance Cov(i delta, j delta), i, j = 1..N.

#include <cstddef>
#include <cstdint>

#include <Eigen/Dense>

#include "mfbm/model.hpp"
#include "mfbm/random.hpp"

namespace mfbm {

inline constexpr std::size_t kDefaultMaxSimN = 8192;

struct SimConfig {
  ModelSpec model;
  std::size_t N = 0;
  double delta = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;              // replication index
  std::size_t max_n = kDefaultMaxSimN;  // dense-factorization guard

  void validate() const;
};

/// Lower Cholesky factor with the diagonal jitter ladder 0, 1e-12 tr/n,
/// 1e-10 tr/n. Exactly singular PSD matrices (zero pivot with a vanishing
/// column) factor without jitter; an all-zero matrix factors to zero.
class CholeskyFactor {
 public:
  explicit CholeskyFactor(const Eigen::MatrixXd& cov);

  std::size_t size() const noexcept { return static_cast<std::size_t>(lower_.rows()); }
  double jitter() const noexcept { return jitter_; }
  /// L z for z drawn from `rng`.
  Eigen::VectorXd sample(NormalStream& rng) const;
  const Eigen::MatrixXd& lower() const noexcept { return lower_; }

 private:
  Eigen::MatrixXd lower_;
  double jitter_ = 0.0;
};

/// One centered Gaussian draw with covariance `cov` from stream (seed, stream).
Eigen::VectorXd gaussian_vector(const Eigen::MatrixXd& cov, std::uint64_t seed,
                                std::uint64_t stream = 0);

/// Covariance matrix of (X(delta), ..., X(N delta)).
Eigen::MatrixXd path_covariance(const ModelSpec& model, std::size_t N, double delta);

/// Holds the factorized covariance of one (model, N, delta) so replications
/// only pay for the triangular product.
class PathSampler {
 public:
  PathSampler(const ModelSpec& model, std::size_t N, double delta,
              std::size_t max_n = kDefaultMaxSimN);

  SampledPath draw(std::uint64_t seed, std::uint64_t stream) const;
  std::size_t size() const noexcept { return factor_.size(); }
  double delta() const noexcept { return delta_; }

 private:
  double delta_;
  CholeskyFactor factor_;
};

SampledPath simulate_path(const SimConfig& cfg);

}  // namespace mfbm
