#include "mfbm/simulate.hpp"

#include <cmath>
#include <string>

#include "mfbm/error.hpp"

namespace mfbm {

void SimConfig::validate() const {
  model.validate();
  if (N < 2) throw ArgumentError("simulation needs N >= 2");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ArgumentError("simulation step must be > 0");
  if (N > max_n) {
    throw ResourceError("N = " + std::to_string(N) + " exceeds the dense factorization cap " +
                        std::to_string(max_n) + " (raise max_n to override)");
  }
}

namespace {

// Cholesky that accepts exactly singular PSD matrices: a pivot at roundoff
// level whose column residual also vanishes yields a zero column.
bool semidefinite_cholesky(const Eigen::MatrixXd& A, Eigen::MatrixXd& L) {
  const Eigen::Index n = A.rows();
  const double tol = 1e-12 * A.diagonal().cwiseAbs().maxCoeff();
  L = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double d = A(j, j) - L.row(j).head(j).squaredNorm();
    const Eigen::Index rest = n - j - 1;
    const Eigen::VectorXd col =
        A.col(j).tail(rest) - L.bottomLeftCorner(rest, j) * L.row(j).head(j).transpose();
    if (d > tol) {
      const double l = std::sqrt(d);
      L(j, j) = l;
      L.col(j).tail(rest) = col / l;
    } else if (d < -tol || (rest > 0 && col.cwiseAbs().maxCoeff() > 1e3 * tol)) {
      return false;
    }
  }
  return true;
}

}  // namespace

CholeskyFactor::CholeskyFactor(const Eigen::MatrixXd& cov) {
  const auto n = cov.rows();
  if (cov.cols() != n) throw ArgumentError("covariance must be square");
  if (n == 0) return;
  const double max_abs = cov.cwiseAbs().maxCoeff();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) {
      if (std::abs(cov(i, j) - cov(j, i)) > 1e-12 * max_abs) {
        throw ArgumentError("covariance must be symmetric");
      }
    }
  }
  if (max_abs == 0.0) {
    lower_ = Eigen::MatrixXd::Zero(n, n);
    return;
  }
  const double scale = cov.trace() / static_cast<double>(n);
  {
    lower_ = cov;
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>, Eigen::Lower> llt(lower_);
    if (llt.info() == Eigen::Success) {
      lower_.triangularView<Eigen::StrictlyUpper>().setZero();
      return;
    }
  }
  if (semidefinite_cholesky(cov, lower_)) return;
  for (double rel : {1e-12, 1e-10}) {
    jitter_ = rel * scale;
    lower_ = cov;
    lower_.diagonal().array() += jitter_;
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>, Eigen::Lower> llt(lower_);
    if (llt.info() == Eigen::Success) {
      lower_.triangularView<Eigen::StrictlyUpper>().setZero();
      return;
    }
  }
  lower_.resize(0, 0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
  const double smallest = eig.eigenvalues()(0);
  throw SimulationError("covariance is not positive semidefinite within the jitter budget; "
                        "smallest eigenvalue estimate " + std::to_string(smallest),
                        smallest);
}

Eigen::VectorXd CholeskyFactor::sample(NormalStream& rng) const {
  const auto n = lower_.rows();
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
  return lower_.triangularView<Eigen::Lower>() * z;
}

Eigen::VectorXd gaussian_vector(const Eigen::MatrixXd& cov, std::uint64_t seed,
                                std::uint64_t stream) {
  CholeskyFactor factor(cov);
  NormalStream rng(seed, stream);
  return factor.sample(rng);
}

Eigen::MatrixXd path_covariance(const ModelSpec& model, std::size_t N, double delta) {
  model.validate();
  // Stationary increments: every entry needs V at a multiple of delta only.
  const auto v = variogram_ladder(model, delta, N);
  Eigen::MatrixXd cov(N, N);
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double c = 0.5 * (v[i + 1] + v[j + 1] - v[i - j]);
      cov(i, j) = c;
      cov(j, i) = c;
    }
  }
  return cov;
}

PathSampler::PathSampler(const ModelSpec& model, std::size_t N, double delta, std::size_t max_n)
    : delta_(delta), factor_([&] {
        SimConfig cfg{model, N, delta, 0, 0, max_n};
        cfg.validate();
        return CholeskyFactor(path_covariance(model, N, delta));
      }()) {}

SampledPath PathSampler::draw(std::uint64_t seed, std::uint64_t stream) const {
  NormalStream rng(seed, stream);
  const Eigen::VectorXd x = factor_.sample(rng);
  return SampledPath{delta_, std::vector<double>(x.data(), x.data() + x.size())};
}

SampledPath simulate_path(const SimConfig& cfg) {
  cfg.validate();
  return PathSampler(cfg.model, cfg.N, cfg.delta, cfg.max_n).draw(cfg.seed, cfg.stream);
}

}  // namespace mfbm
