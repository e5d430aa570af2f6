#pragma once

// Counter-based random numbers. Every replication draws from its own stream
// (Philox4x32-10 keyed by the run seed, counter = (block, stream)), so a Monte
// Carlo run is reproducible regardless of how replications are scheduled.

#include <array>
#include <cstdint>

namespace mfbm {

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Inverse standard normal CDF, Acklam's rational approximation
/// (relative error below 1.15e-9 on (0,1)).
double normal_quantile(double p);

/// Sequential draws from stream `stream` of generator `seed`.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream);

  /// Uniform on the open interval (0,1), 53-bit resolution.
  double uniform();
  /// Standard normal via the inverse CDF of uniform().
  double normal() { return normal_quantile(uniform()); }

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
};

}  // namespace mfbm
