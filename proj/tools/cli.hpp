#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mfbm::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kNotAccepted = 3,
  kNumericFailure = 4,
};

/// Every tunable of the four pipelines. Defaults are the recommended ones.
struct RunConfig {
  // model (simulate, montecarlo)
  std::vector<double> H{0.6};
  std::vector<double> sigma{1.0};
  std::vector<double> sigma2;  // overrides sigma when set
  std::vector<double> omega;
  std::vector<double> H_grid;  // montecarlo: one single-regime cell per value
  // wavelet
  std::string wavelet = "bump";
  double alpha = 5.0;
  double beta = 10.0;
  std::string wavelet_table;
  // analysis
  double f_min = 0.05;
  double f_max = 20.0;
  double r = 0.1;
  std::size_t m = 5;
  double level = 0.05;
  std::size_t K_max = 2;
  std::string sigma_convention = "trimmed";
  // sampling
  std::size_t N = 6000;
  double delta = 0.03;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  std::size_t replications = 30;
  std::size_t max_n = 8192;
  // execution
  std::string out = ".";
  unsigned workers = 1;
  unsigned threads = 1;
  std::string simd = "auto";
};

/// Parses arguments, runs one subcommand and returns its exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mfbm::cli
