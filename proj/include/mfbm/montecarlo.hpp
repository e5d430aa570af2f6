#pragma once

// Replication harness: simulate, analyze and fit every order K = 0..K_max on
// independent paths of one or more models.
//
// Replication r of cell c draws from stream c * 2^32 + r of the run seed, so
// results do not depend on the worker count or scheduling.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mfbm/inference.hpp"
#include "mfbm/model.hpp"
#include "mfbm/simulate.hpp"
#include "mfbm/wavelet.hpp"

namespace mfbm {

struct McCell {
  std::string label;
  ModelSpec model;
};

struct McConfig {
  std::vector<McCell> cells;
  std::size_t N = 6000;
  double delta = 0.03;
  double f_min = 0.05;
  double f_max = 20.0;
  double r = 0.1;
  FitConfig fit;
  std::size_t replications = 30;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::size_t max_n = kDefaultMaxSimN;

  void validate() const;
};

/// Outcome of fitting one order on one replication.
struct OrderOutcome {
  bool ok = false;
  std::string error;
  double T = 0.0;
  std::size_t dof = 0;
  double p_value = 0.0;
  bool accepted = false;
  std::vector<double> H;      // FGLS, per segment
  std::vector<double> H_ols;
  std::vector<double> sigma2; // FGLS
  std::vector<double> omegas;
};

struct McReplication {
  std::size_t cell = 0;
  std::size_t replication = 0;
  std::uint64_t stream = 0;
  bool ok = false;            // path simulated and spectrum formed
  std::string error;
  std::vector<OrderOutcome> orders;  // K = 0..K_max
  /// First accepted order following the sequential rule, or -1 when none.
  int selected_K() const;
};

struct McRun {
  McConfig config;
  std::vector<McReplication> replications;  // cell-major, replication-minor
};

std::uint64_t mc_stream(std::size_t cell, std::size_t replication);

/// Fits K = 0..K_max on one path; per-order errors are captured, not thrown.
std::vector<OrderOutcome> fit_orders(const SampledPath& path, const BandWavelet& w,
                                     const FrequencyGrid& grid, double r, const FitConfig& fit);

/// Runs every cell. `progress` (optional) is called after each replication.
McRun run_montecarlo(const McConfig& cfg, const BandWavelet& w,
                     const std::function<void(const McReplication&)>& progress = {});

struct OrderSummary {
  std::size_t K = 0;
  std::size_t fitted = 0;
  std::size_t accepted = 0;
  std::vector<double> H_mean, H_sd;        // FGLS, per segment
  std::vector<double> H_ols_mean, H_ols_sd;
  std::vector<double> omega_mean, omega_sd;
  std::vector<double> T;                    // pooled statistics
  double ks_D = 0.0;
  double ks_p = 1.0;                        // vs chi2(dof); NaN-free, 1 when too few
  std::size_t dof = 0;
};

struct CellSummary {
  std::string label;
  std::size_t true_K = 0;
  std::size_t replications = 0;
  std::size_t failures = 0;
  std::vector<OrderSummary> orders;
  std::vector<std::size_t> selected;  // count per selected K; last slot = none accepted
};

std::vector<CellSummary> summarize(const McRun& run);

}  // namespace mfbm
