#include "mfbm/montecarlo.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "mfbm/changepoint.hpp"
#include "mfbm/error.hpp"
#include "mfbm/stats.hpp"

namespace mfbm {

void McConfig::validate() const {
  if (cells.empty()) throw ArgumentError("Monte Carlo run needs at least one model");
  for (const auto& c : cells) c.model.validate();
  if (replications < 2) throw ArgumentError("Monte Carlo run needs at least 2 replications");
  if (N > max_n) {
    throw ResourceError("N = " + std::to_string(N) + " exceeds the dense factorization cap " +
                        std::to_string(max_n));
  }
  if (!(r > 0.0 && r < 1.0 / 3.0)) throw ArgumentError("trimming fraction r must lie in (0, 1/3)");
  if (fit.m < 3) throw ArgumentError("m must be >= 3");
  if (!(fit.level > 0.0 && fit.level < 1.0)) throw ArgumentError("level must lie in (0,1)");
}

int McReplication::selected_K() const {
  for (std::size_t K = 0; K < orders.size(); ++K) {
    if (!orders[K].ok) return -1;
    if (orders[K].accepted) return static_cast<int>(K);
  }
  return -1;
}

std::uint64_t mc_stream(std::size_t cell, std::size_t replication) {
  return (static_cast<std::uint64_t>(cell) << 32) + replication;
}

std::vector<OrderOutcome> fit_orders(const SampledPath& path, const BandWavelet& w,
                                     const FrequencyGrid& grid, double r, const FitConfig& fit) {
  const auto spec = spectrum(path, w, grid, r);
  std::vector<OrderOutcome> out;
  for (std::size_t K = 0; K <= fit.K_max; ++K) {
    OrderOutcome o;
    try {
      const auto res = fit_order(spec, w, K, fit);
      o.ok = true;
      o.T = res.T_stat;
      o.dof = res.dof;
      o.p_value = res.p_value;
      o.accepted = res.accepted;
      for (std::size_t j = 0; j < res.segments.size(); ++j) {
        o.H.push_back(res.segments[j].H);
        o.sigma2.push_back(res.segments[j].sigma2);
        o.H_ols.push_back(res.ols[j].H);
      }
      o.omegas = res.omegas;
    } catch (const Error& e) {
      o.error = e.what();
    }
    out.push_back(std::move(o));
  }
  return out;
}

McRun run_montecarlo(const McConfig& cfg, const BandWavelet& w,
                     const std::function<void(const McReplication&)>& progress) {
  cfg.validate();
  const auto grid = build_grid(cfg.N, cfg.delta, cfg.f_min, cfg.f_max, w);
  w.table(cfg.delta);  // build once before workers share it

  McRun run;
  run.config = cfg;
  run.replications.resize(cfg.cells.size() * cfg.replications);
  std::mutex progress_mutex;

  for (std::size_t c = 0; c < cfg.cells.size(); ++c) {
    const PathSampler sampler(cfg.cells[c].model, cfg.N, cfg.delta, cfg.max_n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < cfg.replications; i = next++) {
        auto& rec = run.replications[c * cfg.replications + i];
        rec.cell = c;
        rec.replication = i;
        rec.stream = mc_stream(c, i);
        try {
          const auto path = sampler.draw(cfg.seed, rec.stream);
          rec.orders = fit_orders(path, w, grid, cfg.r, cfg.fit);
          rec.ok = true;
        } catch (const Error& e) {
          rec.error = e.what();
        }
        if (progress) {
          std::lock_guard lock(progress_mutex);
          progress(rec);
        }
      }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(cfg.workers,
                                                       static_cast<unsigned>(cfg.replications)));
    if (n == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
  }
  return run;
}

std::vector<CellSummary> summarize(const McRun& run) {
  const auto& cfg = run.config;
  std::vector<CellSummary> out;
  for (std::size_t c = 0; c < cfg.cells.size(); ++c) {
    CellSummary s;
    s.label = cfg.cells[c].label;
    s.true_K = cfg.cells[c].model.K();
    s.replications = cfg.replications;
    s.selected.assign(cfg.fit.K_max + 2, 0);
    for (std::size_t K = 0; K <= cfg.fit.K_max; ++K) {
      OrderSummary o;
      o.K = K;
      std::vector<std::vector<double>> H(K + 1), Hols(K + 1), om(K);
      for (std::size_t i = 0; i < cfg.replications; ++i) {
        const auto& rec = run.replications[c * cfg.replications + i];
        if (!rec.ok || K >= rec.orders.size() || !rec.orders[K].ok) continue;
        const auto& oo = rec.orders[K];
        ++o.fitted;
        if (oo.accepted) ++o.accepted;
        o.T.push_back(oo.T);
        o.dof = oo.dof;
        for (std::size_t j = 0; j <= K; ++j) {
          H[j].push_back(oo.H[j]);
          Hols[j].push_back(oo.H_ols[j]);
        }
        for (std::size_t j = 0; j < K; ++j) om[j].push_back(oo.omegas[j]);
      }
      for (std::size_t j = 0; j <= K; ++j) {
        o.H_mean.push_back(mean(H[j]));
        o.H_sd.push_back(stddev(H[j]));
        o.H_ols_mean.push_back(mean(Hols[j]));
        o.H_ols_sd.push_back(stddev(Hols[j]));
      }
      for (std::size_t j = 0; j < K; ++j) {
        o.omega_mean.push_back(mean(om[j]));
        o.omega_sd.push_back(stddev(om[j]));
      }
      if (o.T.size() >= 5 && o.dof > 0) {
        const double dof = static_cast<double>(o.dof);
        const auto ks = ks_test(o.T, [dof](double x) { return chi2_cdf(x, dof); });
        o.ks_D = ks.D;
        o.ks_p = ks.p_value;
      }
      s.orders.push_back(std::move(o));
    }
    for (std::size_t i = 0; i < cfg.replications; ++i) {
      const auto& rec = run.replications[c * cfg.replications + i];
      if (!rec.ok) {
        ++s.failures;
        continue;
      }
      const int k = rec.selected_K();
      s.selected[k < 0 ? cfg.fit.K_max + 1 : static_cast<std::size_t>(k)]++;
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace mfbm
