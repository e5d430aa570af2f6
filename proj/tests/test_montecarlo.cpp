#include <doctest.h>

#include <numeric>
#include <vector>

#include "mfbm/changepoint.hpp"
#include "mfbm/error.hpp"
#include "mfbm/montecarlo.hpp"

using namespace mfbm;

namespace {

McConfig small_config() {
  McConfig c;
  c.cells = {{"H=0.5", ModelSpec::fbm(0.5)}, {"two", ModelSpec{{2.0}, {0.2, 0.7}, {3.0, 1.0}}}};
  c.N = 1500;
  c.delta = 0.05;
  c.f_min = 0.3;
  c.f_max = 10.0;
  c.fit.K_max = 1;
  c.replications = 3;
  c.seed = 11;
  return c;
}

}  // namespace

TEST_CASE("stream layout") {
  CHECK(mc_stream(0, 7) == 7);
  CHECK(mc_stream(3, 5) == (std::uint64_t{3} << 32) + 5);
}

TEST_CASE("configuration checks") {
  auto c = small_config();
  CHECK_NOTHROW(c.validate());
  c.replications = 0;
  CHECK_THROWS_AS(c.validate(), ArgumentError);
  c = small_config();
  c.cells.clear();
  CHECK_THROWS_AS(c.validate(), ArgumentError);
  c = small_config();
  c.max_n = 1000;
  CHECK_THROWS_AS(c.validate(), ResourceError);
  c = small_config();
  c.fit.m = 2;
  CHECK_THROWS_AS(c.validate(), ArgumentError);
}

TEST_CASE("per-order failures are captured") {
  const auto w = BandWavelet::bump();
  const auto path = simulate_path({ModelSpec::fbm(0.5), 1500, 0.05, 1, 0});
  const auto grid = build_grid(1500, 0.05, 0.3, 10.0, w);
  FitConfig fit;
  fit.K_max = 8;
  const auto out = fit_orders(path, w, grid, 0.1, fit);
  REQUIRE(out.size() == 9);
  CHECK(out[0].ok);
  CHECK(out[0].dof == 3);
  CHECK(out[0].H.size() == 1);
  CHECK_FALSE(out[8].ok);
  CHECK_FALSE(out[8].error.empty());
}

TEST_CASE("runs are reproducible and independent of the worker count") {
  const auto w = BandWavelet::bump();
  auto c = small_config();
  std::size_t calls = 0;
  const auto a = run_montecarlo(c, w, [&](const McReplication&) { ++calls; });
  CHECK(calls == 6);
  c.workers = 2;
  const auto b = run_montecarlo(c, w);
  REQUIRE(a.replications.size() == 6);
  REQUIRE(b.replications.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    const auto &x = a.replications[i], &y = b.replications[i];
    CHECK(x.cell == i / 3);
    CHECK(x.replication == i % 3);
    CHECK(x.stream == mc_stream(x.cell, x.replication));
    CHECK(x.stream == y.stream);
    CHECK(x.ok == y.ok);
    REQUIRE(x.orders.size() == y.orders.size());
    for (std::size_t k = 0; k < x.orders.size(); ++k) {
      CHECK(x.orders[k].T == y.orders[k].T);
      CHECK(x.orders[k].H == y.orders[k].H);
      CHECK(x.orders[k].omegas == y.orders[k].omegas);
    }
  }
  // Distinct cells never share normals.
  CHECK(a.replications[0].orders[0].T != a.replications[3].orders[0].T);

  const auto cells = summarize(a);
  REQUIRE(cells.size() == 2);
  CHECK(cells[0].label == "H=0.5");
  CHECK(cells[0].true_K == 0);
  CHECK(cells[1].true_K == 1);
  for (const auto& cell : cells) {
    CHECK(cell.replications == 3);
    CHECK(cell.orders.size() == 2);
    CHECK(std::accumulate(cell.selected.begin(), cell.selected.end(), std::size_t{0}) == 3);
    CHECK(cell.orders[0].dof == 3);
    CHECK(cell.orders[1].dof == 6);
    CHECK(cell.orders[0].T.size() == cell.orders[0].fitted);
    CHECK(cell.orders[0].ks_p == 1.0);  // fewer than 5 statistics
  }
}
