#include <doctest.h>

#include <cmath>

#include "hosm/distributions.hpp"
#include "hosm/samplers.hpp"

using namespace hosm;

namespace {
const std::function<Vec(const Vec&)> zero_score = [](const Vec& x) { return Vec(x.size(), 0.0); };
}

TEST_CASE("langevin step: zero score gives a pure random walk") {
  Rng rng(1);
  Rng probe = rng;  // same stream, to reconstruct the draw
  Vec x{1.0, -2.0};
  Vec next = langevin_step(x, zero_score, 0.25, rng);
  Vec z{probe.gaussian(), probe.gaussian()};
  CHECK(next[0] == doctest::Approx(x[0] + 0.5 * z[0]));  // sqrt(eps) = 0.5
  CHECK(next[1] == doctest::Approx(x[1] + 0.5 * z[1]));
  CHECK_THROWS(langevin_step(x, zero_score, 0.0, rng));

  // increment variance over many steps equals eps per coordinate
  Rng rng2(2);
  const double eps = 0.04;
  double var = 0.0;
  const int n = 100000;
  Vec cur{0.0};
  for (int i = 0; i < n; ++i) {
    Vec nxt = langevin_step(cur, zero_score, eps, rng2);
    const double d = nxt[0] - cur[0];
    var += d * d;
    cur = nxt;
  }
  var /= n;
  CHECK(var == doctest::Approx(eps).epsilon(0.02));
}

TEST_CASE("ozaki coefficients at c = -1, eps = 0.5") {
  auto s1 = [](const Vec& x) { return Vec{-x[0]}; };
  auto s2d = [](const Vec&) { return Vec{-1.0}; };
  Rng rng(3);
  Rng probe = rng;
  Vec x{2.0};
  Vec next = ozaki_diag_step(x, s1, s2d, 0.5, rng);
  const double z = probe.gaussian();
  const double m = (std::exp(-0.5) - 1.0) / (-1.0);  // 0.39346934...
  const double v = (std::exp(-1.0) - 1.0) / (-1.0);  // 0.63212055...
  CHECK(m == doctest::Approx(0.3934693402873666));
  CHECK(v == doctest::Approx(0.6321205588285577));
  CHECK(next[0] == doctest::Approx(x[0] + m * s1(x)[0] + std::sqrt(v) * z));
}

TEST_CASE("small-curvature ozaki equals langevin with doubled step, same draws") {
  auto s1 = [](const Vec& x) { return Vec{0.3 * x[0], -0.1 * x[1]}; };
  auto s2d = [](const Vec&) { return Vec{0.0, 0.0}; };
  Rng ra(7), rb(7);
  Vec x{0.4, -1.1};
  const double eps = 0.05;
  Vec a = ozaki_diag_step(x, s1, s2d, eps, ra);
  Vec b = langevin_step(x, s1, 2.0 * eps, rb);
  CHECK(a == b);
}

TEST_CASE("positive curvature is clamped and counted; noise variance stays positive") {
  auto s1 = [](const Vec&) { return Vec{0.0}; };
  auto s2d = [](const Vec&) { return Vec{1e9}; };
  Rng rng(5);
  long clamps = 0;
  Vec next = ozaki_diag_step(Vec{0.0}, s1, s2d, 0.01, rng, &clamps);
  CHECK(clamps == 1);
  CHECK(std::isfinite(next[0]));
}

TEST_CASE("stationary variance on the standard normal within 10 percent") {
  auto dist = make_std_gaussian(2);
  ScoreSource src = oracle_source(*dist);
  SamplerConfig cfg;
  cfg.eps = 0.1;
  cfg.iterations = 10000;
  cfg.burn_in = 1000;
  cfg.chains = 32;
  cfg.seed = 11;

  for (SamplerMethod m : {SamplerMethod::langevin, SamplerMethod::ozaki_diag}) {
    cfg.method = m;
    RunResult r = run_chains(cfg, src, Exec::parallel);
    REQUIRE(!r.divergence);
    for (int d = 0; d < 2; ++d) {
      double mean = 0.0, m2 = 0.0;
      long n = 0;
      for (const auto& step : r.state.history)
        for (const Vec& p : step) {
          mean += p[static_cast<std::size_t>(d)];
          m2 += p[static_cast<std::size_t>(d)] * p[static_cast<std::size_t>(d)];
          ++n;
        }
      mean /= static_cast<double>(n);
      const double var = m2 / static_cast<double>(n) - mean * mean;
      CHECK(std::fabs(mean) < 0.1);
      CHECK(var == doctest::Approx(1.0).epsilon(0.1));
    }
  }
}

TEST_CASE("runs are reproducible and parallel equals serial bitwise") {
  auto dist = make_two_mode_gaussian({3.0, 0.0}, {-3.0, 0.0}, Mat::identity(2));
  ScoreSource src = oracle_source(*dist);
  SamplerConfig cfg;
  cfg.method = SamplerMethod::ozaki_diag;
  cfg.eps = 0.05;
  cfg.iterations = 400;
  cfg.burn_in = 100;
  cfg.chains = 6;
  cfg.seed = 9;
  RunResult a = run_chains(cfg, src, Exec::serial);
  RunResult b = run_chains(cfg, src, Exec::parallel);
  CHECK(a.state.positions == b.state.positions);
  for (std::size_t t = 0; t < a.state.history.size(); ++t)
    for (std::size_t c = 0; c < a.state.history[t].size(); ++c)
      CHECK(a.state.history[t][c] == b.state.history[t][c]);
  RunResult c2 = run_chains(cfg, src, Exec::parallel);
  CHECK(c2.state.positions == b.state.positions);
}

TEST_CASE("divergence aborts with the offending step index") {
  // exploding score: Langevin with a huge step on a quadratic blows up fast
  ScoreSource src;
  src.dim = 1;
  src.s1 = [](const Vec& x) { return Vec{-x[0] * 1e8}; };
  SamplerConfig cfg;
  cfg.method = SamplerMethod::langevin;
  cfg.eps = 10.0;
  cfg.iterations = 200;
  cfg.burn_in = 10;
  cfg.chains = 2;
  cfg.seed = 1;
  cfg.init = ChainInit::fixed_point;
  cfg.init_point = Vec{1.0};
  RunResult r = run_chains(cfg, src, Exec::serial);
  REQUIRE(r.divergence.has_value());
  CHECK(r.divergence->step >= 0);
  CHECK(r.divergence->step < 200);
  CHECK(all_finite(r.divergence->last_finite));
}

TEST_CASE("ess: iid draws score close to the total draw count") {
  Rng rng(21);
  const int n = 2000, chains = 4, dim = 2;
  std::vector<std::vector<Vec>> hist(n, std::vector<Vec>(chains));
  for (auto& step : hist)
    for (auto& p : step) p = rng.gaussian_vec(dim);
  EssReport rep = effective_sample_size(hist);
  const double total = static_cast<double>(n) * chains;
  CHECK(rep.min_ess > 0.9 * total);
  CHECK(rep.min_ess <= total);
  for (double e : rep.per_dimension) {
    CHECK(e >= 1.0);
    CHECK(e <= total);
  }
}

TEST_CASE("ess drops for strongly autocorrelated chains") {
  Rng rng(22);
  const int n = 4000, chains = 4;
  std::vector<std::vector<Vec>> hist(n, std::vector<Vec>(chains));
  std::vector<double> state(chains, 0.0);
  const double rho = 0.95;
  for (int t = 0; t < n; ++t)
    for (int c = 0; c < chains; ++c) {
      state[static_cast<std::size_t>(c)] =
          rho * state[static_cast<std::size_t>(c)] + std::sqrt(1 - rho * rho) * rng.gaussian();
      hist[static_cast<std::size_t>(t)][static_cast<std::size_t>(c)] = Vec{state[static_cast<std::size_t>(c)]};
    }
  EssReport rep = effective_sample_size(hist);
  // AR(1) with rho = 0.95 has tau = (1+rho)/(1-rho) = 39
  const double expect = n * chains / 39.0;
  CHECK(rep.min_ess < 2.0 * expect);
  CHECK(rep.min_ess > 0.4 * expect);
}

TEST_CASE("tune_step_size basics") {
  auto dist = make_std_gaussian(2);
  ScoreSource src = oracle_source(*dist);
  SamplerConfig pilot;
  pilot.iterations = 1500;
  pilot.burn_in = 300;
  pilot.chains = 4;
  pilot.seed = 33;

  SUBCASE("singleton grid returns its only element") {
    TuneResult t = tune_step_size(SamplerMethod::langevin, src, {1e-4}, pilot, Exec::serial);
    CHECK(t.best_eps == 1e-4);
  }

  SUBCASE("selected eps is the grid argmax of min-ess among non-divergent runs") {
    TuneResult t = tune_step_size(SamplerMethod::langevin, src, {0.01, 0.1, 1.0, 10.0}, pilot, Exec::parallel);
    double best = -1.0;
    double arg = 0.0;
    for (const TuneRow& r : t.table)
      if (!r.divergent && r.min_ess > best) {
        best = r.min_ess;
        arg = r.eps;
      }
    CHECK(t.best_eps == arg);
    // eps = 10 makes the Euler chain on N(0, I) explode
    CHECK(t.table.back().divergent);
  }

  SUBCASE("empty and all-divergent grids fail") {
    CHECK_THROWS(tune_step_size(SamplerMethod::langevin, src, {}, pilot, Exec::serial));
    CHECK_THROWS(tune_step_size(SamplerMethod::langevin, src, {50.0, 100.0}, pilot, Exec::serial));
  }
}

TEST_CASE("axis crossing counter") {
  std::vector<std::vector<Vec>> hist;
  for (double v : {1.0, 2.0, -1.0, -2.0, 3.0}) hist.push_back({Vec{v, 0.0}});
  CHECK(count_axis_crossings(hist, 0) == 2);
}
