#include <doctest.h>

#include <cmath>
#include <memory>

#include "hosm/distributions.hpp"
#include "oracles.hpp"

using namespace hosm;

TEST_CASE("standard normal sampling: mean within 0.02 per coordinate at n=1e5") {
  auto d = make_std_gaussian(2);
  auto xs = sample_n(*d, 100000, 1);
  Vec mean(2, 0.0);
  for (const Vec& x : xs) {
    mean[0] += x[0];
    mean[1] += x[1];
  }
  for (double& m : mean) m /= static_cast<double>(xs.size());
  CHECK(std::fabs(mean[0]) < 0.02);
  CHECK(std::fabs(mean[1]) < 0.02);
}

TEST_CASE("single tiny-scale mixture component concentrates at its location") {
  LogisticMixture d(Vec{1.0}, {Vec{2.0, -1.0}}, {Vec{1e-4, 1e-4}});
  auto xs = sample_n(d, 200, 3);
  for (const Vec& x : xs) {
    CHECK(std::fabs(x[0] - 2.0) < 0.01);
    CHECK(std::fabs(x[1] + 1.0) < 0.01);
  }
}

TEST_CASE("two-mode draws split roughly half and half") {
  auto d = make_two_mode_gaussian({3.0, 0.0}, {-3.0, 0.0}, Mat::identity(2));
  auto xs = sample_n(*d, 10000, 5);
  int right = 0;
  for (const Vec& x : xs) right += x[0] > 0.0 ? 1 : 0;
  CHECK(right > 4500);
  CHECK(right < 5500);
}

TEST_CASE("perturb returns x + sigma z and matches variance at 1e5 draws") {
  Rng rng(17);
  Vec x{0.5, -0.25};
  auto [xt, z] = perturb(x, 0.3, rng);
  CHECK(xt[0] == doctest::Approx(x[0] + 0.3 * z[0]));
  CHECK(xt[1] == doctest::Approx(x[1] + 0.3 * z[1]));

  // x = 0, sigma = 1: x_tilde equals z exactly
  auto [xt2, z2] = perturb(Vec{0.0, 0.0}, 1.0, rng);
  CHECK(xt2 == z2);

  double var = 0.0;
  const int n = 100000;
  Rng rng2(23);
  for (int i = 0; i < n; ++i) {
    auto [xti, zi] = perturb(x, 0.3, rng2);
    (void)zi;
    const double d0 = xti[0] - x[0];
    const double d1 = xti[1] - x[1];
    var += d0 * d0 + d1 * d1;
  }
  var /= 2.0 * n;
  CHECK(var == doctest::Approx(0.09).epsilon(0.02));
  CHECK_THROWS(perturb(x, 0.0, rng));
}

TEST_CASE("gaussian scores are the closed forms") {
  Rng rng(2);
  Mat cov = random_spd(3, 20.0, rng);
  Vec mu{0.5, -1.0, 2.0};
  Gaussian g(mu, cov);
  Vec x = rng.gaussian_vec(3);
  auto ch = cholesky(cov);
  Vec expect = vscale(chol_solve(ch, vsub(x, mu)), -1.0);
  CHECK(oracle::max_rel_err(g.score1(x), expect) < 1e-10);
  Mat s2 = g.score2(x);
  Mat minus_prec = mscale(chol_inverse(ch), -1.0);
  CHECK(oracle::max_rel_err(s2, minus_prec) < 1e-10);
}

namespace {

void check_scores_against_fd(const Density& d, Rng& rng, int n_points, double tol1, double tol2) {
  for (int i = 0; i < n_points; ++i) {
    Vec x = d.sample(rng);
    const ScoreEval e = d.scores(x);
    CHECK(max_asymmetry(e.s2) == 0.0);
    Vec fd_s1 = oracle::fd_gradient([&](const Vec& y) { return d.log_density(y); }, x);
    CHECK(oracle::max_rel_err(e.s1, fd_s1) < tol1);
    Mat fd_s2 = oracle::fd_jacobian([&](const Vec& y) { return d.score1(y); }, x, 1e-5);
    CHECK(oracle::max_rel_err(e.s2, fd_s2) < tol2);
  }
}

}  // namespace

TEST_CASE("analytic scores match finite differences for every distribution family") {
  Rng rng(31);
  SUBCASE("gaussian") {
    auto d = make_random_gaussian(4, 50.0, 7);
    check_scores_against_fd(*d, rng, 20, 1e-5, 1e-4);
  }
  SUBCASE("two-mode") {
    auto d = make_two_mode_gaussian({3.0, 0.0}, {-3.0, 0.0}, Mat::identity(2));
    check_scores_against_fd(*d, rng, 20, 1e-5, 1e-4);
  }
  SUBCASE("clusters") {
    auto d = make_cluster_grid(3, 2.5, 0.4);
    check_scores_against_fd(*d, rng, 20, 1e-5, 1e-4);
  }
  SUBCASE("logistic mixture") {
    auto d = make_random_logistic_mixture(3, 4, 11);
    check_scores_against_fd(*d, rng, 20, 1e-5, 1e-4);
  }
  SUBCASE("ring") {
    Ring d(3.0, 0.4);
    check_scores_against_fd(d, rng, 20, 1e-5, 1e-4);
  }
}

TEST_CASE("1-d two-component logistic mixture score matches fd on a grid") {
  LogisticMixture d(Vec{0.4, 0.6}, {Vec{-1.0}, Vec{1.5}}, {Vec{0.5}, Vec{0.3}});
  for (int i = 0; i < 20; ++i) {
    const double x = -3.0 + 6.0 * i / 19.0;
    Vec fd = oracle::fd_gradient([&](const Vec& y) { return d.log_density(y); }, Vec{x});
    CHECK(oracle::rel_err(d.score1(Vec{x})[0], fd[0]) < 1e-5);
  }
}

TEST_CASE("mixture log densities stay finite at scale 1e-3") {
  LogisticMixture d(Vec{0.5, 0.5}, {Vec{0.0}, Vec{5.0}}, {Vec{1e-3}, Vec{1e-3}});
  // far in the tail of both components
  const double lp = d.log_density(Vec{100.0});
  CHECK(std::isfinite(lp));
  CHECK(std::isfinite(d.score1(Vec{100.0})[0]));

  Mat tiny_cov = mscale(Mat::identity(2), 1e-6);
  auto g = make_two_mode_gaussian({40.0, 0.0}, {-40.0, 0.0}, tiny_cov);
  CHECK(std::isfinite(g->log_density(Vec{0.0, 0.0})));
}

TEST_CASE("noisy density closed form exists for gaussian families only") {
  auto g = make_std_gaussian(2);
  auto ng = noisy_density(*g, 0.5);
  REQUIRE(ng != nullptr);
  // s1(xt) = -(Sigma + sigma^2 I)^{-1} xt = -xt / 1.25
  Vec xt{1.0, -2.0};
  CHECK(ng->score1(xt)[0] == doctest::Approx(-0.8));
  CHECK(ng->score1(xt)[1] == doctest::Approx(1.6));
  CHECK(ng->score2(xt)(0, 0) == doctest::Approx(-0.8));

  auto lm = make_random_logistic_mixture(2, 3, 1);
  CHECK(noisy_density(*lm, 0.5) == nullptr);

  CHECK_THROWS(noisy_density(*g, 0.0));
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS(Gaussian({0.0}, Mat(2, 2)));
  CHECK_THROWS(GaussianMixture(Vec{1.0, -1.0}, []{
    std::vector<Gaussian> v;
    v.emplace_back(Vec{0.0}, Mat::identity(1));
    v.emplace_back(Vec{1.0}, Mat::identity(1));
    return v;
  }()));
  CHECK_THROWS(LogisticMixture(Vec{1.0}, {Vec{0.0}}, {Vec{-0.5}}));
  CHECK_THROWS(Ring(0.0, 1.0));
  auto d = make_std_gaussian(1);
  CHECK_THROWS(sample_n(*d, 0, 1));
}
