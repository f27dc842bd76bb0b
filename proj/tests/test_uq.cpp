#include <doctest.h>

#include <cmath>

#include "hosm/distributions.hpp"
#include "hosm/uq.hpp"
#include "oracles.hpp"

using namespace hosm;

TEST_CASE("zero scores give mean = xt and cov = sigma^2 I") {
  Vec xt{1.0, -2.0};
  PosteriorSummary s = denoise_with_uq_scores(Vec{0.0, 0.0}, Mat(2, 2), xt, 0.5);
  CHECK(s.mean == xt);
  CHECK(s.cov(0, 0) == doctest::Approx(0.25));
  CHECK(s.cov(1, 1) == doctest::Approx(0.25));
  CHECK(s.cov(0, 1) == doctest::Approx(0.0));
  CHECK(s.diag[0] == doctest::Approx(0.25));
}

TEST_CASE("analytic standard normal case: mean (1,0), cov I/2") {
  auto base = make_std_gaussian(2);
  auto noisy = noisy_density(*base, 1.0);
  Vec xt{2.0, 0.0};
  const ScoreEval e = noisy->scores(xt);
  PosteriorSummary s = denoise_with_uq_scores(e.s1, e.s2, xt, 1.0);
  CHECK(s.mean[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.mean[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s.cov(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s.cov(1, 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("two-mode posterior variance is larger at the midpoint than at a mode") {
  auto base = make_two_mode_gaussian({3.0}, {-3.0}, Mat::identity(1));
  const double sigma = 1.0;
  auto noisy = noisy_density(*base, sigma);
  auto var_at = [&](double xt) {
    const ScoreEval e = noisy->scores(Vec{xt});
    return denoise_with_uq_scores(e.s1, e.s2, Vec{xt}, sigma).cov(0, 0);
  };
  CHECK(var_at(0.0) > var_at(3.0));

  // quadrature oracle confirms the ordering
  auto log_prior = [&](double x) { return base->log_density(Vec{x}); };
  auto quad_var = [&](double xt) {
    const double m1 = oracle::posterior_moment_1d(log_prior, xt, sigma, 1);
    const double m2 = oracle::posterior_moment_1d(log_prior, xt, sigma, 2);
    return m2 - m1 * m1;
  };
  CHECK(quad_var(0.0) > quad_var(3.0));
  // and matches the score-based covariance
  CHECK(oracle::rel_err(var_at(0.0), quad_var(0.0)) < 1e-3);
  CHECK(oracle::rel_err(var_at(3.0), quad_var(3.0)) < 1e-3);
}

TEST_CASE("trace of the posterior covariance grows with sigma on gaussian bases") {
  auto base = make_std_gaussian(3);
  Vec xt{0.5, -0.5, 1.0};
  double prev = 0.0;
  for (double sigma : {0.1, 0.3, 0.5, 1.0, 2.0}) {
    auto noisy = noisy_density(*base, sigma);
    const ScoreEval e = noisy->scores(xt);
    PosteriorSummary s = denoise_with_uq_scores(e.s1, e.s2, xt, sigma);
    double tr = 0.0;
    for (double d : s.diag) tr += d;
    CHECK(tr > prev);
    prev = tr;
  }
}

TEST_CASE("eigvecs_topk on simple matrices") {
  Mat d = Mat::diag(Vec{3.0, 2.0, 1.0});
  auto pairs = eigvecs_topk(d, 2);
  CHECK(pairs[0].value == doctest::Approx(3.0));
  CHECK(pairs[1].value == doctest::Approx(2.0));
  CHECK(std::fabs(pairs[0].vector[0]) == doctest::Approx(1.0));
  CHECK(std::fabs(pairs[1].vector[1]) == doctest::Approx(1.0));

  const double r = 1.0 / std::sqrt(2.0);
  Mat bbT = outer({r, r}, {r, r});
  auto p2 = eigvecs_topk(bbT, 1);
  CHECK(p2[0].value == doctest::Approx(1.0));
  CHECK(std::fabs(p2[0].vector[0] * r + p2[0].vector[1] * r) == doctest::Approx(1.0));

  Mat bad = Mat::identity(2);
  bad(0, 1) = 1e-3;
  CHECK_THROWS(eigvecs_topk(bad, 1));
  CHECK_THROWS(eigvecs_topk(Mat::identity(2), 3));
}

TEST_CASE("eigvecs_topk with k = D reconstructs a random spd matrix") {
  Rng rng(14);
  Mat S = random_spd(10, 40.0, rng);
  auto pairs = eigvecs_topk(S, 10);
  Mat rec(10, 10);
  for (const auto& p : pairs) {
    CHECK(norm2(p.vector) == doctest::Approx(1.0));
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j)
        rec(i, j) += p.value * p.vector[static_cast<std::size_t>(i)] * p.vector[static_cast<std::size_t>(j)];
  }
  CHECK(max_abs(msub(rec, S)) < 1e-8);
}

TEST_CASE("posterior sampling: moments, degenerate cov, rank support") {
  PosteriorSummary s;
  s.mean = Vec{1.0, -1.0};
  s.cov = Mat(2, 2);

  SUBCASE("zero covariance returns the mean") {
    auto draws = gaussian_posterior_sample(s, 10, 3);
    for (const Vec& d : draws) CHECK(d == s.mean);
  }

  SUBCASE("cov = 0.5 I: sample covariance within 3 percent at 1e5 draws") {
    s.mean = Vec{0.0, 0.0};
    s.cov = mscale(Mat::identity(2), 0.5);
    auto draws = gaussian_posterior_sample(s, 100000, 4);
    Mat emp(2, 2);
    for (const Vec& d : draws)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) emp(i, j) += d[static_cast<std::size_t>(i)] * d[static_cast<std::size_t>(j)];
    for (double& v : emp.a) v /= static_cast<double>(draws.size());
    CHECK(emp(0, 0) == doctest::Approx(0.5).epsilon(0.03));
    CHECK(emp(1, 1) == doctest::Approx(0.5).epsilon(0.03));
    CHECK(std::fabs(emp(0, 1)) < 0.02);
  }

  SUBCASE("rank-1 covariance keeps draws on the mean + span(b) line") {
    const double r = 1.0 / std::sqrt(2.0);
    s.cov = outer({r, r}, {r, r});
    auto draws = gaussian_posterior_sample(s, 200, 5);
    for (const Vec& d : draws) {
      // residual orthogonal to (r, r) must vanish
      const double res = (d[0] - s.mean[0]) - (d[1] - s.mean[1]);
      CHECK(std::fabs(res) < 1e-8);
    }
  }
}

TEST_CASE("denoise_with_uq_scores validates inputs") {
  CHECK_THROWS(denoise_with_uq_scores(Vec{0.0}, Mat(2, 2), Vec{0.0, 0.0}, 0.5));
  Vec bad{std::nan(""), 0.0};
  CHECK_THROWS(denoise_with_uq_scores(bad, Mat(2, 2), Vec{0.0, 0.0}, 0.5));
}
