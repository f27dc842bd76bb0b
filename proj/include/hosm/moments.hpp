#pragma once

#include <functional>

#include "hosm/linalg.hpp"

namespace hosm {

// Posterior-moment identities for x | x_tilde under q(x_tilde | x) = N(x, sigma^2 I).
// All score arguments are scores of the *noisy* marginal.

// E[x | xt] = xt + sigma^2 s1(xt)
Vec tweedie_mean(const Vec& s1, const Vec& xt, double sigma);

// E[x x^T | xt] = xt xt^T + sigma^2 xt s1^T + sigma^2 s1 xt^T
//              + sigma^4 s2 + sigma^4 s1 s1^T + sigma^2 I
// Throws if s2 is asymmetric beyond 1e-8.
Mat posterior_second_moment(const Vec& s1, const Mat& s2, const Vec& xt, double sigma);

// Cov[x | xt] = sigma^4 s2 + sigma^2 I (symmetric).
Mat posterior_cov(const Mat& s2, double sigma);

// Flat tensor of shape D^order, row-major over (i1, ..., i_order).
struct Tensor {
  int dim = 0;
  int order = 0;
  Vec a;

  static Tensor zeros(int dim, int order);
  std::size_t flat_size() const { return a.size(); }
};

// E[(x)^(n) | xt] via the recursion
//   M_1 = tweedie_mean, M_n = sigma^2 d/dxt M_{n-1} + sigma^2 M_{n-1} (x) (s1 + xt/sigma^2),
// with the derivative taken by central finite differences over the recursively
// evaluated lower moment (oracle-grade path; step fd_step). noisy_s1 must
// return the first-order score of the noisy marginal at any point.
// Orders above 3 are rejected unless allow_high_order is set.
Tensor moment_recursion(int order, const Vec& xt, double sigma,
                        const std::function<Vec(const Vec&)>& noisy_s1,
                        bool allow_high_order = false, double fd_step = 1e-4);

}  // namespace hosm
