// Test-only oracles, independent of the library implementation paths they
// check: finite differences, quadrature posterior moments, a hand-rolled MLP
// forward, and Gaussian conditioning closed forms.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "hosm/linalg.hpp"

namespace oracle {

using hosm::Mat;
using hosm::Vec;

inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-5) {
  Vec g(x.size());
  Vec xp = x, xm = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return g;
}

inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double h = 1e-5) {
  const Vec f0 = f(x);
  Mat jac(static_cast<int>(f0.size()), static_cast<int>(x.size()));
  Vec xp = x, xm = x;
  for (std::size_t j = 0; j < x.size(); ++j) {
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    const Vec fp = f(xp);
    const Vec fm = f(xm);
    for (std::size_t i = 0; i < f0.size(); ++i) jac(static_cast<int>(i), static_cast<int>(j)) = (fp[i] - fm[i]) / (2.0 * h);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return jac;
}

// max |a-b| / max(1, |a|, |b|)
inline double rel_err(double a, double b) {
  return std::fabs(a - b) / std::max({1.0, std::fabs(a), std::fabs(b)});
}

inline double max_rel_err(const Vec& a, const Vec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, rel_err(a[i], b[i]));
  return m;
}

inline double max_rel_err(const Mat& a, const Mat& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.a.size(); ++i) m = std::max(m, rel_err(a.a[i], b.a[i]));
  return m;
}

// Simpson-rule posterior moment E[x^order | xt] for a 1-d prior given by its
// log density, with Gaussian noise of scale sigma.
inline double posterior_moment_1d(const std::function<double(double)>& log_prior, double xt, double sigma,
                                  int order, double lo = -30.0, double hi = 30.0, int n = 60000) {
  auto weight = [&](double x) {
    const double d = xt - x;
    return std::exp(log_prior(x) - d * d / (2.0 * sigma * sigma));
  };
  const double h = (hi - lo) / n;
  double num = 0.0, den = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + i * h;
    const double coef = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    const double w = coef * weight(x);
    den += w;
    num += w * std::pow(x, order);
  }
  return num / den;
}

// Closed-form Gaussian conditioning: prior N(mu, Sigma), observation
// xt = x + sigma z. Posterior mean and covariance.
inline Vec gaussian_posterior_mean(const Vec& mu, const Mat& Sigma, const Vec& xt, double sigma) {
  Mat S = Sigma;
  for (int i = 0; i < S.rows; ++i) S(i, i) += sigma * sigma;
  auto ch = hosm::cholesky(S);
  Vec w = hosm::chol_solve(ch, hosm::vsub(xt, mu));
  Vec m = mu;
  Vec Sw = hosm::matvec(Sigma, w);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] += Sw[i];
  return m;
}

inline Mat gaussian_posterior_cov(const Mat& Sigma, double sigma) {
  Mat S = Sigma;
  for (int i = 0; i < S.rows; ++i) S(i, i) += sigma * sigma;
  auto ch = hosm::cholesky(S);
  Mat inv = hosm::chol_inverse(ch);
  // Sigma - Sigma (Sigma + s^2 I)^-1 Sigma
  Mat t = hosm::matmul(Sigma, hosm::matmul(inv, Sigma));
  return hosm::msub(Sigma, t);
}

// Independent re-implementation of the tanh MLP forward pass.
inline Vec mlp_forward_by_hand(const std::vector<Mat>& w, const std::vector<Vec>& b, const Vec& input) {
  Vec h = input;
  for (std::size_t l = 0; l < w.size(); ++l) {
    Vec next(static_cast<std::size_t>(w[l].rows), 0.0);
    for (int i = 0; i < w[l].rows; ++i) {
      double s = b[l][static_cast<std::size_t>(i)];
      for (int j = 0; j < w[l].cols; ++j) s += w[l](i, j) * h[static_cast<std::size_t>(j)];
      next[static_cast<std::size_t>(i)] = (l + 1 == w.size()) ? s : std::tanh(s);
    }
    h = std::move(next);
  }
  return h;
}

}  // namespace oracle
