#include "hosm/moments.hpp"

#include <cmath>
#include <stdexcept>

namespace hosm {

Vec tweedie_mean(const Vec& s1, const Vec& xt, double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("tweedie_mean: sigma must be positive");
  if (s1.size() != xt.size()) throw std::invalid_argument("tweedie_mean: dimension mismatch");
  Vec m(xt);
  axpy(sigma * sigma, s1, m);
  return m;
}

Mat posterior_second_moment(const Vec& s1, const Mat& s2, const Vec& xt, double sigma) {
  const int d = static_cast<int>(xt.size());
  if (s2.rows != d || s2.cols != d || static_cast<int>(s1.size()) != d)
    throw std::invalid_argument("posterior_second_moment: dimension mismatch");
  if (max_asymmetry(s2) > 1e-8) throw std::invalid_argument("posterior_second_moment: s2 is not symmetric");
  const double s2sq = sigma * sigma;
  const double s4 = s2sq * s2sq;
  Mat m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double v = xt[static_cast<std::size_t>(i)] * xt[static_cast<std::size_t>(j)];
      v += s2sq * xt[static_cast<std::size_t>(i)] * s1[static_cast<std::size_t>(j)];
      v += s2sq * s1[static_cast<std::size_t>(i)] * xt[static_cast<std::size_t>(j)];
      v += s4 * s2(i, j);
      v += s4 * s1[static_cast<std::size_t>(i)] * s1[static_cast<std::size_t>(j)];
      if (i == j) v += s2sq;
      m(i, j) = v;
    }
  return m;
}

Mat posterior_cov(const Mat& s2, double sigma) {
  if (s2.rows != s2.cols) throw std::invalid_argument("posterior_cov: s2 must be square");
  const double s2sq = sigma * sigma;
  Mat c = mscale(s2, s2sq * s2sq);
  for (int i = 0; i < c.rows; ++i) c(i, i) += s2sq;
  for (int i = 0; i < c.rows; ++i)
    for (int j = i + 1; j < c.cols; ++j) {
      const double v = 0.5 * (c(i, j) + c(j, i));
      c(i, j) = v;
      c(j, i) = v;
    }
  return c;
}

Tensor Tensor::zeros(int dim, int order) {
  Tensor t;
  t.dim = dim;
  t.order = order;
  std::size_t n = 1;
  for (int k = 0; k < order; ++k) n *= static_cast<std::size_t>(dim);
  t.a.assign(n, 0.0);
  return t;
}

namespace {

Tensor moment_rec(int order, const Vec& y, double sigma,
                  const std::function<Vec(const Vec&)>& noisy_s1, double h) {
  const int d = static_cast<int>(y.size());
  if (order == 1) {
    Tensor t = Tensor::zeros(d, 1);
    t.a = tweedie_mean(noisy_s1(y), y, sigma);
    return t;
  }
  const Tensor low = moment_rec(order - 1, y, sigma, noisy_s1, h);
  Tensor out = Tensor::zeros(d, order);
  const double s2sq = sigma * sigma;

  // trailing factor s1 + y / sigma^2
  Vec tail = noisy_s1(y);
  for (int j = 0; j < d; ++j) tail[static_cast<std::size_t>(j)] += y[static_cast<std::size_t>(j)] / s2sq;

  for (int j = 0; j < d; ++j) {
    Vec yp(y), ym(y);
    yp[static_cast<std::size_t>(j)] += h;
    ym[static_cast<std::size_t>(j)] -= h;
    const Tensor lp = moment_rec(order - 1, yp, sigma, noisy_s1, h);
    const Tensor lm = moment_rec(order - 1, ym, sigma, noisy_s1, h);
    for (std::size_t idx = 0; idx < low.a.size(); ++idx) {
      const double deriv = (lp.a[idx] - lm.a[idx]) / (2.0 * h);
      out.a[idx * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)] =
          s2sq * deriv + s2sq * low.a[idx] * tail[static_cast<std::size_t>(j)];
    }
  }
  return out;
}

}  // namespace

Tensor moment_recursion(int order, const Vec& xt, double sigma,
                        const std::function<Vec(const Vec&)>& noisy_s1,
                        bool allow_high_order, double fd_step) {
  if (order < 1) throw std::invalid_argument("moment_recursion: order must be >= 1");
  if (order > 3 && !allow_high_order)
    throw std::invalid_argument("moment_recursion: orders above 3 need allow_high_order (cost guard)");
  if (sigma <= 0.0) throw std::invalid_argument("moment_recursion: sigma must be positive");
  return moment_rec(order, xt, sigma, noisy_s1, fd_step);
}

}  // namespace hosm
