#include "hosm/uq.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hosm {

PosteriorSummary denoise_with_uq_scores(const Vec& s1, const Mat& s2, const Vec& xt, double sigma, int top_k) {
  const int d = static_cast<int>(xt.size());
  if (static_cast<int>(s1.size()) != d || s2.rows != d || s2.cols != d)
    throw std::invalid_argument("denoise_with_uq: dimension mismatch");
  if (!all_finite(s1) || !all_finite(s2)) throw std::invalid_argument("denoise_with_uq: non-finite scores");
  if (top_k < 0 || top_k > d) top_k = d;

  PosteriorSummary out;
  out.mean = tweedie_mean(s1, xt, sigma);

  // symmetrize, eigendecompose, clip negative eigenvalues to zero
  Mat c = posterior_cov(s2, sigma);
  SymEig eig = sym_eig(c, 1e30);  // covariance already symmetrized
  out.pre_projection_spectrum = eig.values;
  Vec clipped(eig.values);
  for (double& v : clipped) v = std::max(v, 0.0);

  out.cov = Mat(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) s += clipped[static_cast<std::size_t>(k)] * eig.vectors(i, k) * eig.vectors(j, k);
      out.cov(i, j) = s;
      out.cov(j, i) = s;
    }
  out.diag.resize(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) out.diag[static_cast<std::size_t>(i)] = out.cov(i, i);
  for (int k = 0; k < top_k; ++k) {
    EigenPair p;
    p.value = clipped[static_cast<std::size_t>(k)];
    p.vector.resize(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) p.vector[static_cast<std::size_t>(i)] = eig.vectors(i, k);
    out.top_eigen.push_back(std::move(p));
  }
  return out;
}

PosteriorSummary denoise_with_uq(const ScoreModelPair& pair, const Vec& xt, double sigma, int top_k) {
  const Vec s1 = eval_s1(pair.first, xt);
  const Mat s2 = eval_s2(pair.second, xt);
  return denoise_with_uq_scores(s1, s2, xt, sigma, top_k);
}

std::vector<EigenPair> eigvecs_topk(const Mat& cov, int k) {
  if (cov.rows != cov.cols) throw std::invalid_argument("eigvecs_topk: matrix must be square");
  if (k < 1 || k > cov.rows) throw std::invalid_argument("eigvecs_topk: k out of range");
  SymEig eig = sym_eig(cov, 1e-8);
  std::vector<EigenPair> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    EigenPair p;
    p.value = eig.values[static_cast<std::size_t>(j)];
    p.vector.resize(static_cast<std::size_t>(cov.rows));
    for (int i = 0; i < cov.rows; ++i) p.vector[static_cast<std::size_t>(i)] = eig.vectors(i, j);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Vec> gaussian_posterior_sample(const PosteriorSummary& summary, int n, std::uint64_t seed) {
  const int d = static_cast<int>(summary.mean.size());
  SymEig eig = sym_eig(summary.cov, 1e-8);
  Vec root(eig.values.size());
  for (std::size_t i = 0; i < root.size(); ++i) root[i] = std::sqrt(std::max(eig.values[i], 0.0));

  Rng rng = Rng::stream(seed, 0x9057);
  std::vector<Vec> draws;
  draws.reserve(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    Vec g = rng.gaussian_vec(d);
    Vec x = summary.mean;
    for (int k = 0; k < d; ++k) {
      const double a = root[static_cast<std::size_t>(k)] * g[static_cast<std::size_t>(k)];
      if (a == 0.0) continue;
      for (int i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] += a * eig.vectors(i, k);
    }
    draws.push_back(std::move(x));
  }
  return draws;
}

}  // namespace hosm
