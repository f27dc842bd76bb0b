#pragma once

#include <vector>

#include "hosm/linalg.hpp"
#include "hosm/moments.hpp"
#include "hosm/score_models.hpp"

namespace hosm {

struct EigenPair {
  double value = 0.0;
  Vec vector;
};

// Gaussian approximation of the denoising posterior p(x | x_tilde):
// mean from Tweedie, covariance sigma^4 s2 + sigma^2 I, symmetrized and
// eigenvalue-clipped at zero. The pre-projection spectrum is kept for
// diagnostics.
struct PosteriorSummary {
  Vec mean;
  Mat cov;   // projected, PSD
  Vec diag;  // diagonal of the projected covariance
  std::vector<EigenPair> top_eigen;  // descending
  Vec pre_projection_spectrum;       // descending, before clipping
};

PosteriorSummary denoise_with_uq_scores(const Vec& s1, const Mat& s2, const Vec& xt, double sigma, int top_k = -1);
PosteriorSummary denoise_with_uq(const ScoreModelPair& pair, const Vec& xt, double sigma, int top_k = -1);

// Top-k eigenpairs of a symmetric matrix (unit-norm vectors, descending).
// Throws when the asymmetry exceeds 1e-8.
std::vector<EigenPair> eigvecs_topk(const Mat& cov, int k);

// Draws from N(mean, cov) through the eigendecomposition square root;
// rank-deficient covariances confine draws to the retained eigenspace.
std::vector<Vec> gaussian_posterior_sample(const PosteriorSummary& summary, int n, std::uint64_t seed);

}  // namespace hosm
