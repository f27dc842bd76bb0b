#include "hosm/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hosm {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double logsumexp(const Vec& v) {
  double m = v[0];
  for (double x : v) m = std::max(m, x);
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// numerically stable logistic sigmoid
double sigmoid(double t) {
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double softplus(double t) {  // log(1 + e^t)
  if (t > 30.0) return t;
  if (t < -30.0) return std::exp(t);
  return std::log1p(std::exp(t));
}
}  // namespace

ScoreEval Density::scores(const Vec& x) const {
  ScoreEval e;
  e.log_density = log_density(x);
  e.s1 = score1(x);
  e.s2 = score2(x);
  return e;
}

// ---------------------------------------------------------------------------
// Gaussian

Gaussian::Gaussian(Vec mu, Mat cov) : mu_(std::move(mu)), cov_(std::move(cov)) {
  const int d = static_cast<int>(mu_.size());
  if (cov_.rows != d || cov_.cols != d) linalg_fail("Gaussian: covariance shape mismatch");
  if (max_asymmetry(cov_) > 1e-10) linalg_fail("Gaussian: covariance must be symmetric");
  chol_ = cholesky(cov_);
  prec_ = chol_inverse(chol_);
  log_norm_ = -0.5 * (d * kLog2Pi + chol_.log_det);
}

Vec Gaussian::sample(Rng& rng) const {
  const int d = dim();
  Vec g = rng.gaussian_vec(d);
  Vec x = mu_;
  for (int i = 0; i < d; ++i) {
    double s = 0.0;
    for (int j = 0; j <= i; ++j) s += chol_.L(i, j) * g[static_cast<std::size_t>(j)];
    x[static_cast<std::size_t>(i)] += s;
  }
  return x;
}

double Gaussian::log_density(const Vec& x) const {
  if (static_cast<int>(x.size()) != dim()) linalg_fail("Gaussian: dimension mismatch");
  Vec d = vsub(x, mu_);
  Vec pd = matvec(prec_, d);
  return log_norm_ - 0.5 * dot(d, pd);
}

Vec Gaussian::score1(const Vec& x) const {
  Vec d = vsub(x, mu_);
  return vscale(matvec(prec_, d), -1.0);
}

Mat Gaussian::score2(const Vec& x) const {
  (void)x;
  return mscale(prec_, -1.0);
}

std::unique_ptr<Density> Gaussian::noisy(double sigma) const {
  Mat c = cov_;
  for (int i = 0; i < c.rows; ++i) c(i, i) += sigma * sigma;
  return std::make_unique<Gaussian>(mu_, std::move(c));
}

// ---------------------------------------------------------------------------
// GaussianMixture

GaussianMixture::GaussianMixture(Vec weights, std::vector<Gaussian> components)
    : weights_(std::move(weights)), components_(std::move(components)) {
  if (weights_.empty() || weights_.size() != components_.size())
    linalg_fail("GaussianMixture: weights/components mismatch");
  double sum = 0.0;
  for (double w : weights_) {
    if (w <= 0.0) linalg_fail("GaussianMixture: weights must be positive");
    sum += w;
  }
  log_weights_.resize(weights_.size());
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    weights_[k] /= sum;
    log_weights_[k] = std::log(weights_[k]);
  }
  for (const Gaussian& g : components_)
    if (g.dim() != components_.front().dim()) linalg_fail("GaussianMixture: dimension mismatch");
}

Vec GaussianMixture::sample(Rng& rng) const {
  double u = rng.uniform();
  std::size_t k = 0;
  double acc = 0.0;
  for (; k + 1 < weights_.size(); ++k) {
    acc += weights_[k];
    if (u < acc) break;
  }
  return components_[k].sample(rng);
}

Vec GaussianMixture::responsibilities(const Vec& x, double* logp) const {
  Vec lw(weights_.size());
  for (std::size_t k = 0; k < weights_.size(); ++k) lw[k] = log_weights_[k] + components_[k].log_density(x);
  const double lse = logsumexp(lw);
  if (logp != nullptr) *logp = lse;
  Vec r(weights_.size());
  for (std::size_t k = 0; k < weights_.size(); ++k) r[k] = std::exp(lw[k] - lse);
  return r;
}

double GaussianMixture::log_density(const Vec& x) const {
  double lp = 0.0;
  responsibilities(x, &lp);
  return lp;
}

Vec GaussianMixture::score1(const Vec& x) const { return scores(x).s1; }
Mat GaussianMixture::score2(const Vec& x) const { return scores(x).s2; }

ScoreEval GaussianMixture::scores(const Vec& x) const {
  ScoreEval e;
  const Vec r = responsibilities(x, &e.log_density);
  const int d = dim();
  e.s1.assign(static_cast<std::size_t>(d), 0.0);
  e.s2 = Mat(d, d);
  //  s1 = sum_k r_k s1_k
  //  s2 = sum_k r_k (s2_k + s1_k s1_k^T) - s1 s1^T
  std::vector<Vec> comp_s1(weights_.size());
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    comp_s1[k] = components_[k].score1(x);
    axpy(r[k], comp_s1[k], e.s1);
  }
  // fill the upper triangle, then mirror: symmetry holds bitwise
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    const Mat s2k = components_[k].score2(x);
    const Vec& s1k = comp_s1[k];
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j)
        e.s2(i, j) += r[k] * (s2k(i, j) + s1k[static_cast<std::size_t>(i)] * s1k[static_cast<std::size_t>(j)]);
  }
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      e.s2(i, j) -= e.s1[static_cast<std::size_t>(i)] * e.s1[static_cast<std::size_t>(j)];
      e.s2(j, i) = e.s2(i, j);
    }
  return e;
}

std::unique_ptr<Density> GaussianMixture::noisy(double sigma) const {
  std::vector<Gaussian> comps;
  comps.reserve(components_.size());
  for (const Gaussian& g : components_) {
    Mat c = g.cov();
    for (int i = 0; i < c.rows; ++i) c(i, i) += sigma * sigma;
    comps.emplace_back(g.mean(), std::move(c));
  }
  return std::make_unique<GaussianMixture>(weights_, std::move(comps));
}

// ---------------------------------------------------------------------------
// LogisticMixture

LogisticMixture::LogisticMixture(Vec weights, std::vector<Vec> locs, std::vector<Vec> scales)
    : weights_(std::move(weights)), locs_(std::move(locs)), scales_(std::move(scales)) {
  if (weights_.empty() || weights_.size() != locs_.size() || weights_.size() != scales_.size())
    linalg_fail("LogisticMixture: component count mismatch");
  double sum = 0.0;
  for (double w : weights_) {
    if (w <= 0.0) linalg_fail("LogisticMixture: weights must be positive");
    sum += w;
  }
  log_weights_.resize(weights_.size());
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    weights_[k] /= sum;
    log_weights_[k] = std::log(weights_[k]);
  }
  const std::size_t d = locs_.front().size();
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    if (locs_[k].size() != d || scales_[k].size() != d) linalg_fail("LogisticMixture: dimension mismatch");
    for (double s : scales_[k])
      if (s <= 0.0) linalg_fail("LogisticMixture: scales must be positive");
  }
}

double LogisticMixture::comp_log_density(int k, const Vec& x) const {
  const Vec& loc = locs_[static_cast<std::size_t>(k)];
  const Vec& sc = scales_[static_cast<std::size_t>(k)];
  double lp = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double t = (x[d] - loc[d]) / sc[d];
    // log pdf of Logistic(loc, s): -t - log s - 2 log(1 + e^-t)
    lp += -t - std::log(sc[d]) - 2.0 * softplus(-t);
  }
  return lp;
}

Vec LogisticMixture::sample(Rng& rng) const {
  double u = rng.uniform();
  std::size_t k = 0;
  double acc = 0.0;
  for (; k + 1 < weights_.size(); ++k) {
    acc += weights_[k];
    if (u < acc) break;
  }
  const Vec& loc = locs_[k];
  const Vec& sc = scales_[k];
  Vec x(loc.size());
  for (std::size_t d = 0; d < x.size(); ++d) {
    // inverse CDF; clamp away from {0, 1}
    const double q = std::min(std::max(rng.uniform(), 1e-15), 1.0 - 1e-15);
    x[d] = loc[d] + sc[d] * std::log(q / (1.0 - q));
  }
  return x;
}

double LogisticMixture::log_density(const Vec& x) const {
  Vec lw(weights_.size());
  for (std::size_t k = 0; k < weights_.size(); ++k) lw[k] = log_weights_[k] + comp_log_density(static_cast<int>(k), x);
  return logsumexp(lw);
}

Vec LogisticMixture::score1(const Vec& x) const { return scores(x).s1; }
Mat LogisticMixture::score2(const Vec& x) const { return scores(x).s2; }

ScoreEval LogisticMixture::scores(const Vec& x) const {
  const std::size_t K = weights_.size();
  const int d = dim();
  Vec lw(K);
  for (std::size_t k = 0; k < K; ++k) lw[k] = log_weights_[k] + comp_log_density(static_cast<int>(k), x);
  ScoreEval e;
  e.log_density = logsumexp(lw);
  Vec r(K);
  for (std::size_t k = 0; k < K; ++k) r[k] = std::exp(lw[k] - e.log_density);

  e.s1.assign(static_cast<std::size_t>(d), 0.0);
  e.s2 = Mat(d, d);
  std::vector<Vec> comp_s1(K, Vec(static_cast<std::size_t>(d)));
  std::vector<Vec> comp_s2diag(K, Vec(static_cast<std::size_t>(d)));
  for (std::size_t k = 0; k < K; ++k) {
    for (int i = 0; i < d; ++i) {
      const double s = scales_[k][static_cast<std::size_t>(i)];
      const double t = (x[static_cast<std::size_t>(i)] - locs_[k][static_cast<std::size_t>(i)]) / s;
      const double sg = sigmoid(t);
      comp_s1[k][static_cast<std::size_t>(i)] = (1.0 - 2.0 * sg) / s;
      comp_s2diag[k][static_cast<std::size_t>(i)] = -2.0 * sg * (1.0 - sg) / (s * s);
    }
    axpy(r[k], comp_s1[k], e.s1);
  }
  // fill the upper triangle, then mirror: symmetry holds bitwise
  for (std::size_t k = 0; k < K; ++k) {
    for (int i = 0; i < d; ++i) {
      e.s2(i, i) += r[k] * comp_s2diag[k][static_cast<std::size_t>(i)];
      for (int j = i; j < d; ++j)
        e.s2(i, j) += r[k] * comp_s1[k][static_cast<std::size_t>(i)] * comp_s1[k][static_cast<std::size_t>(j)];
    }
  }
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      e.s2(i, j) -= e.s1[static_cast<std::size_t>(i)] * e.s1[static_cast<std::size_t>(j)];
      e.s2(j, i) = e.s2(i, j);
    }
  return e;
}

// ---------------------------------------------------------------------------
// Ring

Ring::Ring(double radius, double width) : radius_(radius), width_(width) {
  if (radius <= 0.0 || width <= 0.0) linalg_fail("Ring: radius and width must be positive");
  // Z = 2 pi (w^2 e^{-R^2/(2w^2)} + R w sqrt(2 pi) Phi(R/w))
  const double phi = 0.5 * (1.0 + std::erf(radius / (width * std::sqrt(2.0))));
  const double z = 2.0 * M_PI *
                   (width * width * std::exp(-radius * radius / (2.0 * width * width)) +
                    radius * width * std::sqrt(2.0 * M_PI) * phi);
  log_norm_ = -std::log(z);
}

Vec Ring::sample(Rng& rng) const {
  // radial density r * exp(-(r-R)^2/(2w^2)): rejection from N(R, w^2)
  double r = 0.0;
  const double cap = radius_ + 8.0 * width_;
  for (;;) {
    const double cand = radius_ + width_ * rng.gaussian();
    if (cand <= 0.0) continue;
    if (rng.uniform() < cand / cap) {
      r = cand;
      break;
    }
  }
  const double a = 2.0 * M_PI * rng.uniform();
  return Vec{r * std::cos(a), r * std::sin(a)};
}

double Ring::log_density(const Vec& x) const {
  if (x.size() != 2) linalg_fail("Ring: dimension mismatch");
  const double r = std::sqrt(x[0] * x[0] + x[1] * x[1]);
  const double d = r - radius_;
  return log_norm_ - d * d / (2.0 * width_ * width_);
}

Vec Ring::score1(const Vec& x) const {
  const double r = std::sqrt(x[0] * x[0] + x[1] * x[1]);
  if (r < 1e-12) linalg_fail("Ring: score undefined at the origin");
  const double g = -(r - radius_) / (width_ * width_);
  return Vec{g * x[0] / r, g * x[1] / r};
}

Mat Ring::score2(const Vec& x) const {
  const double r = std::sqrt(x[0] * x[0] + x[1] * x[1]);
  if (r < 1e-12) linalg_fail("Ring: score undefined at the origin");
  const double g = -(r - radius_) / (width_ * width_);
  const double gp = -1.0 / (width_ * width_);
  Mat h(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double uij = x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(j)] / (r * r);
      h(i, j) = (gp - g / r) * uij + (i == j ? g / r : 0.0);
    }
  return h;
}

// ---------------------------------------------------------------------------
// factories

std::unique_ptr<Density> make_std_gaussian(int dim) {
  return std::make_unique<Gaussian>(Vec(static_cast<std::size_t>(dim), 0.0), Mat::identity(dim));
}

std::unique_ptr<Density> make_two_mode_gaussian(const Vec& mu1, const Vec& mu2, const Mat& cov) {
  std::vector<Gaussian> comps;
  comps.emplace_back(mu1, cov);
  comps.emplace_back(mu2, cov);
  return std::make_unique<GaussianMixture>(Vec{0.5, 0.5}, std::move(comps));
}

std::unique_ptr<Density> make_cluster_grid(int n, double spacing, double blob_std) {
  std::vector<Gaussian> comps;
  const double off = 0.5 * spacing * (n - 1);
  Mat cov = mscale(Mat::identity(2), blob_std * blob_std);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if ((i + j) % 2 == 0) comps.emplace_back(Vec{i * spacing - off, j * spacing - off}, cov);
  Vec w(comps.size(), 1.0);
  return std::make_unique<GaussianMixture>(std::move(w), std::move(comps));
}

std::unique_ptr<Density> make_random_gaussian(int dim, double cond_max, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, 0xC0FFEE);
  Mat cov = random_spd(dim, cond_max, rng);
  Vec mu(static_cast<std::size_t>(dim));
  for (double& v : mu) v = rng.gaussian();
  return std::make_unique<Gaussian>(std::move(mu), std::move(cov));
}

std::unique_ptr<Density> make_random_logistic_mixture(int dim, int components, std::uint64_t seed,
                                                      double loc_range, double scale_min, double scale_max) {
  Rng rng = Rng::stream(seed, 0x10C157);
  Vec w(static_cast<std::size_t>(components));
  for (double& v : w) v = 0.5 + rng.uniform();
  std::vector<Vec> locs, scales;
  for (int k = 0; k < components; ++k) {
    Vec loc(static_cast<std::size_t>(dim)), sc(static_cast<std::size_t>(dim));
    for (int d = 0; d < dim; ++d) {
      loc[static_cast<std::size_t>(d)] = (2.0 * rng.uniform() - 1.0) * loc_range;
      sc[static_cast<std::size_t>(d)] = scale_min + rng.uniform() * (scale_max - scale_min);
    }
    locs.push_back(std::move(loc));
    scales.push_back(std::move(sc));
  }
  return std::make_unique<LogisticMixture>(std::move(w), std::move(locs), std::move(scales));
}

std::vector<Vec> sample_n(const Density& dist, int n, std::uint64_t seed) {
  if (n < 1) linalg_fail("sample_n: n must be >= 1");
  Rng rng = Rng::stream(seed, 0x5A11);
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(dist.sample(rng));
  return out;
}

std::pair<Vec, Vec> perturb(const Vec& x, double sigma, Rng& rng) {
  if (sigma <= 0.0) linalg_fail("perturb: sigma must be positive");
  Vec z = rng.gaussian_vec(static_cast<int>(x.size()));
  Vec xt(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) xt[i] = x[i] + sigma * z[i];
  return {std::move(xt), std::move(z)};
}

std::unique_ptr<Density> noisy_density(const Density& base, double sigma) {
  if (sigma <= 0.0) linalg_fail("noisy_density: sigma must be positive");
  return base.noisy(sigma);
}

}  // namespace hosm
