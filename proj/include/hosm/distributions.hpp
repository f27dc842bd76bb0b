#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "hosm/linalg.hpp"
#include "hosm/rng.hpp"

namespace hosm {

struct ScoreEval {
  double log_density = 0.0;
  Vec s1;   // gradient of log density
  Mat s2;   // Hessian of log density, symmetric
};

// Sampleable density with closed-form log-density, first- and second-order
// scores. These serve as ground-truth oracles everywhere in the project.
class Density {
 public:
  virtual ~Density() = default;
  virtual int dim() const = 0;
  virtual std::string kind() const = 0;
  virtual Vec sample(Rng& rng) const = 0;
  virtual double log_density(const Vec& x) const = 0;
  virtual Vec score1(const Vec& x) const = 0;
  virtual Mat score2(const Vec& x) const = 0;
  virtual ScoreEval scores(const Vec& x) const;
  // Exact density of x + sigma*z, z ~ N(0, I); null when no closed form exists.
  virtual std::unique_ptr<Density> noisy(double sigma) const { (void)sigma; return nullptr; }
  virtual std::unique_ptr<Density> clone() const = 0;
};

class Gaussian final : public Density {
 public:
  Gaussian(Vec mu, Mat cov);
  int dim() const override { return static_cast<int>(mu_.size()); }
  std::string kind() const override { return "gaussian"; }
  Vec sample(Rng& rng) const override;
  double log_density(const Vec& x) const override;
  Vec score1(const Vec& x) const override;
  Mat score2(const Vec& x) const override;
  std::unique_ptr<Density> noisy(double sigma) const override;
  std::unique_ptr<Density> clone() const override { return std::make_unique<Gaussian>(*this); }

  const Vec& mean() const { return mu_; }
  const Mat& cov() const { return cov_; }

 private:
  Vec mu_;
  Mat cov_;
  Cholesky chol_;
  Mat prec_;        // cov^-1
  double log_norm_; // -0.5*(D log 2pi + log det cov)
};

// Finite mixture of Gaussians; covers the two-mode target and the 2-d
// cluster grids. Scores use responsibilities computed with log-sum-exp.
class GaussianMixture final : public Density {
 public:
  GaussianMixture(Vec weights, std::vector<Gaussian> components);
  int dim() const override { return components_.front().dim(); }
  std::string kind() const override { return "gaussian-mixture"; }
  Vec sample(Rng& rng) const override;
  double log_density(const Vec& x) const override;
  Vec score1(const Vec& x) const override;
  Mat score2(const Vec& x) const override;
  ScoreEval scores(const Vec& x) const override;
  std::unique_ptr<Density> noisy(double sigma) const override;
  std::unique_ptr<Density> clone() const override { return std::make_unique<GaussianMixture>(*this); }

  int n_components() const { return static_cast<int>(components_.size()); }
  const Gaussian& component(int k) const { return components_[static_cast<std::size_t>(k)]; }
  const Vec& weights() const { return weights_; }

 private:
  Vec responsibilities(const Vec& x, double* logp) const;
  Vec weights_;
  Vec log_weights_;
  std::vector<Gaussian> components_;
};

// Mixture of factorized logistics: component k has per-dimension location
// loc[k][d] and scale s[k][d]; dimensions are independent within a component.
class LogisticMixture final : public Density {
 public:
  LogisticMixture(Vec weights, std::vector<Vec> locs, std::vector<Vec> scales);
  int dim() const override { return static_cast<int>(locs_.front().size()); }
  std::string kind() const override { return "mixture-logistics"; }
  Vec sample(Rng& rng) const override;
  double log_density(const Vec& x) const override;
  Vec score1(const Vec& x) const override;
  Mat score2(const Vec& x) const override;
  ScoreEval scores(const Vec& x) const override;
  std::unique_ptr<Density> clone() const override { return std::make_unique<LogisticMixture>(*this); }

 private:
  // per-component log density and per-dimension score pieces
  double comp_log_density(int k, const Vec& x) const;
  Vec weights_, log_weights_;
  std::vector<Vec> locs_, scales_;
};

// 2-d ring: p(x) = exp(-(||x|| - radius)^2 / (2 width^2)) / Z.
class Ring final : public Density {
 public:
  Ring(double radius, double width);
  int dim() const override { return 2; }
  std::string kind() const override { return "ring"; }
  Vec sample(Rng& rng) const override;
  double log_density(const Vec& x) const override;
  Vec score1(const Vec& x) const override;
  Mat score2(const Vec& x) const override;
  std::unique_ptr<Density> clone() const override { return std::make_unique<Ring>(*this); }

 private:
  double radius_, width_, log_norm_;
};

// Factories for the toy targets used in the experiments.
std::unique_ptr<Density> make_std_gaussian(int dim);
std::unique_ptr<Density> make_two_mode_gaussian(const Vec& mu1, const Vec& mu2, const Mat& cov);
// Checker-style grid of small isotropic blobs on the cells of an n x n grid
// where (i + j) is even.
std::unique_ptr<Density> make_cluster_grid(int n, double spacing, double blob_std);
// Seeded generators for the high-dimensional benchmark families.
std::unique_ptr<Density> make_random_gaussian(int dim, double cond_max, std::uint64_t seed);
std::unique_ptr<Density> make_random_logistic_mixture(int dim, int components, std::uint64_t seed,
                                                      double loc_range = 2.0, double scale_min = 0.3,
                                                      double scale_max = 0.8);

// n iid draws, reproducible from the seed.
std::vector<Vec> sample_n(const Density& dist, int n, std::uint64_t seed);

// x_tilde = x + sigma z with z ~ N(0, I); returns (x_tilde, z).
std::pair<Vec, Vec> perturb(const Vec& x, double sigma, Rng& rng);

// Exact density of the sigma-smoothed distribution, or null if unavailable
// (closed forms exist for Gaussians and Gaussian mixtures only).
std::unique_ptr<Density> noisy_density(const Density& base, double sigma);

}  // namespace hosm
