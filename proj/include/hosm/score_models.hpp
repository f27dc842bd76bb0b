#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "hosm/checkpoint.hpp"
#include "hosm/linalg.hpp"
#include "hosm/mlp.hpp"
#include "hosm/parallel.hpp"

namespace hosm {

enum class SecondOrderMode { full, diag_only };

// Architecture of a score model pair; fixes the flat parameter layout.
// s1: dim -> ... -> dim, alpha: dim -> ... -> dim,
// beta (full mode only): dim -> ... -> dim*rank.
struct PairSpec {
  int dim = 0;
  int s1_hidden = 128;
  int s2_hidden = 32;
  int s1_layers = 3;  // number of weight layers
  int s2_layers = 3;
  int rank = 0;       // 0 -> min(20, dim)
  SecondOrderMode mode = SecondOrderMode::full;
  bool with_second = true;

  int effective_rank() const { return rank > 0 ? rank : std::min(20, dim); }
  std::vector<int> s1_dims() const;
  std::vector<int> alpha_dims() const;
  std::vector<int> beta_dims() const;
  std::size_t param_total() const;
};

struct FirstOrderModel {
  Mlp net;
};

struct SecondOrderModel {
  Mlp alpha_net;
  Mlp beta_net;  // unused in diag_only mode
  int rank = 0;
  SecondOrderMode mode = SecondOrderMode::full;
};

struct ScoreModelPair {
  PairSpec spec;
  FirstOrderModel first;
  SecondOrderModel second;
  double sigma_train = 0.0;
};

ScoreModelPair make_pair(const PairSpec& spec, std::uint64_t seed);

// Flat parameter block: s1 layers, then alpha, then beta (when present).
Vec flatten_params(const ScoreModelPair& pair);
void unflatten_params(ScoreModelPair& pair, const Vec& theta);

Vec eval_s1(const FirstOrderModel& m, const Vec& x);
// Full mode: alpha diag + beta beta^T, exactly symmetric by construction.
// Throws when a full matrix is requested from a diag-only model.
Mat eval_s2(const SecondOrderModel& m, const Vec& x);
// diag(s2): alpha in diag mode, alpha + rowwise ||beta||^2 in full mode.
Vec eval_s2_diag(const SecondOrderModel& m, const Vec& x);
// Low-rank factors without materializing the D x D product.
struct SecondOrderFactors {
  Vec alpha;
  Mat beta;  // dim x rank; empty in diag mode
};
SecondOrderFactors eval_s2_factors(const SecondOrderModel& m, const Vec& x);

// Batch evaluation; parallel results are bit-identical to sequential ones.
std::vector<Vec> eval_s1_batch(const FirstOrderModel& m, const std::vector<Vec>& xs, Exec exec);

Checkpoint pair_to_checkpoint(const ScoreModelPair& pair);
ScoreModelPair pair_from_checkpoint(const Checkpoint& ck);

}  // namespace hosm
