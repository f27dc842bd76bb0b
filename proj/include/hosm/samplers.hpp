#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hosm/distributions.hpp"
#include "hosm/linalg.hpp"
#include "hosm/parallel.hpp"
#include "hosm/rng.hpp"
#include "hosm/score_models.hpp"

namespace hosm {

enum class SamplerMethod { langevin, ozaki_diag };
enum class ChainInit { gaussian_noise, fixed_point, data_sample };

struct SamplerConfig {
  SamplerMethod method = SamplerMethod::langevin;
  double eps = 0.1;          // step size, > 0
  int iterations = 10000;    // T
  int burn_in = 1000;        // B < T
  int chains = 32;           // C >= 1
  std::uint64_t seed = 0;
  ChainInit init = ChainInit::gaussian_noise;
  double init_scale = 1.0;
  Vec init_point;            // for fixed_point
  bool record_history = true;
};

// What a sampler needs from either a trained pair or an analytic oracle.
struct ScoreSource {
  int dim = 0;
  std::function<Vec(const Vec&)> s1;
  std::function<Vec(const Vec&)> s2_diag;  // empty for Langevin-only sources
  std::function<Vec(Rng&)> draw;           // empty unless data_sample init is available
};

ScoreSource oracle_source(const Density& dist);
ScoreSource model_source(const ScoreModelPair& pair);

struct EssReport {
  Vec per_dimension;
  double min_ess = 0.0;
  std::vector<int> cutoff_lags;
  int chains = 0;
  int retained = 0;  // draws kept per chain
};

struct Divergence {
  int chain = -1;
  int step = -1;
  Vec last_finite;
};

struct ChainState {
  int chains = 0;
  int dim = 0;
  std::vector<Vec> positions;            // final position per chain
  std::vector<std::uint64_t> stream_ids; // RNG stream per chain
  // retained history, [iter][chain] -> coordinates; empty if not recorded
  std::vector<std::vector<Vec>> history;
};

struct RunResult {
  ChainState state;
  EssReport ess;
  long clamp_events = 0;  // positive-curvature clamps in Ozaki steps
  std::optional<Divergence> divergence;
};

// x + (eps/2) s1(x) + sqrt(eps) z
Vec langevin_step(const Vec& x, const std::function<Vec(const Vec&)>& s1, double eps, Rng& rng);

// Coordinate-wise Ozaki discretization with the Hessian diagonal c_i:
//   drift  m_i = (e^{eps c_i} - 1)/c_i * s1_i
//   noise  v_i = (e^{2 eps c_i} - 1)/c_i
// with the Taylor branch m_i = eps(1 + eps c_i / 2) s1_i, v_i = 2 eps (1 + eps c_i)
// for |eps c_i| < 1e-6, and c clamped at 10/eps before exponentiation.
Vec ozaki_diag_step(const Vec& x, const std::function<Vec(const Vec&)>& s1,
                    const std::function<Vec(const Vec&)>& s2_diag, double eps, Rng& rng,
                    long* clamp_events = nullptr);

// Runs config.chains independent chains (parallel across chains, one RNG
// stream per chain, bit-identical to the serial run), drops burn-in, and
// estimates ESS per dimension. Divergence (non-finite coordinate) aborts the
// offending chain and is reported with its step index.
RunResult run_chains(const SamplerConfig& config, const ScoreSource& source, Exec exec = Exec::serial);

// Autocovariance-based ESS with Geyer's initial positive/monotone sequence
// truncation, direct sums up to lag retained/10; min over dimensions drives
// tuning. history[iter][chain] must be rectangular.
EssReport effective_sample_size(const std::vector<std::vector<Vec>>& history);

// Sign flips of coordinate `axis` across all chains; the between-mode
// crossing count for symmetric two-mode targets.
long count_axis_crossings(const std::vector<std::vector<Vec>>& history, int axis = 0);

struct TuneRow {
  double eps = 0.0;
  double min_ess = 0.0;
  bool divergent = false;
  long clamp_events = 0;
};

struct TuneResult {
  double best_eps = 0.0;
  std::vector<TuneRow> table;
};

// Short pilot runs on a step-size grid; picks the non-divergent eps with the
// largest min-ESS. Throws when every grid point diverges.
TuneResult tune_step_size(SamplerMethod method, const ScoreSource& source, const std::vector<double>& grid,
                          const SamplerConfig& pilot, Exec exec = Exec::serial);

}  // namespace hosm
