#pragma once

#include <string>
#include <vector>

#include "hosm/adam.hpp"
#include "hosm/distributions.hpp"
#include "hosm/objectives.hpp"
#include "hosm/score_models.hpp"

namespace hosm {

enum class LrSchedule { constant, cosine };

struct TrainConfig {
  ObjectiveSpec objective;
  int batch = 128;
  int steps = 5000;
  double lr = 1e-3;
  LrSchedule lr_schedule = LrSchedule::constant;
  std::uint64_t seed = 0;
  int s1_hidden = 128;
  int s2_hidden = 32;
  int s1_layers = 3;
  int s2_layers = 3;
  int rank = 0;  // 0 -> min(20, dim)
  int log_every = 50;

  void validate() const;
};

struct LossReport {
  int step = 0;
  double total = 0.0;
  double dsm_term = 0.0;
  double d2sm_term = 0.0;
  double grad_norm = 0.0;
  double wall_time_s = 0.0;  // cumulative; excluded from determinism checks
};

struct TrainResult {
  ScoreModelPair pair;
  std::vector<LossReport> log;
  bool diverged = false;
  int divergence_step = -1;
};

// Minibatch Adam on the selected objective with fresh seeded batches each
// step. On a non-finite loss or gradient the run stops and the last finite
// parameters are kept.
TrainResult train(const Density& data, const TrainConfig& cfg, Exec exec);

void write_train_log_csv(const std::string& path, const std::vector<LossReport>& log);

}  // namespace hosm
