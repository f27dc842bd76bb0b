#pragma once

#include <memory>
#include <vector>

#include "hosm/parallel.hpp"
#include "hosm/score_models.hpp"
#include "hosm/tape.hpp"

namespace hosm {

enum class Objective { dsm, d2sm_joint, d2sm_joint_diag };

struct ObjectiveSpec {
  Objective objective = Objective::d2sm_joint;
  double sigma = 0.1;
  double gamma = 1.0;
  bool variance_reduction = false;
};

// One anchor: clean point x and its noise direction z; x_tilde = x + sigma z.
struct BatchSample {
  Vec x;
  Vec z;
};

struct LossTerms {
  double total = 0.0;
  double dsm = 0.0;   // unweighted first-order term
  double d2sm = 0.0;  // second-order term; total = d2sm + gamma * dsm for joint losses
};

// Batch loss + gradient evaluator with replayable per-thread tapes. The batch
// mean and gradient are reduced in a fixed sample order, so serial and
// parallel execution agree bit for bit.
class LossEvaluator {
 public:
  LossEvaluator(const PairSpec& spec, const ObjectiveSpec& objective);
  ~LossEvaluator();
  LossEvaluator(const LossEvaluator&) = delete;
  LossEvaluator& operator=(const LossEvaluator&) = delete;

  // grad (when non-null) receives d(mean loss)/d(theta), theta in the
  // flatten_params layout of PairSpec.
  LossTerms evaluate(const Vec& theta, const std::vector<BatchSample>& batch, Vec* grad, Exec exec);

  const PairSpec& pair_spec() const { return spec_; }
  const ObjectiveSpec& objective() const { return obj_; }

 private:
  struct Program;
  void build_programs();
  PairSpec spec_;
  ObjectiveSpec obj_;
  std::vector<std::unique_ptr<Program>> programs_;  // one per worker thread
  Vec grad_slots_;
  Vec term_slots_;
};

// One-shot wrappers matching the individual training objectives. Each returns
// the batch-mean loss and, when grad != nullptr, its gradient.
LossTerms loss_dsm(const ScoreModelPair& pair, const std::vector<BatchSample>& batch, double sigma,
                   Vec* grad = nullptr, Exec exec = Exec::serial);
LossTerms loss_dsm_vr(const ScoreModelPair& pair, const std::vector<BatchSample>& batch, double sigma,
                      Vec* grad = nullptr, Exec exec = Exec::serial);
LossTerms loss_d2sm(const ScoreModelPair& pair, const std::vector<BatchSample>& batch, double sigma,
                    Vec* grad = nullptr, Exec exec = Exec::serial);
LossTerms loss_d2sm_diag(const ScoreModelPair& pair, const std::vector<BatchSample>& batch, double sigma,
                         Vec* grad = nullptr, Exec exec = Exec::serial);
LossTerms loss_d2sm_vr(const ScoreModelPair& pair, const std::vector<BatchSample>& batch, double sigma,
                       Vec* grad = nullptr, Exec exec = Exec::serial);
LossTerms loss_joint(const ScoreModelPair& pair, const std::vector<BatchSample>& batch, double sigma,
                     double gamma, bool diag, bool vr, Vec* grad = nullptr, Exec exec = Exec::serial);

}  // namespace hosm
