#include "hosm/trainer.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "hosm/csvio.hpp"

namespace hosm {

void TrainConfig::validate() const {
  if (objective.sigma <= 0.0) throw std::invalid_argument("train: sigma must be positive");
  if (objective.objective != Objective::dsm && objective.gamma <= 0.0)
    throw std::invalid_argument("train: gamma must be positive for joint objectives");
  if (batch < 2) throw std::invalid_argument("train: batch must be >= 2");
  if (steps < 0) throw std::invalid_argument("train: steps must be >= 0");
  if (lr <= 0.0) throw std::invalid_argument("train: learning rate must be positive");
}

TrainResult train(const Density& data, const TrainConfig& cfg, Exec exec) {
  cfg.validate();
  PairSpec spec;
  spec.dim = data.dim();
  spec.s1_hidden = cfg.s1_hidden;
  spec.s2_hidden = cfg.s2_hidden;
  spec.s1_layers = cfg.s1_layers;
  spec.s2_layers = cfg.s2_layers;
  spec.rank = cfg.rank;
  spec.with_second = cfg.objective.objective != Objective::dsm;
  spec.mode = cfg.objective.objective == Objective::d2sm_joint_diag ? SecondOrderMode::diag_only
                                                                    : SecondOrderMode::full;

  TrainResult res;
  res.pair = make_pair(spec, cfg.seed);
  res.pair.sigma_train = cfg.objective.sigma;
  Vec theta = flatten_params(res.pair);
  Vec last_good = theta;

  LossEvaluator evaluator(spec, cfg.objective);
  AdamState adam = AdamState::init(theta.size(), cfg.lr);
  Rng batch_rng = Rng::stream(cfg.seed, 0xBA7C4);

  std::vector<BatchSample> batch(static_cast<std::size_t>(cfg.batch));
  Vec grad;
  const auto t0 = std::chrono::steady_clock::now();

  auto log_row = [&](int step, const LossTerms& terms, double gnorm) {
    LossReport r;
    r.step = step;
    r.total = terms.total;
    r.dsm_term = terms.dsm;
    r.d2sm_term = terms.d2sm;
    r.grad_norm = gnorm;
    r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.log.push_back(r);
  };

  for (int step = 0; step < cfg.steps; ++step) {
    for (BatchSample& s : batch) {
      s.x = data.sample(batch_rng);
      s.z = batch_rng.gaussian_vec(spec.dim);
    }
    if (cfg.lr_schedule == LrSchedule::cosine)
      adam.lr = cfg.lr * 0.5 * (1.0 + std::cos(M_PI * static_cast<double>(step) / static_cast<double>(cfg.steps)));
    LossTerms terms = evaluator.evaluate(theta, batch, &grad, exec);
    const double gnorm = norm2(grad);
    if (!std::isfinite(terms.total) || !std::isfinite(gnorm)) {
      res.diverged = true;
      res.divergence_step = step;
      theta = last_good;
      break;
    }
    last_good = theta;
    adam_step(theta, grad, adam);
    if (step % cfg.log_every == 0 || step + 1 == cfg.steps) log_row(step, terms, gnorm);
  }

  unflatten_params(res.pair, theta);
  return res;
}

void write_train_log_csv(const std::string& path, const std::vector<LossReport>& log) {
  CsvWriter w(path, {"step", "total_loss", "dsm_term", "d2sm_term", "grad_norm", "wall_time_s"});
  for (const LossReport& r : log)
    w.row({static_cast<double>(r.step), r.total, r.dsm_term, r.d2sm_term, r.grad_norm, r.wall_time_s});
}

}  // namespace hosm
