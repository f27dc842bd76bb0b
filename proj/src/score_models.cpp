#include "hosm/score_models.hpp"

#include <cstdio>
#include <stdexcept>
#include <string>

namespace hosm {

namespace {
std::vector<int> layer_dims(int in, int hidden, int layers, int out) {
  // `layers` weight layers means layers-1 hidden blocks
  std::vector<int> dims;
  dims.push_back(in);
  for (int l = 0; l < layers - 1; ++l) dims.push_back(hidden);
  dims.push_back(out);
  return dims;
}
}  // namespace

std::vector<int> PairSpec::s1_dims() const { return layer_dims(dim, s1_hidden, s1_layers, dim); }
std::vector<int> PairSpec::alpha_dims() const { return layer_dims(dim, s2_hidden, s2_layers, dim); }
std::vector<int> PairSpec::beta_dims() const { return layer_dims(dim, s2_hidden, s2_layers, dim * effective_rank()); }

static std::size_t dims_param_count(const std::vector<int>& dims) {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l)
    n += static_cast<std::size_t>(dims[l]) * static_cast<std::size_t>(dims[l + 1]) + static_cast<std::size_t>(dims[l + 1]);
  return n;
}

std::size_t PairSpec::param_total() const {
  std::size_t n = dims_param_count(s1_dims());
  if (with_second) {
    n += dims_param_count(alpha_dims());
    if (mode == SecondOrderMode::full) n += dims_param_count(beta_dims());
  }
  return n;
}

ScoreModelPair make_pair(const PairSpec& spec, std::uint64_t seed) {
  ScoreModelPair p;
  p.spec = spec;
  Rng r1 = Rng::stream(seed, 1);
  p.first.net = make_mlp(spec.s1_dims(), r1);
  p.second.mode = spec.mode;
  p.second.rank = spec.effective_rank();
  // Head initialization: alpha's output layer starts at zero (s2 begins at
  // the neutral zero matrix); beta's output layer starts small. A beta that
  // starts at exactly zero could never move (its gradient scales with beta),
  // while a full-scale start lets beta beta^T wander along its unidentified
  // diagonal direction before alpha can track it.
  if (spec.with_second) {
    Rng r2 = Rng::stream(seed, 2);
    p.second.alpha_net = make_mlp(spec.alpha_dims(), r2);
    for (double& v : p.second.alpha_net.w.back().a) v = 0.0;
    for (double& v : p.second.alpha_net.b.back()) v = 0.0;
    if (spec.mode == SecondOrderMode::full) {
      Rng r3 = Rng::stream(seed, 3);
      p.second.beta_net = make_mlp(spec.beta_dims(), r3);
      for (double& v : p.second.beta_net.w.back().a) v *= 0.1;
    }
  }
  return p;
}

Vec flatten_params(const ScoreModelPair& pair) {
  Vec theta(pair.spec.param_total());
  double* dst = theta.data();
  write_flat(pair.first.net, dst);
  dst += param_count(pair.first.net);
  if (pair.spec.with_second) {
    write_flat(pair.second.alpha_net, dst);
    dst += param_count(pair.second.alpha_net);
    if (pair.spec.mode == SecondOrderMode::full) write_flat(pair.second.beta_net, dst);
  }
  return theta;
}

void unflatten_params(ScoreModelPair& pair, const Vec& theta) {
  if (theta.size() != pair.spec.param_total()) throw std::invalid_argument("unflatten_params: size mismatch");
  const double* src = theta.data();
  read_flat(pair.first.net, src);
  src += param_count(pair.first.net);
  if (pair.spec.with_second) {
    read_flat(pair.second.alpha_net, src);
    src += param_count(pair.second.alpha_net);
    if (pair.spec.mode == SecondOrderMode::full) read_flat(pair.second.beta_net, src);
  }
}

Vec eval_s1(const FirstOrderModel& m, const Vec& x) { return mlp_forward(m.net, x); }

Mat eval_s2(const SecondOrderModel& m, const Vec& x) {
  if (m.mode == SecondOrderMode::diag_only)
    throw std::invalid_argument("eval_s2: full matrix requested from a diag-only model");
  const Vec alpha = mlp_forward(m.alpha_net, x);
  const Vec beta_flat = mlp_forward(m.beta_net, x);
  const int d = static_cast<int>(alpha.size());
  Mat s2(d, d);
  // beta beta^T, with beta the row-major d x rank reshape of the net output
  for (int i = 0; i < d; ++i) {
    const double* bi = &beta_flat[static_cast<std::size_t>(i) * m.rank];
    for (int j = i; j < d; ++j) {
      const double* bj = &beta_flat[static_cast<std::size_t>(j) * m.rank];
      double s = 0.0;
      for (int r = 0; r < m.rank; ++r) s += bi[r] * bj[r];
      s2(i, j) = s;
      s2(j, i) = s;
    }
    s2(i, i) += alpha[static_cast<std::size_t>(i)];
  }
  return s2;
}

Vec eval_s2_diag(const SecondOrderModel& m, const Vec& x) {
  Vec alpha = mlp_forward(m.alpha_net, x);
  if (m.mode == SecondOrderMode::full) {
    const Vec beta_flat = mlp_forward(m.beta_net, x);
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      const double* bi = &beta_flat[i * static_cast<std::size_t>(m.rank)];
      double s = 0.0;
      for (int r = 0; r < m.rank; ++r) s += bi[r] * bi[r];
      alpha[i] += s;
    }
  }
  return alpha;
}

SecondOrderFactors eval_s2_factors(const SecondOrderModel& m, const Vec& x) {
  SecondOrderFactors f;
  f.alpha = mlp_forward(m.alpha_net, x);
  if (m.mode == SecondOrderMode::full) {
    const Vec beta_flat = mlp_forward(m.beta_net, x);
    f.beta = Mat(static_cast<int>(f.alpha.size()), m.rank);
    f.beta.a = beta_flat;
  }
  return f;
}

std::vector<Vec> eval_s1_batch(const FirstOrderModel& m, const std::vector<Vec>& xs, Exec exec) {
  std::vector<Vec> out(xs.size());
  parallel_for(exec, static_cast<int>(xs.size()), [&](int i) {
    out[static_cast<std::size_t>(i)] = mlp_forward(m.net, xs[static_cast<std::size_t>(i)]);
  });
  return out;
}

Checkpoint pair_to_checkpoint(const ScoreModelPair& pair) {
  Checkpoint ck;
  ck.meta["format"] = "score-model-pair";
  ck.meta["dim"] = std::to_string(pair.spec.dim);
  ck.meta["s1_hidden"] = std::to_string(pair.spec.s1_hidden);
  ck.meta["s2_hidden"] = std::to_string(pair.spec.s2_hidden);
  ck.meta["s1_layers"] = std::to_string(pair.spec.s1_layers);
  ck.meta["s2_layers"] = std::to_string(pair.spec.s2_layers);
  ck.meta["rank"] = std::to_string(pair.second.rank);
  ck.meta["mode"] = pair.spec.mode == SecondOrderMode::full ? "full" : "diag";
  ck.meta["with_second"] = pair.spec.with_second ? "1" : "0";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", pair.sigma_train);
  ck.meta["sigma_train"] = buf;
  ck.nets.emplace_back("s1", pair.first.net);
  if (pair.spec.with_second) {
    ck.nets.emplace_back("alpha", pair.second.alpha_net);
    if (pair.spec.mode == SecondOrderMode::full) ck.nets.emplace_back("beta", pair.second.beta_net);
  }
  return ck;
}

ScoreModelPair pair_from_checkpoint(const Checkpoint& ck) {
  ScoreModelPair p;
  p.spec.dim = std::stoi(ck.meta_or("dim", "0"));
  p.spec.s1_hidden = std::stoi(ck.meta_or("s1_hidden", "128"));
  p.spec.s2_hidden = std::stoi(ck.meta_or("s2_hidden", "32"));
  p.spec.s1_layers = std::stoi(ck.meta_or("s1_layers", "3"));
  p.spec.s2_layers = std::stoi(ck.meta_or("s2_layers", "3"));
  p.spec.rank = std::stoi(ck.meta_or("rank", "0"));
  p.spec.mode = ck.meta_or("mode", "full") == "diag" ? SecondOrderMode::diag_only : SecondOrderMode::full;
  p.spec.with_second = ck.meta_or("with_second", "1") == "1";
  p.sigma_train = std::stod(ck.meta_or("sigma_train", "0"));
  const Mlp* s1 = ck.find("s1");
  if (s1 == nullptr) throw std::runtime_error("checkpoint: missing s1 network");
  p.first.net = *s1;
  p.second.mode = p.spec.mode;
  p.second.rank = p.spec.effective_rank();
  if (p.spec.with_second) {
    const Mlp* a = ck.find("alpha");
    if (a == nullptr) throw std::runtime_error("checkpoint: missing alpha network");
    p.second.alpha_net = *a;
    if (p.spec.mode == SecondOrderMode::full) {
      const Mlp* b = ck.find("beta");
      if (b == nullptr) throw std::runtime_error("checkpoint: missing beta network");
      p.second.beta_net = *b;
    }
  }
  return p;
}

}  // namespace hosm
