#include "hosm/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hosm {

ScoreSource oracle_source(const Density& dist) {
  ScoreSource s;
  s.dim = dist.dim();
  const Density* d = &dist;
  s.s1 = [d](const Vec& x) { return d->score1(x); };
  s.s2_diag = [d](const Vec& x) {
    Mat h = d->score2(x);
    Vec diag(static_cast<std::size_t>(h.rows));
    for (int i = 0; i < h.rows; ++i) diag[static_cast<std::size_t>(i)] = h(i, i);
    return diag;
  };
  s.draw = [d](Rng& rng) { return d->sample(rng); };
  return s;
}

ScoreSource model_source(const ScoreModelPair& pair) {
  ScoreSource s;
  s.dim = pair.spec.dim;
  const ScoreModelPair* p = &pair;
  s.s1 = [p](const Vec& x) { return eval_s1(p->first, x); };
  if (pair.spec.with_second) s.s2_diag = [p](const Vec& x) { return eval_s2_diag(p->second, x); };
  return s;
}

Vec langevin_step(const Vec& x, const std::function<Vec(const Vec&)>& s1, double eps, Rng& rng) {
  if (eps <= 0.0) throw std::invalid_argument("langevin_step: eps must be positive");
  Vec g = s1(x);
  if (!all_finite(g)) throw std::runtime_error("langevin_step: non-finite score");
  const double root = std::sqrt(eps);
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + 0.5 * eps * g[i] + root * rng.gaussian();
  return out;
}

Vec ozaki_diag_step(const Vec& x, const std::function<Vec(const Vec&)>& s1,
                    const std::function<Vec(const Vec&)>& s2_diag, double eps, Rng& rng, long* clamp_events) {
  if (eps <= 0.0) throw std::invalid_argument("ozaki_diag_step: eps must be positive");
  Vec g = s1(x);
  Vec c = s2_diag(x);
  if (!all_finite(g) || !all_finite(c)) throw std::runtime_error("ozaki_diag_step: non-finite score");
  const double c_max = 10.0 / eps;
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double ci = c[i];
    if (ci > c_max) {
      ci = c_max;
      if (clamp_events != nullptr) ++(*clamp_events);
    }
    double m, v;
    if (std::fabs(eps * ci) < 1e-6) {
      // series for (e^{eps c}-1)/c and (e^{2 eps c}-1)/c; avoids cancellation
      m = eps * (1.0 + 0.5 * eps * ci) * g[i];
      v = 2.0 * eps * (1.0 + eps * ci);
    } else {
      m = (std::exp(eps * ci) - 1.0) / ci * g[i];
      v = (std::expm1(2.0 * eps * ci)) / ci;
    }
    if (!(v > 0.0)) throw std::runtime_error("ozaki_diag_step: non-positive noise variance");
    out[i] = x[i] + m + std::sqrt(v) * rng.gaussian();
  }
  return out;
}

namespace {

Vec init_chain(const SamplerConfig& cfg, const ScoreSource& source, Rng& rng) {
  switch (cfg.init) {
    case ChainInit::gaussian_noise: {
      Vec x = rng.gaussian_vec(source.dim);
      for (double& v : x) v *= cfg.init_scale;
      return x;
    }
    case ChainInit::fixed_point:
      if (static_cast<int>(cfg.init_point.size()) != source.dim)
        throw std::invalid_argument("run_chains: init_point dimension mismatch");
      return cfg.init_point;
    case ChainInit::data_sample:
      if (!source.draw) throw std::invalid_argument("run_chains: source cannot draw data samples");
      return source.draw(rng);
  }
  throw std::logic_error("run_chains: unknown init");
}

}  // namespace

RunResult run_chains(const SamplerConfig& cfg, const ScoreSource& source, Exec exec) {
  if (cfg.eps <= 0.0) throw std::invalid_argument("run_chains: eps must be positive");
  if (cfg.chains < 1) throw std::invalid_argument("run_chains: need at least one chain");
  if (cfg.burn_in < 0 || cfg.burn_in >= cfg.iterations)
    throw std::invalid_argument("run_chains: need 0 <= burn_in < iterations");
  if (cfg.method == SamplerMethod::ozaki_diag && !source.s2_diag)
    throw std::invalid_argument("run_chains: ozaki-diag needs a second-order diagonal");

  const int retained = cfg.iterations - cfg.burn_in;
  RunResult res;
  res.state.chains = cfg.chains;
  res.state.dim = source.dim;
  res.state.positions.assign(static_cast<std::size_t>(cfg.chains), Vec());
  res.state.stream_ids.resize(static_cast<std::size_t>(cfg.chains));
  for (int c = 0; c < cfg.chains; ++c) res.state.stream_ids[static_cast<std::size_t>(c)] = static_cast<std::uint64_t>(c);
  if (cfg.record_history)
    res.state.history.assign(static_cast<std::size_t>(retained),
                             std::vector<Vec>(static_cast<std::size_t>(cfg.chains)));

  std::vector<long> clamp_by_chain(static_cast<std::size_t>(cfg.chains), 0);
  std::vector<Divergence> div_by_chain(static_cast<std::size_t>(cfg.chains));

  parallel_for(exec, cfg.chains, [&](int c) {
    Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(c));
    Vec x = init_chain(cfg, source, rng);
    long clamps = 0;
    for (int t = 0; t < cfg.iterations; ++t) {
      Vec next;
      try {
        next = cfg.method == SamplerMethod::langevin
                   ? langevin_step(x, source.s1, cfg.eps, rng)
                   : ozaki_diag_step(x, source.s1, source.s2_diag, cfg.eps, rng, &clamps);
      } catch (const std::runtime_error&) {
        next.assign(x.size(), std::numeric_limits<double>::quiet_NaN());
      }
      if (!all_finite(next)) {
        div_by_chain[static_cast<std::size_t>(c)] = Divergence{c, t, x};
        x = next;
        break;
      }
      x = std::move(next);
      if (cfg.record_history && t >= cfg.burn_in)
        res.state.history[static_cast<std::size_t>(t - cfg.burn_in)][static_cast<std::size_t>(c)] = x;
    }
    res.state.positions[static_cast<std::size_t>(c)] = x;
    clamp_by_chain[static_cast<std::size_t>(c)] = clamps;
  });

  for (int c = 0; c < cfg.chains; ++c) {
    res.clamp_events += clamp_by_chain[static_cast<std::size_t>(c)];
    if (div_by_chain[static_cast<std::size_t>(c)].chain >= 0 && !res.divergence)
      res.divergence = div_by_chain[static_cast<std::size_t>(c)];
  }
  if (!res.divergence && cfg.record_history) res.ess = effective_sample_size(res.state.history);
  return res;
}

EssReport effective_sample_size(const std::vector<std::vector<Vec>>& history) {
  if (history.empty() || history.front().empty()) throw std::invalid_argument("ess: empty history");
  const int n = static_cast<int>(history.size());
  const int chains = static_cast<int>(history.front().size());
  const int dim = static_cast<int>(history.front().front().size());
  const double total = static_cast<double>(n) * chains;

  EssReport rep;
  rep.per_dimension.assign(static_cast<std::size_t>(dim), 0.0);
  rep.cutoff_lags.assign(static_cast<std::size_t>(dim), 0);
  rep.chains = chains;
  rep.retained = n;

  const int max_lag = std::max(1, n / 10);
  std::vector<double> series(static_cast<std::size_t>(n));
  std::vector<double> gamma_sum(static_cast<std::size_t>(max_lag) + 1);

  for (int d = 0; d < dim; ++d) {
    std::fill(gamma_sum.begin(), gamma_sum.end(), 0.0);
    for (int c = 0; c < chains; ++c) {
      double mean = 0.0;
      for (int t = 0; t < n; ++t) mean += history[static_cast<std::size_t>(t)][static_cast<std::size_t>(c)][static_cast<std::size_t>(d)];
      mean /= n;
      for (int t = 0; t < n; ++t)
        series[static_cast<std::size_t>(t)] =
            history[static_cast<std::size_t>(t)][static_cast<std::size_t>(c)][static_cast<std::size_t>(d)] - mean;
      for (int k = 0; k <= max_lag; ++k) {
        double s = 0.0;
        for (int t = 0; t + k < n; ++t) s += series[static_cast<std::size_t>(t)] * series[static_cast<std::size_t>(t + k)];
        gamma_sum[static_cast<std::size_t>(k)] += s / n;
      }
    }
    const double g0 = gamma_sum[0];
    double ess;
    int cutoff = 0;
    if (g0 <= 0.0) {
      ess = total;  // constant series carries no correlation information
    } else {
      // Geyer initial positive sequence over lag pairs, monotone-enforced
      double tau = 1.0;
      double prev_pair = std::numeric_limits<double>::infinity();
      for (int k = 1; k + 1 <= max_lag; k += 2) {
        double pair = (gamma_sum[static_cast<std::size_t>(k)] + gamma_sum[static_cast<std::size_t>(k + 1)]) / g0;
        if (pair <= 0.0) break;
        pair = std::min(pair, prev_pair);
        prev_pair = pair;
        tau += 2.0 * pair;
        cutoff = k + 1;
      }
      ess = total / tau;
    }
    ess = std::min(std::max(ess, 1.0), total);
    rep.per_dimension[static_cast<std::size_t>(d)] = ess;
    rep.cutoff_lags[static_cast<std::size_t>(d)] = cutoff;
  }
  rep.min_ess = *std::min_element(rep.per_dimension.begin(), rep.per_dimension.end());
  return rep;
}

long count_axis_crossings(const std::vector<std::vector<Vec>>& history, int axis) {
  if (history.empty()) return 0;
  const int chains = static_cast<int>(history.front().size());
  long crossings = 0;
  for (int c = 0; c < chains; ++c) {
    int prev_sign = 0;
    for (std::size_t t = 0; t < history.size(); ++t) {
      const double v = history[t][static_cast<std::size_t>(c)][static_cast<std::size_t>(axis)];
      const int sign = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
      if (sign != 0 && prev_sign != 0 && sign != prev_sign) ++crossings;
      if (sign != 0) prev_sign = sign;
    }
  }
  return crossings;
}

TuneResult tune_step_size(SamplerMethod method, const ScoreSource& source, const std::vector<double>& grid,
                          const SamplerConfig& pilot, Exec exec) {
  if (grid.empty()) throw std::invalid_argument("tune_step_size: empty grid");
  TuneResult out;
  double best = -1.0;
  for (double eps : grid) {
    SamplerConfig cfg = pilot;
    cfg.method = method;
    cfg.eps = eps;
    cfg.record_history = true;
    RunResult r = run_chains(cfg, source, exec);
    TuneRow row;
    row.eps = eps;
    row.divergent = r.divergence.has_value();
    row.clamp_events = r.clamp_events;
    row.min_ess = row.divergent ? 0.0 : r.ess.min_ess;
    out.table.push_back(row);
    if (!row.divergent && row.min_ess > best) {
      best = row.min_ess;
      out.best_eps = eps;
    }
  }
  if (best < 0.0) throw std::runtime_error("tune_step_size: every grid point diverged");
  return out;
}

}  // namespace hosm
