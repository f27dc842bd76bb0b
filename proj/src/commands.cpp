#include "hosm/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "hosm/csvio.hpp"
#include "hosm/moments.hpp"
#include "hosm/objectives.hpp"
#include "hosm/samplers.hpp"
#include "hosm/trainer.hpp"
#include "hosm/uq.hpp"

namespace hosm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

Vec parse_vec(const Config& cfg, const std::string& sec, const std::string& key, const Vec& def) {
  return cfg.get_f64_list(sec, key, def);
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void write_json(const std::string& path, const json& j) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << j.dump(2) << "\n";
}

}  // namespace

std::unique_ptr<Density> make_distribution(const Config& cfg) {
  const std::string kind = cfg.require_str("distribution", "kind");
  const int dim = static_cast<int>(cfg.get_i64("distribution", "dim", 2));
  if (kind == "gaussian") {
    Vec mu = parse_vec(cfg, "distribution", "mean", Vec(static_cast<std::size_t>(dim), 0.0));
    const double scale = cfg.get_f64("distribution", "cov_scale", 1.0);
    return std::make_unique<Gaussian>(mu, mscale(Mat::identity(dim), scale));
  }
  if (kind == "gaussian-random") {
    return make_random_gaussian(dim, cfg.get_f64("distribution", "cond_max", 100.0),
                                cfg.get_u64("distribution", "param_seed", 7));
  }
  if (kind == "mixture-logistics") {
    return make_random_logistic_mixture(dim, static_cast<int>(cfg.get_i64("distribution", "components", 20)),
                                        cfg.get_u64("distribution", "param_seed", 3),
                                        cfg.get_f64("distribution", "loc_range", 2.0),
                                        cfg.get_f64("distribution", "scale_min", 0.3),
                                        cfg.get_f64("distribution", "scale_max", 0.8));
  }
  if (kind == "two-mode-gaussian") {
    Vec m1 = parse_vec(cfg, "distribution", "mode1", Vec{3.0, 0.0});
    Vec m2 = parse_vec(cfg, "distribution", "mode2", Vec{-3.0, 0.0});
    const double scale = cfg.get_f64("distribution", "cov_scale", 1.0);
    return make_two_mode_gaussian(m1, m2, mscale(Mat::identity(static_cast<int>(m1.size())), scale));
  }
  if (kind == "ring") {
    return std::make_unique<Ring>(cfg.get_f64("distribution", "radius", 3.0),
                                  cfg.get_f64("distribution", "width", 0.3));
  }
  if (kind == "clusters") {
    return make_cluster_grid(static_cast<int>(cfg.get_i64("distribution", "grid", 3)),
                             cfg.get_f64("distribution", "spacing", 3.0),
                             cfg.get_f64("distribution", "blob_std", 0.3));
  }
  throw ConfigError("unknown distribution kind: " + kind);
}

namespace {

TrainConfig make_train_config(const Config& cfg) {
  TrainConfig tc;
  const std::string obj = cfg.get_str("train", "objective", "d2sm-joint");
  if (obj == "dsm")
    tc.objective.objective = Objective::dsm;
  else if (obj == "d2sm-joint")
    tc.objective.objective = Objective::d2sm_joint;
  else if (obj == "d2sm-joint-diag")
    tc.objective.objective = Objective::d2sm_joint_diag;
  else
    throw ConfigError("unknown objective: " + obj);
  tc.objective.sigma = cfg.get_f64("train", "sigma", 0.1);
  tc.objective.gamma = cfg.get_f64("train", "gamma", 1.0);
  tc.objective.variance_reduction = cfg.get_bool("train", "vr", false);
  tc.batch = static_cast<int>(cfg.get_i64("train", "batch", 128));
  tc.steps = static_cast<int>(cfg.get_i64("train", "steps", 5000));
  tc.lr = cfg.get_f64("train", "lr", 1e-3);
  const std::string sched = cfg.get_str("train", "lr_schedule", "constant");
  if (sched == "constant")
    tc.lr_schedule = LrSchedule::constant;
  else if (sched == "cosine")
    tc.lr_schedule = LrSchedule::cosine;
  else
    throw ConfigError("unknown lr_schedule: " + sched);
  tc.seed = cfg.get_u64("train", "seed", 0);
  tc.s1_hidden = static_cast<int>(cfg.get_i64("train", "s1_hidden", 128));
  tc.s2_hidden = static_cast<int>(cfg.get_i64("train", "s2_hidden", 32));
  tc.s1_layers = static_cast<int>(cfg.get_i64("train", "s1_layers", 3));
  tc.s2_layers = static_cast<int>(cfg.get_i64("train", "s2_layers", 3));
  tc.rank = static_cast<int>(cfg.get_i64("train", "rank", 0));
  tc.log_every = static_cast<int>(cfg.get_i64("train", "log_every", 50));
  return tc;
}

struct EvalPointSet {
  std::vector<Vec> points;          // where the models are evaluated
  std::vector<ScoreEval> truth;     // analytic scores at those points
};

EvalPointSet make_eval_points(const Density& data, const std::string& target, double sigma, int n,
                              std::uint64_t seed) {
  EvalPointSet set;
  std::vector<Vec> clean = sample_n(data, n, seed);
  if (target == "clean") {
    set.points = std::move(clean);
    for (const Vec& x : set.points) set.truth.push_back(data.scores(x));
    return set;
  }
  if (target == "noisy") {
    auto noisy = noisy_density(data, sigma);
    if (noisy == nullptr) throw ConfigError("eval: target=noisy needs a Gaussian-family base distribution");
    Rng rng = Rng::stream(seed, 0xE7A1);
    for (Vec& x : clean) {
      auto [xt, z] = perturb(x, sigma, rng);
      (void)z;
      set.truth.push_back(noisy->scores(xt));
      set.points.push_back(std::move(xt));
    }
    return set;
  }
  throw ConfigError("eval: unknown target '" + target + "'");
}

struct EvalMse {
  double s1 = 0.0;
  double s2_direct = 0.0;
  double s2_fd = 0.0;
};

// Central finite differences of the trained s1, the autodiff-cost baseline.
Mat fd_jacobian_s1(const FirstOrderModel& m, const Vec& x, double h) {
  const int d = static_cast<int>(x.size());
  Mat jac(d, d);
  Vec xp = x, xm = x;
  for (int j = 0; j < d; ++j) {
    xp[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(j)] + h;
    xm[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(j)] - h;
    const Vec fp = eval_s1(m, xp);
    const Vec fm = eval_s1(m, xm);
    for (int i = 0; i < d; ++i) jac(i, j) = (fp[static_cast<std::size_t>(i)] - fm[static_cast<std::size_t>(i)]) / (2.0 * h);
    xp[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(j)];
    xm[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(j)];
  }
  return jac;
}

EvalMse eval_model_mse(const ScoreModelPair& pair, const EvalPointSet& set, double fd_h, Exec exec) {
  const int n = static_cast<int>(set.points.size());
  const int d = pair.spec.dim;
  const bool diag_model = pair.spec.mode == SecondOrderMode::diag_only;
  std::vector<double> s1_err(static_cast<std::size_t>(n)), dir_err(static_cast<std::size_t>(n)),
      fd_err(static_cast<std::size_t>(n));
  parallel_for(exec, n, [&](int i) {
    const Vec& x = set.points[static_cast<std::size_t>(i)];
    const ScoreEval& truth = set.truth[static_cast<std::size_t>(i)];
    const Vec s1 = eval_s1(pair.first, x);
    double e1 = 0.0;
    for (int k = 0; k < d; ++k) {
      const double r = s1[static_cast<std::size_t>(k)] - truth.s1[static_cast<std::size_t>(k)];
      e1 += r * r;
    }
    s1_err[static_cast<std::size_t>(i)] = e1 / d;

    const Mat jac = fd_jacobian_s1(pair.first, x, fd_h);
    if (diag_model) {
      const Vec s2d = eval_s2_diag(pair.second, x);
      double ed = 0.0, ef = 0.0;
      for (int k = 0; k < d; ++k) {
        const double t = truth.s2(k, k);
        const double r1 = s2d[static_cast<std::size_t>(k)] - t;
        const double r2 = jac(k, k) - t;
        ed += r1 * r1;
        ef += r2 * r2;
      }
      dir_err[static_cast<std::size_t>(i)] = ed / d;
      fd_err[static_cast<std::size_t>(i)] = ef / d;
    } else {
      const Mat s2 = eval_s2(pair.second, x);
      double ed = 0.0, ef = 0.0;
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) {
          const double t = truth.s2(r, c);
          const double r1 = s2(r, c) - t;
          const double r2 = jac(r, c) - t;
          ed += r1 * r1;
          ef += r2 * r2;
        }
      dir_err[static_cast<std::size_t>(i)] = ed / (static_cast<double>(d) * d);
      fd_err[static_cast<std::size_t>(i)] = ef / (static_cast<double>(d) * d);
    }
  });
  EvalMse out;
  for (int i = 0; i < n; ++i) {
    out.s1 += s1_err[static_cast<std::size_t>(i)];
    out.s2_direct += dir_err[static_cast<std::size_t>(i)];
    out.s2_fd += fd_err[static_cast<std::size_t>(i)];
  }
  out.s1 /= n;
  out.s2_direct /= n;
  out.s2_fd /= n;
  return out;
}

// Wall time for the factored second-order evaluation and the (D+1)-pass
// finite-difference proxy; medians over `repeats` runs.
std::pair<double, double> eval_timings(const ScoreModelPair& pair, const std::vector<Vec>& points, int repeats,
                                       double fd_h) {
  std::vector<double> direct_us, fd_us;
  Vec out, sa, sb;
  for (int r = 0; r < repeats; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    double sink = 0.0;
    for (const Vec& x : points) {
      SecondOrderFactors f = eval_s2_factors(pair.second, x);
      sink += f.alpha[0];
    }
    auto t1 = std::chrono::steady_clock::now();
    for (const Vec& x : points) {
      mlp_forward_into(pair.first.net, x, out, sa, sb);
      sink += out[0];
      Vec xp = x;
      for (std::size_t j = 0; j < x.size(); ++j) {
        xp[j] = x[j] + fd_h;
        mlp_forward_into(pair.first.net, xp, out, sa, sb);
        sink += out[0];
        xp[j] = x[j];
      }
    }
    auto t2 = std::chrono::steady_clock::now();
    if (!std::isfinite(sink)) throw std::runtime_error("bench: non-finite evaluation");
    direct_us.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
    fd_us.push_back(std::chrono::duration<double, std::micro>(t2 - t1).count());
  }
  return {median_of(direct_us), median_of(fd_us)};
}

}  // namespace

int cmd_train(const Config& cfg, const std::string& out_dir) {
  auto data = make_distribution(cfg);
  TrainConfig tc = make_train_config(cfg);
  fs::create_directories(out_dir);
  TrainResult res = train(*data, tc, default_exec());

  Checkpoint ck = pair_to_checkpoint(res.pair);
  ck.meta["objective"] = cfg.get_str("train", "objective", "d2sm-joint");
  ck.meta["train_seed"] = std::to_string(tc.seed);
  ck.meta["train_steps"] = std::to_string(tc.steps);
  save_checkpoint(ck, out_dir + "/checkpoint.hosm");
  write_train_log_csv(out_dir + "/train_log.csv", res.log);

  if (res.diverged) {
    std::cerr << "train: loss diverged at step " << res.divergence_step
              << "; last finite checkpoint written\n";
    return kExitDivergence;
  }
  return kExitOk;
}

int cmd_eval(const Config& cfg, const std::string& out_dir) {
  auto data = make_distribution(cfg);
  fs::create_directories(out_dir);
  const int n_points = static_cast<int>(cfg.get_i64("eval", "test_points", 1000));
  const std::uint64_t seed = cfg.get_u64("eval", "seed", 11);
  const double fd_h = cfg.get_f64("eval", "fd_step", 1e-4);
  const int repeats = static_cast<int>(cfg.get_i64("eval", "timing_repeats", 7));
  if (repeats < 7) throw ConfigError("eval: timing_repeats must be >= 7");
  const std::string target = cfg.get_str("eval", "target", "clean");
  const Exec exec = default_exec();

  json report;
  report["target"] = target;
  report["test_points"] = n_points;
  json per_ck = json::array();

  if (cfg.get_str("eval", "model", "") == "oracle") {
    // harness self-check: the injected analytic model must score zero error
    const double sigma = cfg.get_f64("eval", "sigma", 0.1);
    EvalPointSet set = make_eval_points(*data, target, sigma, n_points, seed);
    const Density* truth_dist = data.get();
    std::unique_ptr<Density> noisy;
    if (target == "noisy") {
      noisy = noisy_density(*data, sigma);
      truth_dist = noisy.get();
    }
    double mse1 = 0.0, mse2 = 0.0;
    for (std::size_t i = 0; i < set.points.size(); ++i) {
      const ScoreEval got = truth_dist->scores(set.points[i]);
      const ScoreEval& want = set.truth[i];
      for (std::size_t k = 0; k < got.s1.size(); ++k) {
        const double r = got.s1[k] - want.s1[k];
        mse1 += r * r;
      }
      for (std::size_t k = 0; k < got.s2.a.size(); ++k) {
        const double r = got.s2.a[k] - want.s2.a[k];
        mse2 += r * r;
      }
    }
    json row;
    row["checkpoint"] = "oracle";
    row["mse_s1"] = mse1 / (static_cast<double>(n_points) * data->dim());
    row["mse_s2_direct"] = mse2 / (static_cast<double>(n_points) * data->dim() * data->dim());
    row["mse_s2_fd_of_s1"] = row["mse_s2_direct"];
    per_ck.push_back(row);
    report["checkpoints"] = per_ck;
    write_json(out_dir + "/eval_report.json", report);
    return kExitOk;
  }

  const auto paths = cfg.get_str_list("eval", "checkpoints");
  if (paths.empty()) throw ConfigError("eval: no checkpoints given");
  Vec dir_mses, fd_mses;
  for (const std::string& path : paths) {
    if (!fs::exists(path)) throw ConfigError("eval: checkpoint does not exist: " + path);
    ScoreModelPair pair = pair_from_checkpoint(load_checkpoint(path));
    if (pair.spec.dim != data->dim()) throw ConfigError("eval: checkpoint dimension mismatch: " + path);
    EvalPointSet set = make_eval_points(*data, target, pair.sigma_train, n_points, seed);
    EvalMse mse = eval_model_mse(pair, set, fd_h, exec);
    auto [direct_us, fd_us] = eval_timings(pair, set.points, repeats, fd_h);
    json row;
    row["checkpoint"] = path;
    row["sigma_train"] = pair.sigma_train;
    row["mse_s1"] = mse.s1;
    row["mse_s2_direct"] = mse.s2_direct;
    row["mse_s2_fd_of_s1"] = mse.s2_fd;
    row["direct_s2_us_median"] = direct_us;
    row["fd_s2_us_median"] = fd_us;
    per_ck.push_back(row);
    dir_mses.push_back(mse.s2_direct);
    fd_mses.push_back(mse.s2_fd);
  }
  auto mean_std = [](const Vec& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    s = v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0;
    return std::pair<double, double>(m, s);
  };
  const auto [dm, ds] = mean_std(dir_mses);
  const auto [fm, fsd] = mean_std(fd_mses);
  report["checkpoints"] = per_ck;
  report["mse_s2_direct_mean"] = dm;
  report["mse_s2_direct_std"] = ds;
  report["mse_s2_fd_mean"] = fm;
  report["mse_s2_fd_std"] = fsd;

  if (cfg.get_str("output", "format", "json") == "csv") {
    CsvWriter w(out_dir + "/eval_report.csv",
                {"checkpoint_index", "mse_s1", "mse_s2_direct", "mse_s2_fd_of_s1", "direct_s2_us", "fd_s2_us"});
    for (std::size_t i = 0; i < per_ck.size(); ++i) {
      const json& r = per_ck[i];
      w.row({static_cast<double>(i), r["mse_s1"].get<double>(), r["mse_s2_direct"].get<double>(),
             r["mse_s2_fd_of_s1"].get<double>(), r["direct_s2_us_median"].get<double>(),
             r["fd_s2_us_median"].get<double>()});
    }
  }
  write_json(out_dir + "/eval_report.json", report);
  return kExitOk;
}

int cmd_bench(const Config& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const int repeats = static_cast<int>(cfg.get_i64("bench", "repeats", 7));
  if (repeats < 7) throw ConfigError("bench: repeats must be >= 7");
  const int batch = static_cast<int>(cfg.get_i64("bench", "batch", 10));
  const std::uint64_t seed = cfg.get_u64("bench", "seed", 2);
  const double fd_h = cfg.get_f64("bench", "fd_step", 1e-4);

  std::vector<std::pair<int, ScoreModelPair>> models;
  if (cfg.has("bench", "checkpoint")) {
    ScoreModelPair pair = pair_from_checkpoint(load_checkpoint(cfg.require_str("bench", "checkpoint")));
    models.emplace_back(pair.spec.dim, std::move(pair));
  } else {
    const auto dims = cfg.get_f64_list("bench", "dims", {10, 50, 100});
    for (double dd : dims) {
      PairSpec spec;
      spec.dim = static_cast<int>(dd);
      spec.s1_hidden = static_cast<int>(cfg.get_i64("bench", "s1_hidden", 128));
      spec.s2_hidden = static_cast<int>(cfg.get_i64("bench", "s2_hidden", 32));
      spec.rank = static_cast<int>(cfg.get_i64("bench", "rank", 20));
      if (spec.rank > spec.dim) spec.rank = spec.dim;
      models.emplace_back(spec.dim, make_pair(spec, seed));
    }
  }

  CsvWriter w(out_dir + "/bench.csv",
              {"dim", "rank", "batch", "repeats", "direct_s2_us_median", "fd_s2_us_median", "ratio_fd_over_direct"});
  for (auto& [dim, pair] : models) {
    auto gauss = make_std_gaussian(dim);
    std::vector<Vec> points = sample_n(*gauss, batch, seed + static_cast<std::uint64_t>(dim));
    eval_timings(pair, points, 2, fd_h);  // warmup
    auto [direct_us, fd_us] = eval_timings(pair, points, repeats, fd_h);
    w.row({static_cast<double>(dim), static_cast<double>(pair.second.rank), static_cast<double>(batch),
           static_cast<double>(repeats), direct_us, fd_us, fd_us / direct_us});
  }
  return kExitOk;
}

namespace {

SamplerConfig make_sampler_config(const Config& cfg) {
  SamplerConfig sc;
  const std::string method = cfg.get_str("sampler", "method", "langevin");
  if (method == "langevin")
    sc.method = SamplerMethod::langevin;
  else if (method == "ozaki-diag")
    sc.method = SamplerMethod::ozaki_diag;
  else
    throw ConfigError("unknown sampler method: " + method);
  sc.eps = cfg.get_f64("sampler", "eps", 0.1);
  sc.iterations = static_cast<int>(cfg.get_i64("sampler", "iterations", 10000));
  sc.burn_in = static_cast<int>(cfg.get_i64("sampler", "burn_in", 1000));
  sc.chains = static_cast<int>(cfg.get_i64("sampler", "chains", 32));
  sc.seed = cfg.get_u64("sampler", "seed", 5);
  const std::string init = cfg.get_str("sampler", "init", "gaussian-noise");
  if (init == "gaussian-noise")
    sc.init = ChainInit::gaussian_noise;
  else if (init == "fixed-point")
    sc.init = ChainInit::fixed_point;
  else if (init == "data-sample")
    sc.init = ChainInit::data_sample;
  else
    throw ConfigError("unknown sampler init: " + init);
  sc.init_scale = cfg.get_f64("sampler", "init_scale", 1.0);
  sc.init_point = cfg.get_f64_list("sampler", "init_point", {});
  return sc;
}

}  // namespace

int cmd_sample(const Config& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  SamplerConfig sc = make_sampler_config(cfg);
  const Exec exec = default_exec();

  ScoreSource source;
  std::unique_ptr<Density> dist;
  ScoreModelPair pair;
  const std::string src = cfg.get_str("sampler", "source", "oracle");
  if (src == "oracle") {
    dist = make_distribution(cfg);
    source = oracle_source(*dist);
  } else if (src == "checkpoint") {
    pair = pair_from_checkpoint(load_checkpoint(cfg.require_str("sampler", "checkpoint")));
    source = model_source(pair);
  } else {
    throw ConfigError("unknown sampler source: " + src);
  }

  if (cfg.get_bool("sampler", "tune", false)) {
    const auto grid = cfg.get_f64_list("sampler", "tune_grid", {0.01, 0.05, 0.1, 0.5, 1.0});
    SamplerConfig pilot = sc;
    pilot.iterations = static_cast<int>(cfg.get_i64("sampler", "pilot_iterations", 2000));
    pilot.burn_in = static_cast<int>(cfg.get_i64("sampler", "pilot_burn_in", 500));
    pilot.chains = static_cast<int>(cfg.get_i64("sampler", "pilot_chains", 8));
    TuneResult tuned = tune_step_size(sc.method, source, grid, pilot, exec);
    sc.eps = tuned.best_eps;
    CsvWriter w(out_dir + "/tune.csv", {"eps", "min_ess", "divergent", "clamp_events"});
    for (const TuneRow& r : tuned.table)
      w.row({r.eps, r.min_ess, r.divergent ? 1.0 : 0.0, static_cast<double>(r.clamp_events)});
  }

  RunResult res = run_chains(sc, source, exec);

  if (res.divergence) {
    json div;
    div["chain"] = res.divergence->chain;
    div["step"] = res.divergence->step;
    div["last_finite_state"] = res.divergence->last_finite;
    write_json(out_dir + "/divergence.json", div);
    std::cerr << "sample: chain " << res.divergence->chain << " diverged at step " << res.divergence->step << "\n";
    return kExitDivergence;
  }

  {
    std::vector<std::string> header = {"iteration", "chain"};
    for (int d = 0; d < source.dim; ++d) header.push_back("x" + std::to_string(d));
    CsvWriter w(out_dir + "/trajectories.csv", header);
    std::vector<double> row(header.size());
    for (std::size_t t = 0; t < res.state.history.size(); ++t)
      for (int c = 0; c < sc.chains; ++c) {
        row[0] = static_cast<double>(t + static_cast<std::size_t>(sc.burn_in));
        row[1] = c;
        for (int d = 0; d < source.dim; ++d)
          row[static_cast<std::size_t>(d) + 2] = res.state.history[t][static_cast<std::size_t>(c)][static_cast<std::size_t>(d)];
        w.row(row);
      }
  }

  json ess;
  ess["per_dimension"] = res.ess.per_dimension;
  ess["min_ess"] = res.ess.min_ess;
  ess["cutoff_lags"] = res.ess.cutoff_lags;
  ess["chains"] = res.ess.chains;
  ess["retained_per_chain"] = res.ess.retained;
  ess["eps"] = sc.eps;
  ess["clamp_events"] = res.clamp_events;
  write_json(out_dir + "/ess.json", ess);
  return kExitOk;
}

int cmd_denoise(const Config& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const std::string input = cfg.require_str("denoise", "input");
  if (!fs::exists(input)) throw ConfigError("denoise: input file does not exist: " + input);
  const std::vector<Vec> points = read_points_csv(input);
  const int top_k = static_cast<int>(cfg.get_i64("denoise", "top_k", 0));
  const int n_post = static_cast<int>(cfg.get_i64("denoise", "posterior_samples", 0));
  const std::uint64_t sample_seed = cfg.get_u64("denoise", "sample_seed", 9);

  std::unique_ptr<Density> noisy;
  ScoreModelPair pair;
  bool oracle = cfg.get_str("denoise", "model", "") == "oracle";
  double sigma = cfg.get_f64("denoise", "sigma", 0.0);
  if (oracle) {
    auto dist = make_distribution(cfg);
    if (sigma <= 0.0) throw ConfigError("denoise: oracle mode needs sigma > 0");
    noisy = noisy_density(*dist, sigma);
    if (noisy == nullptr) throw ConfigError("denoise: no closed-form noisy scores for this distribution");
  } else {
    pair = pair_from_checkpoint(load_checkpoint(cfg.require_str("denoise", "checkpoint")));
    if (sigma <= 0.0) sigma = pair.sigma_train;
    if (std::fabs(sigma - pair.sigma_train) > 1e-12)
      std::cerr << "denoise: warning: sigma " << sigma << " differs from training sigma " << pair.sigma_train << "\n";
  }

  json report = json::array();
  std::vector<Vec> all_draws;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec& xt = points[i];
    PosteriorSummary s;
    if (oracle) {
      if (static_cast<int>(xt.size()) != noisy->dim())
        throw ConfigError("denoise: input dimension mismatch at row " + std::to_string(i + 1));
      const ScoreEval e = noisy->scores(xt);
      s = denoise_with_uq_scores(e.s1, e.s2, xt, sigma, top_k);
    } else {
      if (static_cast<int>(xt.size()) != pair.spec.dim)
        throw ConfigError("denoise: input dimension mismatch at row " + std::to_string(i + 1));
      s = denoise_with_uq(pair, xt, sigma, top_k);
    }
    json row;
    row["point"] = xt;
    row["mean"] = s.mean;
    row["cov_diag"] = s.diag;
    row["pre_projection_spectrum"] = s.pre_projection_spectrum;
    json eigs = json::array();
    for (const EigenPair& p : s.top_eigen) {
      json e;
      e["value"] = p.value;
      e["vector"] = p.vector;
      eigs.push_back(e);
    }
    row["top_eigen"] = eigs;
    report.push_back(row);
    if (n_post > 0) {
      std::vector<Vec> draws = gaussian_posterior_sample(s, n_post, sample_seed + i);
      all_draws.insert(all_draws.end(), draws.begin(), draws.end());
    }
  }
  write_json(out_dir + "/uq_report.json", report);
  if (n_post > 0) write_points_csv(out_dir + "/posterior_samples.csv", all_draws);
  return kExitOk;
}

int run_command(const std::string& name, Config cfg, const std::string& out_dir, const std::string& seed_override) {
  try {
    if (!seed_override.empty()) {
      cfg.set("train", "seed", seed_override);
      cfg.set("sampler", "seed", seed_override);
      cfg.set("eval", "seed", seed_override);
      cfg.set("bench", "seed", seed_override);
      cfg.set("denoise", "sample_seed", seed_override);
    }
    if (name == "train") return cmd_train(cfg, out_dir);
    if (name == "eval") return cmd_eval(cfg, out_dir);
    if (name == "bench") return cmd_bench(cfg, out_dir);
    if (name == "sample") return cmd_sample(cfg, out_dir);
    if (name == "denoise") return cmd_denoise(cfg, out_dir);
    std::cerr << "unknown command: " << name << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << name << ": " << e.what() << "\n";
    return kExitValidation;
  }
}

}  // namespace hosm
