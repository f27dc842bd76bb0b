#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "hosm/score_models.hpp"
#include "oracles.hpp"

using namespace hosm;

TEST_CASE("mlp forward: zero net maps anything to zero") {
  Mlp net = make_zero_mlp({3, 5, 3});
  Vec out = mlp_forward(net, Vec{1.0, -2.0, 0.5});
  CHECK(out == Vec(3, 0.0));
}

TEST_CASE("mlp forward: single identity layer passes input through") {
  Mlp net = make_zero_mlp({2, 2});
  net.w[0](0, 0) = 1.0;
  net.w[0](1, 1) = 1.0;
  CHECK(mlp_forward(net, Vec{1.0, 2.0}) == Vec{1.0, 2.0});
  CHECK_THROWS(mlp_forward(net, Vec{1.0, 2.0, 3.0}));
}

TEST_CASE("seed-0 2-layer net agrees with the hand-rolled forward pass") {
  Rng rng(0);
  Mlp net = make_mlp({2, 4, 2}, rng);
  Vec x{0.5, -0.5};
  Vec got = mlp_forward(net, x);
  Vec want = oracle::mlp_forward_by_hand(net.w, net.b, x);
  CHECK(oracle::max_rel_err(got, want) < 1e-14);
}

TEST_CASE("eval_s1: zero net gives zero; batch equals singles") {
  PairSpec spec;
  spec.dim = 3;
  spec.s1_hidden = 8;
  spec.s2_hidden = 4;
  ScoreModelPair pair = make_pair(spec, 7);
  pair.first.net = make_zero_mlp(spec.s1_dims());
  CHECK(eval_s1(pair.first, Vec{1.0, 2.0, 3.0}) == Vec(3, 0.0));

  pair = make_pair(spec, 8);
  auto xs = std::vector<Vec>{{0.1, 0.2, 0.3}, {-1.0, 0.0, 1.0}, {2.0, 2.0, 2.0}};
  auto batch = eval_s1_batch(pair.first, xs, Exec::parallel);
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(batch[i] == eval_s1(pair.first, xs[i]));
}

TEST_CASE("eval_s2 structure: alpha diagonal plus rank-limited psd part") {
  PairSpec spec;
  spec.dim = 3;
  spec.s2_hidden = 4;
  spec.rank = 2;
  ScoreModelPair pair = make_pair(spec, 3);

  SUBCASE("beta = 0 gives diag(alpha)") {
    pair.second.beta_net = make_zero_mlp(spec.beta_dims());
    // freeze alpha output by zeroing all but the bias of the last layer
    pair.second.alpha_net = make_zero_mlp(spec.alpha_dims());
    pair.second.alpha_net.b.back() = Vec{1.0, 2.0, 3.0};
    Mat s2 = eval_s2(pair.second, Vec{0.0, 0.0, 0.0});
    CHECK(s2(0, 0) == 1.0);
    CHECK(s2(1, 1) == 2.0);
    CHECK(s2(2, 2) == 3.0);
    CHECK(s2(0, 1) == 0.0);
  }

  SUBCASE("alpha = 0, single beta column gives b b^T") {
    PairSpec r1 = spec;
    r1.rank = 1;
    ScoreModelPair p1 = make_pair(r1, 3);
    p1.second.alpha_net = make_zero_mlp(r1.alpha_dims());
    p1.second.beta_net = make_zero_mlp(r1.beta_dims());
    p1.second.beta_net.b.back() = Vec{1.0, -2.0, 0.5};
    Mat s2 = eval_s2(p1.second, Vec{0.0, 0.0, 0.0});
    Mat want = outer({1.0, -2.0, 0.5}, {1.0, -2.0, 0.5});
    CHECK(oracle::max_rel_err(s2, want) < 1e-14);
  }

  SUBCASE("symmetry and psd of the low-rank part at random points") {
    Rng rng(5);
    Rng init(55);
    pair.second.alpha_net = make_mlp(spec.alpha_dims(), init);
    pair.second.beta_net = make_mlp(spec.beta_dims(), init);
    for (int i = 0; i < 10; ++i) {
      Vec x = rng.gaussian_vec(3);
      Mat s2 = eval_s2(pair.second, x);
      CHECK(max_asymmetry(s2) == 0.0);
      // repeated evaluation is identical (no hidden state)
      CHECK(eval_s2(pair.second, x).a == s2.a);
      // s2 - diag(alpha) = beta beta^T must be psd
      Vec alpha = mlp_forward(pair.second.alpha_net, x);
      Mat bbT = s2;
      for (int k = 0; k < 3; ++k) bbT(k, k) -= alpha[static_cast<std::size_t>(k)];
      SymEig e = sym_eig(bbT);
      for (double v : e.values) CHECK(v >= -1e-10);
    }
  }

  SUBCASE("diag model rejects full evaluation and diag matches full model diag") {
    PairSpec ds = spec;
    ds.mode = SecondOrderMode::diag_only;
    ScoreModelPair dp = make_pair(ds, 4);
    CHECK_THROWS(eval_s2(dp.second, Vec{0.0, 0.0, 0.0}));
    Vec alpha = mlp_forward(dp.second.alpha_net, Vec{0.1, 0.2, 0.3});
    CHECK(eval_s2_diag(dp.second, Vec{0.1, 0.2, 0.3}) == alpha);

    Rng rng(6);
    Vec x = rng.gaussian_vec(3);
    Mat full = eval_s2(pair.second, x);
    Vec d = eval_s2_diag(pair.second, x);
    for (int k = 0; k < 3; ++k) CHECK(d[static_cast<std::size_t>(k)] == doctest::Approx(full(k, k)).epsilon(1e-12));
  }
}

TEST_CASE("flatten and unflatten round-trip the parameters") {
  PairSpec spec;
  spec.dim = 4;
  spec.s1_hidden = 6;
  spec.s2_hidden = 5;
  spec.rank = 2;
  ScoreModelPair pair = make_pair(spec, 11);
  Vec theta = flatten_params(pair);
  CHECK(theta.size() == spec.param_total());
  ScoreModelPair other = make_pair(spec, 99);
  unflatten_params(other, theta);
  CHECK(flatten_params(other) == theta);
  Vec x{0.1, -0.2, 0.3, -0.4};
  CHECK(eval_s1(other.first, x) == eval_s1(pair.first, x));
  CHECK(eval_s2(other.second, x).a == eval_s2(pair.second, x).a);
}

TEST_CASE("pair checkpoints round-trip bit-exactly") {
  namespace fs = std::filesystem;
  PairSpec spec;
  spec.dim = 3;
  spec.s1_hidden = 8;
  spec.s2_hidden = 4;
  spec.rank = 2;
  ScoreModelPair pair = make_pair(spec, 21);
  pair.sigma_train = 0.1234567890123;

  const std::string path = (fs::temp_directory_path() / "hosm_test_ckpt.bin").string();
  save_checkpoint(pair_to_checkpoint(pair), path);
  ScoreModelPair loaded = pair_from_checkpoint(load_checkpoint(path));
  CHECK(flatten_params(loaded) == flatten_params(pair));
  CHECK(loaded.sigma_train == pair.sigma_train);
  CHECK(loaded.spec.rank == spec.rank);

  // byte-identical rewrite
  const std::string path2 = (fs::temp_directory_path() / "hosm_test_ckpt2.bin").string();
  save_checkpoint(pair_to_checkpoint(loaded), path2);
  std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
  std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
  std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
  CHECK(sa == sb);
  fs::remove(path);
  fs::remove(path2);
}
