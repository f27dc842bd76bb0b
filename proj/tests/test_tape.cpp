#include <doctest.h>

#include "hosm/mlp.hpp"
#include "hosm/rng.hpp"
#include "hosm/tape.hpp"
#include "oracles.hpp"

using namespace hosm;

TEST_CASE("backward of sum(w . x) is x") {
  Tape t;
  Vec x{1.5, -2.0, 0.5};
  int w = t.leaf(3, 1, true);
  t.set_leaf(w, Vec{0.1, 0.2, 0.3});
  int xn = t.constant(x);
  int loss = t.sum(t.hadamard(w, xn));
  t.backward(loss);
  CHECK(t.adjoint(w) == x);
}

TEST_CASE("backward of sum(tanh(w)) at zero is all ones") {
  Tape t;
  int w = t.leaf(4, 1, true);
  t.set_leaf(w, Vec(4, 0.0));
  int loss = t.sum(t.tanh_(w));
  t.backward(loss);
  for (double g : t.adjoint(w)) CHECK(g == doctest::Approx(1.0));
}

TEST_CASE("backward rejects a non-scalar loss node") {
  Tape t;
  int w = t.leaf(2, 2, true);
  t.set_leaf(w, Vec{1, 2, 3, 4});
  int y = t.scale(w, 2.0);
  CHECK_THROWS_AS(t.backward(y), std::invalid_argument);
}

TEST_CASE("op construction validates shapes") {
  Tape t;
  int a = t.leaf(2, 3, true);
  int b = t.leaf(2, 2, true);
  CHECK_THROWS_AS(t.add(a, b), std::invalid_argument);
  CHECK_THROWS_AS(t.matmul(a, a), std::invalid_argument);
  CHECK_THROWS_AS(t.reshape(a, 4, 2), std::invalid_argument);
  CHECK_THROWS_AS(t.diag_embed(a), std::invalid_argument);
}

namespace {

// builds a composite graph exercising every primitive and returns the loss id
int composite_graph(Tape& t, int W, int v, int u) {
  int m = t.matmul(W, v);                // 3x1
  int h = t.tanh_(m);
  int d = t.diag_embed(h);               // 3x3
  int outer_uu = t.matmul(u, t.transpose(u));
  int s = t.add(d, outer_uu);
  int sq = t.hadamard(s, s);
  int r = t.rowsum(sq);                  // 3x1
  int flat = t.reshape(t.sub(s, t.transpose(s)), 9, 1);
  return t.add(t.sum(t.scale(r, 0.5)), t.sum(t.hadamard(flat, flat)));
}

}  // namespace

TEST_CASE("composite graph gradients match central finite differences") {
  Rng rng(11);
  Vec w0 = rng.gaussian_vec(9);
  Vec v0 = rng.gaussian_vec(3);
  Vec u0 = rng.gaussian_vec(3);

  auto eval = [&](const Vec& w, const Vec& v, const Vec& u) {
    Tape t;
    int W = t.leaf(3, 3, true);
    int vn = t.leaf(3, 1, true);
    int un = t.leaf(3, 1, true);
    t.set_leaf(W, w);
    t.set_leaf(vn, v);
    t.set_leaf(un, u);
    return t.scalar(composite_graph(t, W, vn, un));
  };

  Tape t;
  int W = t.leaf(3, 3, true);
  int vn = t.leaf(3, 1, true);
  int un = t.leaf(3, 1, true);
  t.set_leaf(W, w0);
  t.set_leaf(vn, v0);
  t.set_leaf(un, u0);
  int loss = composite_graph(t, W, vn, un);
  t.backward(loss);

  Vec gw = oracle::fd_gradient([&](const Vec& w) { return eval(w, v0, u0); }, w0);
  Vec gv = oracle::fd_gradient([&](const Vec& v) { return eval(w0, v, u0); }, v0);
  Vec gu = oracle::fd_gradient([&](const Vec& u) { return eval(w0, v0, u); }, u0);
  CHECK(oracle::max_rel_err(Vec(t.adjoint(W)), gw) < 1e-6);
  CHECK(oracle::max_rel_err(Vec(t.adjoint(vn)), gv) < 1e-6);
  CHECK(oracle::max_rel_err(Vec(t.adjoint(un)), gu) < 1e-6);
}

TEST_CASE("random 3-layer MLP gradient matches finite differences below 1e-4") {
  Rng rng(5);
  std::vector<int> dims{4, 8, 8, 4};
  Mlp net = make_mlp(dims, rng);
  Vec theta(param_count(net));
  write_flat(net, theta.data());
  Vec x = rng.gaussian_vec(4);

  auto loss_at = [&](const Vec& th) {
    Tape t;
    int xn = t.constant(x);
    MlpTapeRef ref = build_mlp_tape(t, dims, xn);
    set_mlp_leaves(t, ref, th.data());
    t.forward();
    int out = ref.out;
    int l = t.scale(t.sum(t.hadamard(out, out)), 0.5);
    return t.scalar(l);
  };

  Tape t;
  int xn = t.constant(x);
  MlpTapeRef ref = build_mlp_tape(t, dims, xn);
  set_mlp_leaves(t, ref, theta.data());
  t.forward();
  int l = t.scale(t.sum(t.hadamard(ref.out, ref.out)), 0.5);
  t.backward(l);
  Vec grad(theta.size());
  collect_mlp_grads(t, ref, grad.data());

  Vec fd = oracle::fd_gradient(loss_at, theta, 1e-5);
  CHECK(oracle::max_rel_err(grad, fd) < 1e-4);
}

TEST_CASE("replaying a tape after leaf updates matches a fresh build") {
  Rng rng(9);
  std::vector<int> dims{3, 5, 3};
  Mlp net = make_mlp(dims, rng);
  Vec theta(param_count(net));
  write_flat(net, theta.data());

  Tape t;
  int xn = t.leaf(3, 1, false);
  MlpTapeRef ref = build_mlp_tape(t, dims, xn);
  set_mlp_leaves(t, ref, theta.data());

  for (int rep = 0; rep < 3; ++rep) {
    Vec x = rng.gaussian_vec(3);
    t.set_leaf(xn, x);
    t.forward();
    Vec via_tape = t.value(ref.out);
    CHECK(via_tape == mlp_forward(net, x));
  }
}
