#include "hosm/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace hosm {

Mlp make_mlp(const std::vector<int>& dims, Rng& rng) {
  if (dims.size() < 2) throw std::invalid_argument("make_mlp: need at least input and output dims");
  Mlp m;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int in = dims[l], out = dims[l + 1];
    Mat w(out, in);
    const double s = std::sqrt(6.0 / static_cast<double>(in + out));
    for (double& v : w.a) v = (2.0 * rng.uniform() - 1.0) * s;
    m.w.push_back(std::move(w));
    m.b.emplace_back(static_cast<std::size_t>(out), 0.0);
  }
  return m;
}

Mlp make_zero_mlp(const std::vector<int>& dims) {
  if (dims.size() < 2) throw std::invalid_argument("make_zero_mlp: need at least input and output dims");
  Mlp m;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    m.w.emplace_back(dims[l + 1], dims[l]);
    m.b.emplace_back(static_cast<std::size_t>(dims[l + 1]), 0.0);
  }
  return m;
}

std::vector<int> mlp_dims(const Mlp& m) {
  std::vector<int> dims;
  dims.push_back(m.in_dim());
  for (const Mat& w : m.w) dims.push_back(w.rows);
  return dims;
}

std::size_t param_count(const Mlp& m) {
  std::size_t n = 0;
  for (std::size_t l = 0; l < m.w.size(); ++l) n += m.w[l].a.size() + m.b[l].size();
  return n;
}

void write_flat(const Mlp& m, double* dst) {
  for (std::size_t l = 0; l < m.w.size(); ++l) {
    for (double v : m.w[l].a) *dst++ = v;
    for (double v : m.b[l]) *dst++ = v;
  }
}

void read_flat(Mlp& m, const double* src) {
  for (std::size_t l = 0; l < m.w.size(); ++l) {
    for (double& v : m.w[l].a) v = *src++;
    for (double& v : m.b[l]) v = *src++;
  }
}

Vec mlp_forward(const Mlp& m, const Vec& x) {
  Vec out, a, b;
  mlp_forward_into(m, x, out, a, b);
  return out;
}

void mlp_forward_into(const Mlp& m, const Vec& x, Vec& out, Vec& scratch_a, Vec& scratch_b) {
  if (static_cast<int>(x.size()) != m.in_dim()) throw std::invalid_argument("mlp_forward: input dimension mismatch");
  const Vec* cur = &x;
  Vec* bufs[2] = {&scratch_a, &scratch_b};
  int which = 0;
  const int L = m.layers();
  for (int l = 0; l < L; ++l) {
    const Mat& w = m.w[static_cast<std::size_t>(l)];
    const Vec& bias = m.b[static_cast<std::size_t>(l)];
    Vec& dst = (l == L - 1) ? out : *bufs[which];
    dst.assign(static_cast<std::size_t>(w.rows), 0.0);
    for (int i = 0; i < w.rows; ++i) {
      const double* row = &w.a[static_cast<std::size_t>(i) * w.cols];
      double s = bias[static_cast<std::size_t>(i)];
      for (int j = 0; j < w.cols; ++j) s += row[j] * (*cur)[static_cast<std::size_t>(j)];
      dst[static_cast<std::size_t>(i)] = (l == L - 1) ? s : std::tanh(s);
    }
    cur = &dst;
    which ^= 1;
  }
}

MlpTapeRef build_mlp_tape(Tape& tape, const std::vector<int>& dims, int x_node) {
  MlpTapeRef ref;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    ref.w_ids.push_back(tape.leaf(dims[l + 1], dims[l], true));
    ref.b_ids.push_back(tape.leaf(dims[l + 1], 1, true));
  }
  ref.out = replay_mlp_tape(tape, ref, dims, x_node);
  return ref;
}

int replay_mlp_tape(Tape& tape, const MlpTapeRef& params, const std::vector<int>& dims, int x_node) {
  int h = x_node;
  const std::size_t L = dims.size() - 1;
  for (std::size_t l = 0; l < L; ++l) {
    int z = tape.add(tape.matmul(params.w_ids[l], h), params.b_ids[l]);
    h = (l + 1 == L) ? z : tape.tanh_(z);
  }
  return h;
}

void set_mlp_leaves(Tape& tape, const MlpTapeRef& ref, const double* flat) {
  for (std::size_t l = 0; l < ref.w_ids.size(); ++l) {
    const Tape::Node& wn = tape.node(ref.w_ids[l]);
    tape.set_leaf(ref.w_ids[l], std::span<const double>(flat, wn.val.size()));
    flat += wn.val.size();
    const Tape::Node& bn = tape.node(ref.b_ids[l]);
    tape.set_leaf(ref.b_ids[l], std::span<const double>(flat, bn.val.size()));
    flat += bn.val.size();
  }
}

std::size_t collect_mlp_grads(const Tape& tape, const MlpTapeRef& ref, double* flat_grad) {
  std::size_t consumed = 0;
  for (std::size_t l = 0; l < ref.w_ids.size(); ++l) {
    for (double v : tape.adjoint(ref.w_ids[l])) flat_grad[consumed++] = v;
    for (double v : tape.adjoint(ref.b_ids[l])) flat_grad[consumed++] = v;
  }
  return consumed;
}

}  // namespace hosm
