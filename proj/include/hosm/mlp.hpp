#pragma once

#include <vector>

#include "hosm/linalg.hpp"
#include "hosm/rng.hpp"
#include "hosm/tape.hpp"

namespace hosm {

// Fully connected net: tanh on hidden layers, identity on the output layer.
// dims = {in, h1, ..., out}; layer i maps dims[i] -> dims[i+1].
struct Mlp {
  std::vector<Mat> w;  // out x in
  std::vector<Vec> b;

  int in_dim() const { return w.empty() ? 0 : w.front().cols; }
  int out_dim() const { return w.empty() ? 0 : w.back().rows; }
  int layers() const { return static_cast<int>(w.size()); }
};

Mlp make_mlp(const std::vector<int>& dims, Rng& rng);
Mlp make_zero_mlp(const std::vector<int>& dims);
std::vector<int> mlp_dims(const Mlp& m);

std::size_t param_count(const Mlp& m);
// Flat layout: per layer, row-major weights then bias.
void write_flat(const Mlp& m, double* dst);
void read_flat(Mlp& m, const double* src);

Vec mlp_forward(const Mlp& m, const Vec& x);
// Preallocated-scratch variant for hot loops; scratch is resized on first use.
void mlp_forward_into(const Mlp& m, const Vec& x, Vec& out, Vec& scratch_a, Vec& scratch_b);

// Tape subgraph for a forward pass. Parameter leaves are created once and can
// be refreshed from a flat parameter block before replaying the tape.
struct MlpTapeRef {
  std::vector<int> w_ids;
  std::vector<int> b_ids;
  int out = -1;
};

MlpTapeRef build_mlp_tape(Tape& tape, const std::vector<int>& dims, int x_node);
// Reuse existing parameter leaves (shared weights across several inputs).
int replay_mlp_tape(Tape& tape, const MlpTapeRef& params, const std::vector<int>& dims, int x_node);

void set_mlp_leaves(Tape& tape, const MlpTapeRef& ref, const double* flat);
// Accumulate leaf adjoints into a flat gradient block; returns values consumed.
std::size_t collect_mlp_grads(const Tape& tape, const MlpTapeRef& ref, double* flat_grad);

}  // namespace hosm
