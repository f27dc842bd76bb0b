#pragma once

#include <span>
#include <vector>

#include "hosm/linalg.hpp"

namespace hosm {

// Reverse-mode differentiation record. Nodes are appended in topological
// order and evaluated eagerly; forward() re-evaluates the same graph after
// leaves change, so one tape can be replayed over a whole batch without
// reallocating. backward() accumulates adjoints for every node that depends
// on a gradient leaf.
class Tape {
 public:
  enum class Op {
    leaf,
    matmul,
    add,
    sub,
    hadamard,
    tanh_op,
    sum_all,   // r x c -> 1 x 1
    rowsum,    // r x c -> r x 1
    scale,     // times compile-time constant
    transpose_op,
    reshape,
    diag_embed  // n x 1 -> n x n
  };

  struct Node {
    Op op;
    int a = -1, b = -1;
    int rows = 0, cols = 0;
    double c = 0.0;
    bool needs_grad = false;
    Vec val;
    Vec adj;
  };

  int leaf(int rows, int cols, bool needs_grad);
  int constant(const Mat& m);
  int constant(const Vec& v);   // column
  int constant_scalar(double v);

  void set_leaf(int id, std::span<const double> data);
  void set_leaf(int id, const Vec& v) { set_leaf(id, std::span<const double>(v.data(), v.size())); }
  void set_leaf(int id, const Mat& m) { set_leaf(id, std::span<const double>(m.a.data(), m.a.size())); }

  int matmul(int a, int b);
  int add(int a, int b);
  int sub(int a, int b);
  int hadamard(int a, int b);
  int tanh_(int a);
  int sum(int a);
  int rowsum(int a);
  int scale(int a, double c);
  int transpose(int a);
  int reshape(int a, int rows, int cols);
  int diag_embed(int a);

  // Recompute all non-leaf values in node order.
  void forward();
  // Reverse sweep from a scalar loss node; throws on non-scalar loss.
  // With zero_leaf_adjoints = false, leaf adjoints accumulate across calls
  // (used to sum per-sample gradients in a fixed order without extra buffers).
  void backward(int loss, bool zero_leaf_adjoints = true);

  const Vec& value(int id) const { return nodes_[static_cast<std::size_t>(id)].val; }
  const Vec& adjoint(int id) const { return nodes_[static_cast<std::size_t>(id)].adj; }
  double scalar(int id) const { return nodes_[static_cast<std::size_t>(id)].val[0]; }
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  int push(Node n);
  void eval_node(std::size_t i);
  std::vector<Node> nodes_;
};

}  // namespace hosm
