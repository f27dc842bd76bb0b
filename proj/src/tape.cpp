#include "hosm/tape.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace hosm {

int Tape::push(Node n) {
  n.val.assign(static_cast<std::size_t>(n.rows) * static_cast<std::size_t>(n.cols), 0.0);
  n.adj.assign(n.val.size(), 0.0);
  nodes_.push_back(std::move(n));
  const std::size_t i = nodes_.size() - 1;
  if (nodes_[i].op != Op::leaf) eval_node(i);
  return static_cast<int>(i);
}

int Tape::leaf(int rows, int cols, bool needs_grad) {
  Node n;
  n.op = Op::leaf;
  n.rows = rows;
  n.cols = cols;
  n.needs_grad = needs_grad;
  return push(std::move(n));
}

int Tape::constant(const Mat& m) {
  int id = leaf(m.rows, m.cols, false);
  set_leaf(id, m);
  return id;
}

int Tape::constant(const Vec& v) {
  int id = leaf(static_cast<int>(v.size()), 1, false);
  set_leaf(id, v);
  return id;
}

int Tape::constant_scalar(double v) {
  int id = leaf(1, 1, false);
  nodes_[static_cast<std::size_t>(id)].val[0] = v;
  return id;
}

void Tape::set_leaf(int id, std::span<const double> data) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.op != Op::leaf) throw std::invalid_argument("set_leaf: node is not a leaf");
  if (data.size() != n.val.size()) throw std::invalid_argument("set_leaf: size mismatch");
  std::memcpy(n.val.data(), data.data(), data.size() * sizeof(double));
}

#define HOSM_TAPE_BINARY(NAME, OPTAG)                                   \
  int Tape::NAME(int a, int b) {                                        \
    const Node& na = nodes_[static_cast<std::size_t>(a)];               \
    const Node& nb = nodes_[static_cast<std::size_t>(b)];               \
    if (na.rows != nb.rows || na.cols != nb.cols)                       \
      throw std::invalid_argument(#NAME ": shape mismatch");            \
    Node n;                                                             \
    n.op = OPTAG;                                                       \
    n.a = a;                                                            \
    n.b = b;                                                            \
    n.rows = na.rows;                                                   \
    n.cols = na.cols;                                                   \
    n.needs_grad = na.needs_grad || nb.needs_grad;                      \
    return push(std::move(n));                                          \
  }

HOSM_TAPE_BINARY(add, Op::add)
HOSM_TAPE_BINARY(sub, Op::sub)
HOSM_TAPE_BINARY(hadamard, Op::hadamard)
#undef HOSM_TAPE_BINARY

int Tape::matmul(int a, int b) {
  const Node& na = nodes_[static_cast<std::size_t>(a)];
  const Node& nb = nodes_[static_cast<std::size_t>(b)];
  if (na.cols != nb.rows) throw std::invalid_argument("matmul: inner dimension mismatch");
  Node n;
  n.op = Op::matmul;
  n.a = a;
  n.b = b;
  n.rows = na.rows;
  n.cols = nb.cols;
  n.needs_grad = na.needs_grad || nb.needs_grad;
  return push(std::move(n));
}

int Tape::tanh_(int a) {
  const Node& na = nodes_[static_cast<std::size_t>(a)];
  Node n;
  n.op = Op::tanh_op;
  n.a = a;
  n.rows = na.rows;
  n.cols = na.cols;
  n.needs_grad = na.needs_grad;
  return push(std::move(n));
}

int Tape::sum(int a) {
  Node n;
  n.op = Op::sum_all;
  n.a = a;
  n.rows = 1;
  n.cols = 1;
  n.needs_grad = nodes_[static_cast<std::size_t>(a)].needs_grad;
  return push(std::move(n));
}

int Tape::rowsum(int a) {
  const Node& na = nodes_[static_cast<std::size_t>(a)];
  Node n;
  n.op = Op::rowsum;
  n.a = a;
  n.rows = na.rows;
  n.cols = 1;
  n.needs_grad = na.needs_grad;
  return push(std::move(n));
}

int Tape::scale(int a, double c) {
  const Node& na = nodes_[static_cast<std::size_t>(a)];
  Node n;
  n.op = Op::scale;
  n.a = a;
  n.rows = na.rows;
  n.cols = na.cols;
  n.c = c;
  n.needs_grad = na.needs_grad;
  return push(std::move(n));
}

int Tape::transpose(int a) {
  const Node& na = nodes_[static_cast<std::size_t>(a)];
  Node n;
  n.op = Op::transpose_op;
  n.a = a;
  n.rows = na.cols;
  n.cols = na.rows;
  n.needs_grad = na.needs_grad;
  return push(std::move(n));
}

int Tape::reshape(int a, int rows, int cols) {
  const Node& na = nodes_[static_cast<std::size_t>(a)];
  if (static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) != na.val.size())
    throw std::invalid_argument("reshape: element count mismatch");
  Node n;
  n.op = Op::reshape;
  n.a = a;
  n.rows = rows;
  n.cols = cols;
  n.needs_grad = na.needs_grad;
  return push(std::move(n));
}

int Tape::diag_embed(int a) {
  const Node& na = nodes_[static_cast<std::size_t>(a)];
  if (na.cols != 1) throw std::invalid_argument("diag_embed: expects a column vector");
  Node n;
  n.op = Op::diag_embed;
  n.a = a;
  n.rows = na.rows;
  n.cols = na.rows;
  n.needs_grad = na.needs_grad;
  return push(std::move(n));
}

void Tape::eval_node(std::size_t i) {
  Node& n = nodes_[i];
  const Node* A = n.a >= 0 ? &nodes_[static_cast<std::size_t>(n.a)] : nullptr;
  const Node* B = n.b >= 0 ? &nodes_[static_cast<std::size_t>(n.b)] : nullptr;
  switch (n.op) {
    case Op::leaf:
      break;
    case Op::matmul: {
      std::fill(n.val.begin(), n.val.end(), 0.0);
      const int m = A->rows, k = A->cols, c = B->cols;
      for (int r = 0; r < m; ++r) {
        for (int t = 0; t < k; ++t) {
          const double a = A->val[static_cast<std::size_t>(r) * k + t];
          if (a == 0.0) continue;
          const double* brow = &B->val[static_cast<std::size_t>(t) * c];
          double* out = &n.val[static_cast<std::size_t>(r) * c];
          for (int j = 0; j < c; ++j) out[j] += a * brow[j];
        }
      }
      break;
    }
    case Op::add:
      for (std::size_t j = 0; j < n.val.size(); ++j) n.val[j] = A->val[j] + B->val[j];
      break;
    case Op::sub:
      for (std::size_t j = 0; j < n.val.size(); ++j) n.val[j] = A->val[j] - B->val[j];
      break;
    case Op::hadamard:
      for (std::size_t j = 0; j < n.val.size(); ++j) n.val[j] = A->val[j] * B->val[j];
      break;
    case Op::tanh_op:
      for (std::size_t j = 0; j < n.val.size(); ++j) n.val[j] = std::tanh(A->val[j]);
      break;
    case Op::sum_all: {
      double s = 0.0;
      for (double v : A->val) s += v;
      n.val[0] = s;
      break;
    }
    case Op::rowsum:
      for (int r = 0; r < A->rows; ++r) {
        double s = 0.0;
        const double* row = &A->val[static_cast<std::size_t>(r) * A->cols];
        for (int j = 0; j < A->cols; ++j) s += row[j];
        n.val[static_cast<std::size_t>(r)] = s;
      }
      break;
    case Op::scale:
      for (std::size_t j = 0; j < n.val.size(); ++j) n.val[j] = n.c * A->val[j];
      break;
    case Op::transpose_op:
      for (int r = 0; r < A->rows; ++r)
        for (int j = 0; j < A->cols; ++j)
          n.val[static_cast<std::size_t>(j) * n.cols + r] = A->val[static_cast<std::size_t>(r) * A->cols + j];
      break;
    case Op::reshape:
      n.val = A->val;
      break;
    case Op::diag_embed:
      std::fill(n.val.begin(), n.val.end(), 0.0);
      for (int r = 0; r < A->rows; ++r) n.val[static_cast<std::size_t>(r) * n.cols + r] = A->val[static_cast<std::size_t>(r)];
      break;
  }
}

void Tape::forward() {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].op != Op::leaf) eval_node(i);
}

void Tape::backward(int loss, bool zero_leaf_adjoints) {
  Node& ln = nodes_[static_cast<std::size_t>(loss)];
  if (ln.rows != 1 || ln.cols != 1) throw std::invalid_argument("backward: loss node is not scalar");
  for (Node& n : nodes_)
    if (n.op != Op::leaf || zero_leaf_adjoints) std::fill(n.adj.begin(), n.adj.end(), 0.0);
  ln.adj[0] = 1.0;

  for (int i = loss; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.op == Op::leaf || !n.needs_grad) continue;
    Node* A = n.a >= 0 ? &nodes_[static_cast<std::size_t>(n.a)] : nullptr;
    Node* B = n.b >= 0 ? &nodes_[static_cast<std::size_t>(n.b)] : nullptr;
    switch (n.op) {
      case Op::leaf:
        break;
      case Op::matmul: {
        const int m = A->rows, k = A->cols, c = B->cols;
        if (A->needs_grad) {
          // dA += dC * B^T
          for (int r = 0; r < m; ++r)
            for (int t = 0; t < k; ++t) {
              double s = 0.0;
              const double* dcrow = &n.adj[static_cast<std::size_t>(r) * c];
              const double* brow = &B->val[static_cast<std::size_t>(t) * c];
              for (int j = 0; j < c; ++j) s += dcrow[j] * brow[j];
              A->adj[static_cast<std::size_t>(r) * k + t] += s;
            }
        }
        if (B->needs_grad) {
          // dB += A^T * dC
          for (int t = 0; t < k; ++t)
            for (int r = 0; r < m; ++r) {
              const double a = A->val[static_cast<std::size_t>(r) * k + t];
              if (a == 0.0) continue;
              const double* dcrow = &n.adj[static_cast<std::size_t>(r) * c];
              double* dbrow = &B->adj[static_cast<std::size_t>(t) * c];
              for (int j = 0; j < c; ++j) dbrow[j] += a * dcrow[j];
            }
        }
        break;
      }
      case Op::add:
        if (A->needs_grad)
          for (std::size_t j = 0; j < n.adj.size(); ++j) A->adj[j] += n.adj[j];
        if (B->needs_grad)
          for (std::size_t j = 0; j < n.adj.size(); ++j) B->adj[j] += n.adj[j];
        break;
      case Op::sub:
        if (A->needs_grad)
          for (std::size_t j = 0; j < n.adj.size(); ++j) A->adj[j] += n.adj[j];
        if (B->needs_grad)
          for (std::size_t j = 0; j < n.adj.size(); ++j) B->adj[j] -= n.adj[j];
        break;
      case Op::hadamard:
        if (A->needs_grad)
          for (std::size_t j = 0; j < n.adj.size(); ++j) A->adj[j] += n.adj[j] * B->val[j];
        if (B->needs_grad)
          for (std::size_t j = 0; j < n.adj.size(); ++j) B->adj[j] += n.adj[j] * A->val[j];
        break;
      case Op::tanh_op:
        for (std::size_t j = 0; j < n.adj.size(); ++j) A->adj[j] += n.adj[j] * (1.0 - n.val[j] * n.val[j]);
        break;
      case Op::sum_all:
        for (std::size_t j = 0; j < A->adj.size(); ++j) A->adj[j] += n.adj[0];
        break;
      case Op::rowsum:
        for (int r = 0; r < A->rows; ++r)
          for (int j = 0; j < A->cols; ++j) A->adj[static_cast<std::size_t>(r) * A->cols + j] += n.adj[static_cast<std::size_t>(r)];
        break;
      case Op::scale:
        for (std::size_t j = 0; j < n.adj.size(); ++j) A->adj[j] += n.c * n.adj[j];
        break;
      case Op::transpose_op:
        for (int r = 0; r < n.rows; ++r)
          for (int j = 0; j < n.cols; ++j)
            A->adj[static_cast<std::size_t>(j) * A->cols + r] += n.adj[static_cast<std::size_t>(r) * n.cols + j];
        break;
      case Op::reshape:
        for (std::size_t j = 0; j < n.adj.size(); ++j) A->adj[j] += n.adj[j];
        break;
      case Op::diag_embed:
        for (int r = 0; r < A->rows; ++r) A->adj[static_cast<std::size_t>(r)] += n.adj[static_cast<std::size_t>(r) * n.cols + r];
        break;
    }
  }
}

}  // namespace hosm
