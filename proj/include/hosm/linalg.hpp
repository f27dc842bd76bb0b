#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "hosm/rng.hpp"

namespace hosm {

using Vec = std::vector<double>;

// Dense row-major matrix. Vectors that take part in matrix algebra are
// treated as n x 1 columns.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0)
      : rows(r), cols(c), a(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}

  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
  static Mat diag(const Vec& d) {
    Mat m(static_cast<int>(d.size()), static_cast<int>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) m.a[i * d.size() + i] = d[i];
    return m;
  }
  static Mat column(const Vec& v) {
    Mat m(static_cast<int>(v.size()), 1);
    m.a = v;
    return m;
  }

  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
  std::size_t size() const { return a.size(); }
};

[[noreturn]] inline void linalg_fail(const std::string& what) { throw std::invalid_argument(what); }

bool all_finite(const Vec& v);
bool all_finite(const Mat& m);

double dot(const Vec& x, const Vec& y);
double norm2(const Vec& x);
double norm_inf(const Vec& x);
Vec vadd(const Vec& x, const Vec& y);
Vec vsub(const Vec& x, const Vec& y);
Vec vscale(const Vec& x, double c);
void axpy(double a, const Vec& x, Vec& y);  // y += a*x

Mat matmul(const Mat& A, const Mat& B);
Vec matvec(const Mat& A, const Vec& x);
Mat transpose(const Mat& A);
Mat madd(const Mat& A, const Mat& B);
Mat msub(const Mat& A, const Mat& B);
Mat mscale(const Mat& A, double c);
Mat outer(const Vec& x, const Vec& y);
double fro_norm2(const Mat& A);       // squared Frobenius norm
double max_abs(const Mat& A);
double max_asymmetry(const Mat& A);   // ||A - A^T||_inf

// Cholesky factorization of a symmetric positive definite matrix.
struct Cholesky {
  Mat L;  // lower triangular
  double log_det = 0.0;
};
Cholesky cholesky(const Mat& spd);
Vec chol_solve(const Cholesky& ch, const Vec& b);
Mat chol_inverse(const Cholesky& ch);

// Full symmetric eigendecomposition by cyclic Jacobi rotations.
// values sorted descending, vectors stored as columns of `vectors`.
struct SymEig {
  Vec values;
  Mat vectors;
};
SymEig sym_eig(const Mat& symmetric, double asym_tol = 1e-8);

// Haar-ish random orthogonal matrix via Gram-Schmidt on a Gaussian matrix.
Mat random_orthogonal(int n, Rng& rng);
// Random SPD matrix with condition number <= cond_max (log-uniform spectrum).
Mat random_spd(int n, double cond_max, Rng& rng);

}  // namespace hosm
