#include "hosm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hosm {

bool all_finite(const Vec& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

bool all_finite(const Mat& m) {
  for (double x : m.a)
    if (!std::isfinite(x)) return false;
  return true;
}

double dot(const Vec& x, const Vec& y) {
  if (x.size() != y.size()) linalg_fail("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(const Vec& x) { return std::sqrt(dot(x, x)); }

double norm_inf(const Vec& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::fabs(v));
  return m;
}

Vec vadd(const Vec& x, const Vec& y) {
  if (x.size() != y.size()) linalg_fail("vadd: size mismatch");
  Vec r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] + y[i];
  return r;
}

Vec vsub(const Vec& x, const Vec& y) {
  if (x.size() != y.size()) linalg_fail("vsub: size mismatch");
  Vec r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] - y[i];
  return r;
}

Vec vscale(const Vec& x, double c) {
  Vec r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = c * x[i];
  return r;
}

void axpy(double a, const Vec& x, Vec& y) {
  if (x.size() != y.size()) linalg_fail("axpy: size mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

Mat matmul(const Mat& A, const Mat& B) {
  if (A.cols != B.rows) linalg_fail("matmul: inner dimension mismatch");
  Mat C(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i) {
    for (int k = 0; k < A.cols; ++k) {
      const double aik = A(i, k);
      if (aik == 0.0) continue;
      const double* brow = &B.a[static_cast<std::size_t>(k) * B.cols];
      double* crow = &C.a[static_cast<std::size_t>(i) * C.cols];
      for (int j = 0; j < B.cols; ++j) crow[j] += aik * brow[j];
    }
  }
  return C;
}

Vec matvec(const Mat& A, const Vec& x) {
  if (A.cols != static_cast<int>(x.size())) linalg_fail("matvec: dimension mismatch");
  Vec y(static_cast<std::size_t>(A.rows), 0.0);
  for (int i = 0; i < A.rows; ++i) {
    const double* row = &A.a[static_cast<std::size_t>(i) * A.cols];
    double s = 0.0;
    for (int j = 0; j < A.cols; ++j) s += row[j] * x[j];
    y[i] = s;
  }
  return y;
}

Mat transpose(const Mat& A) {
  Mat T(A.cols, A.rows);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) T(j, i) = A(i, j);
  return T;
}

Mat madd(const Mat& A, const Mat& B) {
  if (A.rows != B.rows || A.cols != B.cols) linalg_fail("madd: shape mismatch");
  Mat C(A.rows, A.cols);
  for (std::size_t i = 0; i < A.a.size(); ++i) C.a[i] = A.a[i] + B.a[i];
  return C;
}

Mat msub(const Mat& A, const Mat& B) {
  if (A.rows != B.rows || A.cols != B.cols) linalg_fail("msub: shape mismatch");
  Mat C(A.rows, A.cols);
  for (std::size_t i = 0; i < A.a.size(); ++i) C.a[i] = A.a[i] - B.a[i];
  return C;
}

Mat mscale(const Mat& A, double c) {
  Mat C(A.rows, A.cols);
  for (std::size_t i = 0; i < A.a.size(); ++i) C.a[i] = c * A.a[i];
  return C;
}

Mat outer(const Vec& x, const Vec& y) {
  Mat C(static_cast<int>(x.size()), static_cast<int>(y.size()));
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) C.a[i * y.size() + j] = x[i] * y[j];
  return C;
}

double fro_norm2(const Mat& A) {
  double s = 0.0;
  for (double v : A.a) s += v * v;
  return s;
}

double max_abs(const Mat& A) {
  double m = 0.0;
  for (double v : A.a) m = std::max(m, std::fabs(v));
  return m;
}

double max_asymmetry(const Mat& A) {
  if (A.rows != A.cols) linalg_fail("max_asymmetry: not square");
  double m = 0.0;
  for (int i = 0; i < A.rows; ++i)
    for (int j = i + 1; j < A.cols; ++j) m = std::max(m, std::fabs(A(i, j) - A(j, i)));
  return m;
}

Cholesky cholesky(const Mat& spd) {
  if (spd.rows != spd.cols) linalg_fail("cholesky: not square");
  const int n = spd.rows;
  Cholesky ch;
  ch.L = Mat(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = spd(i, j);
      for (int k = 0; k < j; ++k) s -= ch.L(i, k) * ch.L(j, k);
      if (i == j) {
        if (s <= 0.0 || !std::isfinite(s)) linalg_fail("cholesky: matrix not positive definite");
        ch.L(i, i) = std::sqrt(s);
        ch.log_det += 2.0 * std::log(ch.L(i, i));
      } else {
        ch.L(i, j) = s / ch.L(j, j);
      }
    }
  }
  return ch;
}

Vec chol_solve(const Cholesky& ch, const Vec& b) {
  const int n = ch.L.rows;
  if (static_cast<int>(b.size()) != n) linalg_fail("chol_solve: size mismatch");
  Vec y(b);
  for (int i = 0; i < n; ++i) {
    double s = y[i];
    for (int k = 0; k < i; ++k) s -= ch.L(i, k) * y[k];
    y[i] = s / ch.L(i, i);
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = y[i];
    for (int k = i + 1; k < n; ++k) s -= ch.L(k, i) * y[k];
    y[i] = s / ch.L(i, i);
  }
  return y;
}

Mat chol_inverse(const Cholesky& ch) {
  const int n = ch.L.rows;
  Mat inv(n, n);
  Vec e(static_cast<std::size_t>(n), 0.0);
  for (int j = 0; j < n; ++j) {
    e[j] = 1.0;
    Vec col = chol_solve(ch, e);
    for (int i = 0; i < n; ++i) inv(i, j) = col[i];
    e[j] = 0.0;
  }
  // enforce exact symmetry against round-off
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double v = 0.5 * (inv(i, j) + inv(j, i));
      inv(i, j) = v;
      inv(j, i) = v;
    }
  return inv;
}

SymEig sym_eig(const Mat& symmetric, double asym_tol) {
  if (symmetric.rows != symmetric.cols) linalg_fail("sym_eig: not square");
  if (max_asymmetry(symmetric) > asym_tol) linalg_fail("sym_eig: matrix is not symmetric");
  const int n = symmetric.rows;
  Mat A = symmetric;
  // work on the symmetrized copy so the iteration sees an exactly symmetric input
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double v = 0.5 * (A(i, j) + A(j, i));
      A(i, j) = v;
      A(j, i) = v;
    }
  Mat V = Mat::identity(n);

  auto off_norm = [&]() {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) s += A(i, j) * A(i, j);
    return s;
  };

  double scale = 0.0;
  for (double v : A.a) scale = std::max(scale, std::fabs(v));
  const double tol = std::max(1e-300, 1e-26 * scale * scale);

  for (int sweep = 0; sweep < 128 && off_norm() > tol; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (std::fabs(apq) < 1e-300) continue;
        const double app = A(p, p), aqq = A(q, q);
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                      : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = V(k, p), vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int i, int j) { return A(i, i) > A(j, j); });

  SymEig out;
  out.values.resize(static_cast<std::size_t>(n));
  out.vectors = Mat(n, n);
  for (int j = 0; j < n; ++j) {
    out.values[static_cast<std::size_t>(j)] = A(idx[static_cast<std::size_t>(j)], idx[static_cast<std::size_t>(j)]);
    for (int i = 0; i < n; ++i) out.vectors(i, j) = V(i, idx[static_cast<std::size_t>(j)]);
  }
  return out;
}

Mat random_orthogonal(int n, Rng& rng) {
  Mat Q(n, n);
  for (double& v : Q.a) v = rng.gaussian();
  // modified Gram-Schmidt, columns
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < j; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += Q(i, k) * Q(i, j);
      for (int i = 0; i < n; ++i) Q(i, j) -= s * Q(i, k);
    }
    double nrm = 0.0;
    for (int i = 0; i < n; ++i) nrm += Q(i, j) * Q(i, j);
    nrm = std::sqrt(nrm);
    if (nrm < 1e-12) linalg_fail("random_orthogonal: degenerate draw");
    for (int i = 0; i < n; ++i) Q(i, j) /= nrm;
  }
  return Q;
}

Mat random_spd(int n, double cond_max, Rng& rng) {
  if (cond_max < 1.0) linalg_fail("random_spd: cond_max must be >= 1");
  Mat Q = random_orthogonal(n, rng);
  const double log_cond = std::log(cond_max);
  Vec lam(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) lam[static_cast<std::size_t>(i)] = std::exp(rng.uniform() * log_cond - 0.5 * log_cond);
  Mat D = Mat::diag(lam);
  Mat S = matmul(matmul(Q, D), transpose(Q));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double v = 0.5 * (S(i, j) + S(j, i));
      S(i, j) = v;
      S(j, i) = v;
    }
  return S;
}

}  // namespace hosm
