#include "adalopo/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace adalopo {

namespace {

// One cyclic Jacobi sweep; returns the off-diagonal Frobenius norm before
// the sweep.
double jacobi_sweep(std::vector<double>& a, std::size_t n) {
  double off = 0.0;
  for (std::size_t p = 0; p + 1 < n; ++p)
    for (std::size_t q = p + 1; q < n; ++q) off += 2.0 * a[p * n + q] * a[p * n + q];
  if (off == 0.0) return 0.0;
  for (std::size_t p = 0; p + 1 < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) {
      double apq = a[p * n + q];
      if (apq == 0.0) continue;
      double app = a[p * n + p], aqq = a[q * n + q];
      double theta = (aqq - app) / (2.0 * apq);
      double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
      double c = 1.0 / std::sqrt(t * t + 1.0);
      double s = t * c;
      for (std::size_t k = 0; k < n; ++k) {
        double akp = a[k * n + p], akq = a[k * n + q];
        a[k * n + p] = c * akp - s * akq;
        a[k * n + q] = s * akp + c * akq;
      }
      for (std::size_t k = 0; k < n; ++k) {
        double apk = a[p * n + k], aqk = a[q * n + k];
        a[p * n + k] = c * apk - s * aqk;
        a[q * n + k] = s * apk + c * aqk;
      }
    }
  }
  return off;
}

// Cholesky solve; returns false on a nonpositive pivot.
bool cholesky_solve(const SymMatrix& m, const std::vector<double>& b, std::vector<double>& x) {
  const std::size_t n = m.dim();
  std::vector<double> l(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
      if (i == j) {
        if (s <= 0.0) return false;
        l[i * n + i] = std::sqrt(s);
      } else {
        l[i * n + j] = s / l[j * n + j];
      }
    }
  }
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l[i * n + k] * y[k];
    y[i] = s / l[i * n + i];
  }
  x.assign(n, 0.0);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l[k * n + ii] * x[k];
    x[ii] = s / l[ii * n + ii];
  }
  return true;
}

// Gaussian elimination with full pivoting.
bool full_pivot_solve(const SymMatrix& m, const std::vector<double>& b, std::vector<double>& x) {
  const std::size_t n = m.dim();
  std::vector<double> a(n * (n + 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i * (n + 1) + j] = m(i, j);
    a[i * (n + 1) + n] = b[i];
  }
  std::vector<std::size_t> col(n);
  for (std::size_t j = 0; j < n; ++j) col[j] = j;
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(m(i, j)));
  const double tiny = scale * 1e-13;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pi = k, pj = k;
    double best = 0.0;
    for (std::size_t i = k; i < n; ++i)
      for (std::size_t j = k; j < n; ++j)
        if (std::abs(a[i * (n + 1) + col[j]]) > best) {
          best = std::abs(a[i * (n + 1) + col[j]]);
          pi = i;
          pj = j;
        }
    if (best <= tiny) return false;
    for (std::size_t j = 0; j <= n; ++j) std::swap(a[k * (n + 1) + j], a[pi * (n + 1) + j]);
    std::swap(col[k], col[pj]);
    double piv = a[k * (n + 1) + col[k]];
    for (std::size_t i = k + 1; i < n; ++i) {
      double f = a[i * (n + 1) + col[k]] / piv;
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) a[i * (n + 1) + col[j]] -= f * a[k * (n + 1) + col[j]];
      a[i * (n + 1) + n] -= f * a[k * (n + 1) + n];
    }
  }
  std::vector<double> z(n);
  for (std::size_t kk = n; kk-- > 0;) {
    double s = a[kk * (n + 1) + n];
    for (std::size_t j = kk + 1; j < n; ++j) s -= a[kk * (n + 1) + col[j]] * z[j];
    z[kk] = s / a[kk * (n + 1) + col[kk]];
  }
  x.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) x[col[j]] = z[j];
  return true;
}

double residual_inf(const SymMatrix& a, const std::vector<double>& x, const std::vector<double>& b) {
  double r = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    double s = -b[i];
    for (std::size_t j = 0; j < a.dim(); ++j) s += a(i, j) * x[j];
    r = std::max(r, std::abs(s));
  }
  return r;
}

} // namespace

double smallest_eigenvalue(const SymMatrix& m) {
  const std::size_t n = m.dim();
  if (n == 0) throw std::invalid_argument("smallest_eigenvalue: empty matrix");
  if (n == 1) return m(0, 0);
  if (n == 2) {
    double a = m(0, 0), c = m(1, 1), b = m(0, 1);
    double mid = 0.5 * (a + c);
    double rad = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
    return mid - rad;
  }
  std::vector<double> a = m.data();
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0.0;
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = jacobi_sweep(a, n);
    if (off <= 1e-28 * scale * scale) break;
  }
  double lo = a[0];
  for (std::size_t i = 1; i < n; ++i) lo = std::min(lo, a[i * n + i]);
  return lo;
}

std::vector<double> solve_symmetric(const SymMatrix& a, const std::vector<double>& b) {
  if (a.dim() != b.size()) throw std::invalid_argument("solve_symmetric: size mismatch");
  double bnorm = 0.0;
  for (double v : b) bnorm = std::max(bnorm, std::abs(v));
  const double tol = 1e-8 * bnorm;

  std::vector<double> x;
  if (cholesky_solve(a, b, x) && residual_inf(a, x, b) <= tol) return x;
  if (full_pivot_solve(a, b, x) && residual_inf(a, x, b) <= tol) return x;
  throw SingularSystemError("solve_symmetric: system is singular or severely ill-conditioned");
}

} // namespace adalopo
