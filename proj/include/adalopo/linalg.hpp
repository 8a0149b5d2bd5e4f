#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace adalopo {

//! Raised when a linear system is numerically singular (raw interval systems
//! with fewer than kappa+1 distinct points, see locpoly).
struct SingularSystemError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

//! Dense symmetric matrix of small dimension (at most 11x11 in this project:
//! polynomial degrees are capped at kappa = 10).
class SymMatrix {
public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t dim) : dim_(dim), a_(dim * dim, 0.0) {}

  std::size_t dim() const { return dim_; }

  double operator()(std::size_t i, std::size_t j) const { return a_[i * dim_ + j]; }

  //! Sets both (i,j) and (j,i).
  void set(std::size_t i, std::size_t j, double v) {
    a_[i * dim_ + j] = v;
    a_[j * dim_ + i] = v;
  }

  void add_to_diagonal(double v) {
    for (std::size_t i = 0; i < dim_; ++i) a_[i * dim_ + i] += v;
  }

  const std::vector<double>& data() const { return a_; }

private:
  std::size_t dim_ = 0;
  std::vector<double> a_;
};

//! Smallest eigenvalue of a symmetric matrix. Closed form for dim <= 2,
//! cyclic Jacobi iteration otherwise (converges to near machine precision
//! for these sizes; relative tolerance ~1e-14).
double smallest_eigenvalue(const SymMatrix& m);

//! Solves A x = b for symmetric A. Tries a Cholesky factorization first
//! (the regularized local polynomial systems are positive definite by
//! construction), falls back to full-pivot Gaussian elimination, and
//! re-checks the residual: ||A x - b||_inf <= 1e-8 ||b||_inf.
//! Throws SingularSystemError when no acceptable solution exists.
std::vector<double> solve_symmetric(const SymMatrix& a, const std::vector<double>& b);

} // namespace adalopo
