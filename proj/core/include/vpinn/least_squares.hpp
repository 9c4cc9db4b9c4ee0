#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "vpinn/opcount.hpp"

namespace vpinn {

struct singular_system_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Scale-relative default regularizer: 1e-8 * ||B||_F^2 / N.
double default_lambda(const Eigen::MatrixXd& b);

// omega = argmin ||B w - l||^2 + lambda ||w||^2, via Householder QR of the
// stacked matrix [B; sqrt(lambda) I] against [l; 0]. Stacking keeps the
// conditioning of B rather than of B^T B. lambda = 0 is allowed and raises
// singular_system_error on rank deficiency.
Eigen::VectorXd ls_solve(const Eigen::MatrixXd& b, const Eigen::VectorXd& l, double lambda);

// Reference Householder solver, generic over the scalar so the counted type
// can measure the exact operation cost of a solve. Solves the same stacked
// problem; used by the cost model and as an independent check of ls_solve.
template <class T>
std::vector<T> householder_lsq(std::vector<T> a, std::vector<T> rhs, std::size_t rows,
                               std::size_t cols) {
  using std::sqrt;
  if (rows < cols) throw std::invalid_argument("least squares needs rows >= cols");
  auto at = [&](std::size_t r, std::size_t c) -> T& { return a[r * cols + c]; };
  for (std::size_t j = 0; j < cols; ++j) {
    T norm2 = at(j, j) * at(j, j);
    for (std::size_t i = j + 1; i < rows; ++i) norm2 += at(i, j) * at(i, j);
    T norm = sqrt(norm2);
    if (!(static_cast<double>(norm) > 0.0))
      throw singular_system_error("rank-deficient system with zero regularization");
    // Reflector sign selection is bookkeeping, not arithmetic: keep the
    // count value-independent.
    if (static_cast<double>(at(j, j)) > 0.0) norm = T(-static_cast<double>(norm));
    count_op(Op::cmp, 2);
    // Householder vector v = x - norm e_j, applied as I - 2 v v^T / (v^T v).
    T vj = at(j, j) - norm;
    T vtv = vj * vj;
    for (std::size_t i = j + 1; i < rows; ++i) vtv += at(i, j) * at(i, j);
    at(j, j) = norm;
    for (std::size_t c = j + 1; c < cols; ++c) {
      T dot = vj * at(j, c);
      for (std::size_t i = j + 1; i < rows; ++i) dot += at(i, j) * at(i, c);
      T scale = (dot + dot) / vtv;
      at(j, c) = at(j, c) - scale * vj;
      for (std::size_t i = j + 1; i < rows; ++i) at(i, c) = at(i, c) - scale * at(i, j);
    }
    T dot = vj * rhs[j];
    for (std::size_t i = j + 1; i < rows; ++i) dot += at(i, j) * rhs[i];
    T scale = (dot + dot) / vtv;
    rhs[j] = rhs[j] - scale * vj;
    for (std::size_t i = j + 1; i < rows; ++i) rhs[i] = rhs[i] - scale * at(i, j);
  }
  // Back substitution on the top block.
  std::vector<T> x(cols);
  for (std::size_t j = cols; j-- > 0;) {
    T acc = rhs[j];
    for (std::size_t c = j + 1; c < cols; ++c) acc = acc - at(j, c) * x[c];
    x[j] = acc / at(j, j);
  }
  return x;
}

// Stacks [B; sqrt(lambda) I] / [l; 0] and runs the reference solver.
template <class T>
std::vector<T> householder_ls_solve(const Eigen::MatrixXd& b, const Eigen::VectorXd& l,
                                    double lambda) {
  const std::size_t m = b.rows(), n = b.cols();
  const std::size_t rows = m + (lambda > 0.0 ? n : 0);
  std::vector<T> a(rows * n, T(0.0));
  std::vector<T> rhs(rows, T(0.0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] = T(b(i, j));
  if (lambda > 0.0) {
    using std::sqrt;
    T sl = sqrt(T(lambda));
    for (std::size_t j = 0; j < n; ++j) a[(m + j) * n + j] = sl;
  }
  for (std::size_t i = 0; i < m; ++i) rhs[i] = T(l(i));
  return householder_lsq(std::move(a), std::move(rhs), rows, n);
}

}  // namespace vpinn
