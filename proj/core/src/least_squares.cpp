#include "vpinn/least_squares.hpp"

namespace vpinn {

double default_lambda(const Eigen::MatrixXd& b) {
  return 1e-12 * b.squaredNorm() / static_cast<double>(b.cols());
}

Eigen::VectorXd ls_solve(const Eigen::MatrixXd& b, const Eigen::VectorXd& l, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("lambda must be non-negative");
  if (b.rows() < b.cols())
    throw std::invalid_argument("least-squares system must have M >= N");
  const Eigen::Index m = b.rows(), n = b.cols();
  const Eigen::Index rows = m + (lambda > 0.0 ? n : 0);
  Eigen::MatrixXd stacked = Eigen::MatrixXd::Zero(rows, n);
  stacked.topRows(m) = b;
  if (lambda > 0.0)
    stacked.bottomRows(n).diagonal().setConstant(std::sqrt(lambda));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows);
  rhs.head(m) = l;

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(stacked);
  const auto& r = qr.matrixQR();
  const double scale = r.diagonal().cwiseAbs().maxCoeff();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (std::abs(r(j, j)) <= 1e-13 * scale)
      throw singular_system_error("rank-deficient least-squares system; use lambda > 0");
  }
  // Counted at the cost of the reference solver: 2(M+N)N^2 multiply-adds to
  // leading order plus the triangular solve.
  const auto rn = static_cast<uint64_t>(rows), nn = static_cast<uint64_t>(n);
  count_op(Op::mul, 2 * rn * nn * nn);
  count_op(Op::add, 2 * rn * nn * nn);
  count_op(Op::div, nn * (nn + 1) / 2);
  count_op(Op::sqrt, nn);
  return qr.solve(rhs);
}

}  // namespace vpinn
