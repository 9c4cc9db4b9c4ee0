#pragma once

#include <Eigen/Dense>

namespace vpinn {

// Vectorized elementwise tanh for doubles. Eigen's packet tanh is
// float-only, so the batched path computes (e^{2x}-1)/(e^{2x}+1) through the
// vectorized exp kernel, switching to the odd Taylor polynomial below
// |x| = 0.05 where the quotient form loses bits. Agrees with std::tanh to a
// few ulp over the full range (saturated beyond |x| = 19).
void fast_tanh_inplace(Eigen::Ref<Eigen::MatrixXd> m);

double fast_tanh_scalar(double x);

// sin(m x), m = 1..M, for a vector of points, by complex rotation from the
// m = 1 values: one sincos per point, six flops per further mode. Columns are
// modes. Drift stays near machine precision for the mode counts used here.
void sine_table(const Eigen::VectorXd& x, int modes, Eigen::MatrixXd& s, Eigen::MatrixXd& c);

}  // namespace vpinn
