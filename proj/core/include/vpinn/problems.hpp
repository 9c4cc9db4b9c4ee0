#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "vpinn/quadrature.hpp"
#include "vpinn/test_basis.hpp"

namespace vpinn {

enum class PartitionKind { uniform, graded };

// A manufactured Poisson problem -lap(u*) = f on (0,pi)^d with u* = 0 on the
// boundary, carrying everything the runs need in closed form: the source f,
// the exact solution and its gradient, the exact energy norm ||u*||_U, and
// the discretization the experiments use by default.
struct Problem {
  std::string id;
  int dim = 1;
  std::function<double(const double*)> exact;        // u*(x)
  std::function<void(const double*, double*)> exact_grad;
  std::function<double(const double*)> source;       // f = -lap u*
  double norm_u_sq = 0.0;                            // ||u*||_U^2 = int |grad u*|^2

  // Experiment defaults.
  int width = 16;                 // N
  int modes1 = 32, modes2 = 1;    // M (per axis in 2D)
  long points1 = 1024, points2 = 1;  // quadrature points (per axis in 2D), 2 per cell
  int val_factor = 8;             // validation points per axis multiplier: 8 in 1D, 2 in 2D
  PartitionKind partition = PartitionKind::uniform;
  int default_iters = 1000;

  Basis default_basis() const {
    return dim == 1 ? Basis::one_d(modes1) : Basis::two_d(modes1, modes2);
  }

  double norm_u() const { return std::sqrt(norm_u_sq); }
};

const Problem& get_problem(const std::string& id);
std::vector<std::string> problem_ids();

// ||e||_U^2 = sum_k gamma_k |grad u(x_k) - grad u*(x_k)|^2 on the given
// batch, and the relative error ||e||_U / ||u*||_U with the exact
// denominator.
struct ErrorNorms {
  double error_sq = 0.0;
  double relative = 0.0;
};
ErrorNorms error_norms(const Eigen::MatrixXd& grad_u, const Problem& prob,
                       const QuadratureBatch& q);

}  // namespace vpinn
