#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "vpinn/rng.hpp"

namespace vpinn {

// Partition of (0, pi) into cells (a_p, a_{p+1}); nodes strictly increasing
// with a_0 = 0 and a_P = pi.
struct Partition {
  std::vector<double> nodes;
  int cells() const { return static_cast<int>(nodes.size()) - 1; }
  void validate() const;
};

Partition uniform_partition(int cells);

// Graded partition for the boundary-singular problem: half of the cells sit
// in (0,1) on geometrically doubling nodes a_j = 2^{j-P'}, the other half
// uniformly on (1, pi). When P'-1 exceeds 256 doubling levels the smallest
// node would underflow the source term, so the same geometric layout is
// rescaled to bottom out at 2^{-256}.
Partition graded_partition(int cells);

// One axis of a sampled batch: two interior points per cell, mirror images
// through the cell midpoint, each carrying half the cell length as weight.
struct AxisBatch {
  Eigen::VectorXd points;
  Eigen::VectorXd weights;
};

AxisBatch sample_axis(const Partition& part, RandomStream& rng);

// Sampled integration batch; in 2D the two axes are drawn independently and
// combined as a tensor product (points flattened x-major, y fastest).
struct QuadratureBatch {
  int dim = 1;
  std::array<AxisBatch, 2> axis;
  Eigen::MatrixXd points;   // K x dim
  Eigen::VectorXd weights;  // K

  Eigen::Index size() const { return weights.size(); }
  double total_weight() const { return weights.sum(); }
};

QuadratureBatch sample_composite(const Partition& part, RandomStream& rng);
QuadratureBatch sample_composite_2d(const Partition& px, const Partition& py, RandomStream& rng);

// Applies the batch to a callable integrand (testing convenience); the
// callable's arity picks the dimension.
template <class F>
double integrate(const QuadratureBatch& q, F&& f) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < q.size(); ++k) {
    if constexpr (std::is_invocable_v<F, double, double>)
      acc += q.weights(k) * f(q.points(k, 0), q.points(k, 1));
    else
      acc += q.weights(k) * f(q.points(k, 0));
  }
  return acc;
}

}  // namespace vpinn
