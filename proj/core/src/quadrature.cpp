#include "vpinn/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include "vpinn/mlp.hpp"

namespace vpinn {

void Partition::validate() const {
  if (nodes.size() < 2) throw std::invalid_argument("partition needs at least one cell");
  if (nodes.front() != 0.0 || nodes.back() != kPi)
    throw std::invalid_argument("partition must cover (0, pi)");
  for (std::size_t i = 1; i < nodes.size(); ++i)
    if (!(nodes[i] > nodes[i - 1]))
      throw std::invalid_argument("partition nodes must be strictly increasing");
}

Partition uniform_partition(int cells) {
  if (cells < 1) throw std::invalid_argument("cell count must be positive");
  Partition p;
  p.nodes.resize(cells + 1);
  for (int i = 0; i <= cells; ++i) p.nodes[i] = kPi * i / cells;
  p.nodes.back() = kPi;
  return p;
}

Partition graded_partition(int cells) {
  if (cells < 2 || cells % 2 != 0)
    throw std::invalid_argument("graded partition needs an even cell count >= 2");
  const int half = cells / 2;
  Partition p;
  p.nodes.push_back(0.0);
  // Nodes 2^{j - half} for j = 1..half; beyond 256 doubling levels the same
  // layout is compressed to keep the smallest node at 2^{-256}.
  const double depth = std::min(256.0, static_cast<double>(half - 1));
  for (int j = 1; j <= half; ++j) {
    double expo = (half > 1) ? -depth * (half - j) / (half - 1) : 0.0;
    p.nodes.push_back(std::exp2(expo));
  }
  for (int j = 1; j <= half; ++j) p.nodes.push_back(1.0 + (kPi - 1.0) * j / half);
  p.nodes.back() = kPi;
  p.validate();
  return p;
}

AxisBatch sample_axis(const Partition& part, RandomStream& rng) {
  const int cells = part.cells();
  AxisBatch out;
  out.points.resize(2 * cells);
  out.weights.resize(2 * cells);
  for (int c = 0; c < cells; ++c) {
    const double a = part.nodes[c], b = part.nodes[c + 1];
    const double halfw = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    const double u = rng.master();
    out.points(2 * c) = mid - halfw * u;
    out.points(2 * c + 1) = mid + halfw * u;
    out.weights(2 * c) = halfw;
    out.weights(2 * c + 1) = halfw;
  }
  return out;
}

QuadratureBatch sample_composite(const Partition& part, RandomStream& rng) {
  QuadratureBatch q;
  q.dim = 1;
  q.axis[0] = sample_axis(part, rng);
  const Eigen::Index k = q.axis[0].points.size();
  q.points.resize(k, 1);
  q.points.col(0) = q.axis[0].points;
  q.weights = q.axis[0].weights;
  return q;
}

QuadratureBatch sample_composite_2d(const Partition& px, const Partition& py, RandomStream& rng) {
  QuadratureBatch q;
  q.dim = 2;
  q.axis[0] = sample_axis(px, rng);
  q.axis[1] = sample_axis(py, rng);
  const Eigen::Index kx = q.axis[0].points.size();
  const Eigen::Index ky = q.axis[1].points.size();
  q.points.resize(kx * ky, 2);
  q.weights.resize(kx * ky);
  for (Eigen::Index i = 0; i < kx; ++i)
    for (Eigen::Index j = 0; j < ky; ++j) {
      const Eigen::Index k = i * ky + j;
      q.points(k, 0) = q.axis[0].points(i);
      q.points(k, 1) = q.axis[1].points(j);
      q.weights(k) = q.axis[0].weights(i) * q.axis[1].weights(j);
    }
  return q;
}

}  // namespace vpinn
