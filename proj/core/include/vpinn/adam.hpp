#pragma once

#include <Eigen/Dense>
#include <span>

#include "vpinn/opcount.hpp"

namespace vpinn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-7;
};

// One Adam update on a flat parameter block; the same kernel instantiated
// with the counted scalar gives the exact per-step operation cost.
//   m <- b1 m + (1-b1) g            2 mul + 1 add
//   v <- b2 v + (1-b2) g g          3 mul + 1 add
//   p <- p - lr m/bc1 / (sqrt(v/bc2) + eps)
// with bias corrections bc1, bc2 precomputed once per step.
template <class T>
void adam_step_kernel(std::span<T> p, std::span<const T> g, std::span<T> m, std::span<T> v,
                      long t, const AdamConfig& cfg) {
  using std::sqrt;
  T b1(cfg.beta1), b2(cfg.beta2);
  T one_m_b1(1.0 - cfg.beta1), one_m_b2(1.0 - cfg.beta2);
  T bc1(1.0 - std::pow(cfg.beta1, static_cast<double>(t)));
  T bc2(1.0 - std::pow(cfg.beta2, static_cast<double>(t)));
  T lr(cfg.lr), eps(cfg.eps);
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = b1 * m[i] + one_m_b1 * g[i];
    v[i] = b2 * v[i] + one_m_b2 * (g[i] * g[i]);
    T mhat = m[i] / bc1;
    T vhat = v[i] / bc2;
    p[i] = p[i] - lr * mhat / (sqrt(vhat) + eps);
  }
}

// Per-parameter cost of the kernel above, for bulk accounting.
inline void count_adam(uint64_t n) {
  count_op(Op::mul, 6 * n);
  count_op(Op::add, 4 * n);
  count_op(Op::div, 3 * n);
  count_op(Op::sqrt, n);
}

class AdamState {
public:
  AdamState() = default;
  AdamState(Eigen::Index n, const AdamConfig& cfg) : cfg_(cfg) {
    m_ = Eigen::VectorXd::Zero(n);
    v_ = Eigen::VectorXd::Zero(n);
  }

  // Vectorized update; op cost reported in bulk with the kernel's counts.
  void step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grad);

  long iterations() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

private:
  AdamConfig cfg_;
  Eigen::VectorXd m_, v_;
  long t_ = 0;
};

}  // namespace vpinn
