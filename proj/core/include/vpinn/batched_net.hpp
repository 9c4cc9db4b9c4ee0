#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "vpinn/mlp.hpp"

namespace vpinn {

// Batched evaluation of the trial network over a point set, with optional
// forward-mode spatial tangent channels (one per input direction). All heavy
// work is level-3 BLAS through Eigen, processed in row blocks sized for the
// cache; results are bit-identical regardless of the block size only in the
// sense of a fixed blocking, which is what we use.
//
// Arithmetic is reported to the active counter in bulk, with the counts of
// the equivalent scalar loop nest (a length-k dot product costs k muls and
// k-1 adds); tangent-channel work also feeds the tangent meta-counter.

struct BatchedStack {
  Eigen::MatrixXd x;                                   // K x d
  std::vector<Eigen::MatrixXd> h;                      // h[l]: K x w_l, l = 0..L (h[0] = x)
  std::vector<std::array<Eigen::MatrixXd, 2>> t;       // tangent channels per layer, 1..L
  std::vector<std::array<Eigen::MatrixXd, 2>> u;       // pre-activation tangents t_{l-1} W^T
  bool tangents = false;
};

// Cut-off values and gradient over the batch.
struct CutoffBatch {
  Eigen::VectorXd xi;       // K
  Eigen::MatrixXd dxi;      // K x d
};

CutoffBatch cutoff_batch(const Eigen::MatrixXd& x);

void batched_forward(const MlpParameters& p, const Eigen::MatrixXd& x, bool want_tangents,
                     BatchedStack& out);

// Trial component values Phi = xi .* h_L and spatial gradients
// G^c = dxi_c .* h_L + xi .* t_L^c (only when the stack carries tangents).
struct TrialSamples {
  Eigen::MatrixXd phi;                    // K x N
  std::array<Eigen::MatrixXd, 2> grad;    // per channel, K x N
  bool has_grad = false;
};

TrialSamples trial_samples(const BatchedStack& s, const CutoffBatch& cut);

// Accumulates dL/dalpha (and optionally dL/domega) for a loss whose adjoints
// with respect to Phi and G are given. Null pointers mean zero adjoint.
struct ParamGrads {
  std::vector<Eigen::MatrixXd> w;
  std::vector<Eigen::VectorXd> b;
  Eigen::VectorXd omega;

  void resize_like(const MlpParameters& p);
  void flatten_alpha(Eigen::VectorXd& out) const;
};

void batched_backprop(const MlpParameters& p, const BatchedStack& s, const CutoffBatch& cut,
                      const Eigen::MatrixXd* d_phi,
                      const std::array<const Eigen::MatrixXd*, 2>& d_grad, ParamGrads& grads);

// Scalar network values and spatial gradient over a point set via one
// reverse pass per chunk (cheapest route for a scalar output). Used for
// validation metrics; numerically identical to the tangent route up to
// rounding.
void batched_scalar_gradient(const MlpParameters& p, const Eigen::MatrixXd& x, Eigen::VectorXd& u,
                             Eigen::MatrixXd& grad_u);

// Flat views over parameters in layer order (weights row-major, then bias),
// then omega; the order is the contract for save/restore and Adam state.
Eigen::VectorXd flatten_alpha(const MlpParameters& p);
void unflatten_alpha(const Eigen::VectorXd& v, MlpParameters& p);

// Bulk-count helpers (shared with assembly).
void count_gemm(std::ptrdiff_t m, std::ptrdiff_t k, std::ptrdiff_t n, bool accumulate = false,
                bool tangent = false);
void count_elementwise(Op op, std::ptrdiff_t n, bool tangent = false);

}  // namespace vpinn
