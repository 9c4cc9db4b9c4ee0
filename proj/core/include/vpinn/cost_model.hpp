#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "vpinn/mlp.hpp"
#include "vpinn/opcount.hpp"
#include "vpinn/quadrature.hpp"
#include "vpinn/test_basis.hpp"

namespace vpinn {

// One optimizer iteration whose arithmetic is counted exactly:
//   gd_weak_backward   conventional GD, weak form, spatial gradient of the
//                      scalar network by reverse mode (recorded, so the
//                      parameter sweep differentiates through it) - this is
//                      the baseline every ratio divides by
//   lsgd_ultraweak     hybrid LS/GD without any trial derivatives
//   lsgd_weak_forward  hybrid LS/GD, trial Jacobians by forward mode
//   lsgd_weak_backward hybrid LS/GD, trial Jacobians by one reverse sweep
//                      per component
enum class IterationScheme {
  gd_weak_backward,
  lsgd_ultraweak,
  lsgd_weak_forward,
  lsgd_weak_backward,
};

const char* to_string(IterationScheme s);

// Exact operation counts of one iteration. Network evaluations, their
// sweeps, assembly, the LS solve and the update are all executed through
// counted arithmetic; per-point network work is executed once and scaled by
// K, which is exact because every point runs the identical op sequence (the
// tiny-scale cross-check below enforces this).
struct IterationCost {
  IterationScheme scheme;
  int n = 0, m = 0;
  long k = 0;
  uint64_t c_net = 0;        // scalar network eval at one point
  uint64_t vect_net = 0;     // step-1 trial evaluations over the batch
  uint64_t total = 0;        // full iteration
  OpCounter detail;
};

// Gradients produced by the fully executed (non-representative) iteration,
// for cross-checking against the batched trainer.
struct IterationValues {
  double loss = 0.0;
  Eigen::VectorXd omega;        // post-LS omega (LS schemes)
  Eigen::VectorXd grad_alpha;
  Eigen::VectorXd grad_omega;   // GD scheme only
};

// representative = true: per-point kernels run once and are scaled by K
// (fast, used by the sweep). false: every point is executed for real and the
// gradients come back too (tiny sizes only).
IterationCost counted_iteration(IterationScheme scheme, const MlpParameters& params,
                                const Basis& basis, const QuadratureBatch& batch,
                                bool representative, IterationValues* values = nullptr);

// --- Figure-style AD ratio sweep ---------------------------------------------

struct AdRatioRow {
  int d = 1;
  int n = 1;
  uint64_t net_ops = 0;       // vector net evaluation at one point
  uint64_t forward_ops = 0;   // spatial Jacobian via d-wide dual tangents
  uint64_t backward_ops = 0;  // spatial Jacobian via n reverse sweeps
  double forward_ratio() const { return double(forward_ops) / double(net_ops); }
  double backward_ratio() const { return double(backward_ops) / double(net_ops); }
};

struct AdSweepConfig {
  std::vector<int> dims = {1, 2};
  std::vector<int> n_values = {1, 4, 16, 64, 256};
  int depth = 5;
  int width = 1024;
};

std::vector<AdRatioRow> ad_ratio_sweep(const AdSweepConfig& cfg);
void write_ad_ratio_csv(const std::string& path, const std::vector<AdRatioRow>& rows);

// --- optimizer cost sweep -----------------------------------------------------

struct OptimizerSweepConfig {
  std::vector<int> n_values = {2, 4, 8, 16, 32, 64, 128, 256};
  int depth = 5;
  int width = 1024;
  int m_factor = 5;    // M = 5 N
  int k_factor = 10;   // K = 10 N
  uint64_t seed = 1;
};

struct OptimizerSweepRow {
  int n = 0;
  IterationCost baseline;                  // gd_weak_backward
  std::vector<IterationCost> numerators;   // the three LS/GD schemes
};

std::vector<OptimizerSweepRow> optimizer_cost_sweep(const OptimizerSweepConfig& cfg);
void write_optimizer_csv(const std::string& path, const std::vector<OptimizerSweepRow>& rows);

}  // namespace vpinn
