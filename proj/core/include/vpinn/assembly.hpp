#pragma once

#include <Eigen/Dense>
#include <functional>

#include "vpinn/batched_net.hpp"
#include "vpinn/quadrature.hpp"
#include "vpinn/test_basis.hpp"

namespace vpinn {

// Weak bilinear entries integrate grad(u) . grad(v_m); the ultraweak route
// integrates -u . lap(v_m) instead and needs no trial derivatives at all.
enum class Formulation { weak, ultraweak };

// Per-batch test-function tables. In 1D, column m of each matrix holds the
// mode-(m+1) values over the points. In 2D, per-axis sine/cosine tables are
// kept so that assembly can run through the tensor-product structure; the
// scaled cosine tables carry the mode factor m.
struct BasisTables {
  int dim = 1;
  Basis basis;
  // 1D
  Eigen::MatrixXd v;     // K x M     v_m(x_k)
  Eigen::MatrixXd dv;    // K x M     v_m'(x_k)
  Eigen::MatrixXd lap;   // K x M     -m^2 v_m(x_k)
  // 2D (per axis, raw sin(m t) and m cos(m t))
  Eigen::MatrixXd sx, cxm, sy, cym;   // (Kx x M1), (Ky x M2)
  Eigen::MatrixXd inv_norm;           // M1 x M2
  Eigen::MatrixXd eig;                // M1 x M2: m1^2 + m2^2
};

BasisTables build_tables(const Basis& basis, const QuadratureBatch& q);

struct AssembledSystem {
  Eigen::MatrixXd b;   // M x N
  Eigen::VectorXd l;   // M
};

// Bilinear-form matrix from trial samples. Weak needs ts.grad, ultraweak
// ts.phi only.
Eigen::MatrixXd assemble_matrix(const TrialSamples& ts, const BasisTables& tb,
                                const QuadratureBatch& q, Formulation form);

// Load vector l_m = sum_k gamma_k f(x_k) v_m(x_k) from source samples.
Eigen::VectorXd assemble_load(const Eigen::VectorXd& f_vals, const BasisTables& tb,
                              const QuadratureBatch& q);

// Residual vector of a scalar trial from its samples: r_m = b(u, v_m) - l_m.
// Weak uses grad_u (K x d); ultraweak uses u values.
Eigen::VectorXd action_residual(const Eigen::VectorXd& u_vals, const Eigen::MatrixXd& grad_u,
                                const Eigen::VectorXd& l, const BasisTables& tb,
                                const QuadratureBatch& q, Formulation form);

// Adjoint of the loss sum_m r_m^2 with respect to the per-point trial data:
// weak fills w_grad (K x d) with dL/d(grad u)(x_k); ultraweak fills w_val (K)
// with dL/d(u(x_k)).
void residual_adjoints(const Eigen::VectorXd& r, const BasisTables& tb, const QuadratureBatch& q,
                       Formulation form, Eigen::MatrixXd* w_grad, Eigen::VectorXd* w_val);

// --- network-level operations ----------------------------------------------

AssembledSystem assemble(const MlpParameters& p, const Basis& basis, const QuadratureBatch& q,
                         Formulation form, const std::function<double(const double*)>& source);

// Loss evaluated through the action form (never materializing the matrix).
double loss_via_action(const MlpParameters& p, const Basis& basis, const QuadratureBatch& q,
                       Formulation form, const std::function<double(const double*)>& source);

struct SpectralReport {
  Basis basis;                       // extended basis the report covers
  Eigen::VectorXd coefficients;      // residual spectral coefficients
  Eigen::VectorXd cumulative;        // running sum of squares
  std::vector<int> order;            // flat mode index per row (level order in 2D)
};

// Per-mode residual coefficients on a validation batch over an enlarged
// basis. Rows are ordered so the training block comes first: the cumulative
// value at M then equals the loss on the same batch.
SpectralReport spectral_report(const MlpParameters& p, const Basis& training_basis,
                               int extension_factor, const QuadratureBatch& q, Formulation form,
                               const std::function<double(const double*)>& source);

void write_spectrum_csv(const std::string& path, const SpectralReport& initial,
                        const SpectralReport& final_report);

}  // namespace vpinn
