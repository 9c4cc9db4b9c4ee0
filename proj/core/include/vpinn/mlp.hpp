#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vpinn/dual.hpp"
#include "vpinn/tape.hpp"

namespace vpinn {

inline constexpr double kPi = 3.14159265358979323846;

struct dimension_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Trial network shape: tanh hidden stack on (0,pi)^d whose last hidden layer
// width equals the component count N; the scalar output is an unbiased,
// non-activated combination of the components after the boundary cut-off.
struct Architecture {
  int input_dim = 1;                 // d in {1, 2}
  std::vector<int> hidden = {16, 16, 16};

  int components() const { return hidden.back(); }  // N
  int depth() const { return static_cast<int>(hidden.size()); }

  static Architecture experiment(int d, int width) {
    return Architecture{d, {width, width, width}};
  }

  void validate() const;
  bool operator==(const Architecture&) const = default;
};

struct MlpParameters {
  struct Layer {
    Eigen::MatrixXd w;   // rows = fan_out, cols = fan_in
    Eigen::VectorXd b;
  };
  Architecture arch;
  std::vector<Layer> alpha;
  Eigen::VectorXd omega;

  std::size_t alpha_count() const;
  std::size_t param_count() const { return alpha_count() + omega.size(); }
  bool all_finite() const;
};

// Glorot-uniform weights and omega, zero biases; bit-identical for equal
// seeds.
MlpParameters init_parameters(const Architecture& arch, uint64_t seed);

std::string to_json(const MlpParameters& p);
MlpParameters params_from_json(const std::string& text);
void save_params(const MlpParameters& p, const std::string& path);
MlpParameters load_params(const std::string& path);

// --- cut-off functions -----------------------------------------------------
//
// xi vanishes exactly on the boundary of (0,pi)^d and nowhere else:
//   1D: xi(x)   = x (x - pi)
//   2D: xi(x,y) = x y (x - pi) (y - pi)
// Evaluated in the scalar type of the surrounding computation so both AD
// modes see it; it contributes only a handful of nodes.

template <class S, class Lift>
S cutoff_generic(std::span<const S> x, Lift&& lift_const) {
  auto pi_c = lift_const(kPi);  // param scalar of S
  if (x.size() == 1) return x[0] * (x[0] - pi_c);
  S fx = x[0] * (x[0] - pi_c);
  S fy = x[1] * (x[1] - pi_c);
  return fx * fy;
}

double cutoff_value(std::span<const double> x);
// Gradient of the cut-off in closed form.
void cutoff_gradient(std::span<const double> x, std::span<double> out);

// --- scalar-generic evaluation ----------------------------------------------
//
// One code path serves plain doubles, counted doubles, dual numbers and tape
// variables; the instantiating scalar decides the AD mode. Parameters are
// carried as the param_scalar of the computation type: plain doubles under
// forward mode (they carry no tangent), tape handles under reverse mode.

template <class S>
struct param_scalar {
  using type = S;
};
template <std::size_t W>
struct param_scalar<Dual<W>> {
  using type = double;
};
template <class S>
using param_scalar_t = typename param_scalar<S>::type;

template <class S>
struct BoundParams {
  using P = param_scalar_t<S>;
  struct Layer {
    int rows = 0, cols = 0;
    std::vector<P> w;  // row-major
    std::vector<P> b;
  };
  int input_dim = 0;
  std::vector<Layer> layers;
  std::vector<P> omega;
};

template <class S, class Lift>
BoundParams<S> bind_params(const MlpParameters& p, Lift&& lift, bool include_omega = true) {
  BoundParams<S> bp;
  bp.input_dim = p.arch.input_dim;
  bp.layers.reserve(p.alpha.size());
  for (const auto& layer : p.alpha) {
    typename BoundParams<S>::Layer bl;
    bl.rows = static_cast<int>(layer.w.rows());
    bl.cols = static_cast<int>(layer.w.cols());
    bl.w.reserve(static_cast<std::size_t>(bl.rows) * bl.cols);
    for (int i = 0; i < bl.rows; ++i)
      for (int j = 0; j < bl.cols; ++j) bl.w.push_back(lift(layer.w(i, j)));
    bl.b.reserve(bl.rows);
    for (int i = 0; i < bl.rows; ++i) bl.b.push_back(lift(layer.b(i)));
    bp.layers.push_back(std::move(bl));
  }
  if (include_omega) {
    bp.omega.reserve(p.omega.size());
    for (Eigen::Index n = 0; n < p.omega.size(); ++n) bp.omega.push_back(lift(p.omega(n)));
  }
  return bp;
}

// Hidden stack x_L without the cut-off.
template <class S>
std::vector<S> mlp_hidden_stack(const BoundParams<S>& bp, std::span<const S> x) {
  using std::tanh;
  if (static_cast<int>(x.size()) != bp.input_dim)
    throw dimension_error("input point dimension does not match the architecture");
  std::vector<S> cur(x.begin(), x.end());
  std::vector<S> next;
  for (const auto& layer : bp.layers) {
    next.clear();
    next.reserve(layer.rows);
    for (int i = 0; i < layer.rows; ++i) {
      S acc = cur[0] * layer.w[static_cast<std::size_t>(i) * layer.cols];
      for (int j = 1; j < layer.cols; ++j)
        acc = acc + cur[j] * layer.w[static_cast<std::size_t>(i) * layer.cols + j];
      acc = acc + layer.b[i];
      next.push_back(tanh(acc));
    }
    cur.swap(next);
  }
  return cur;
}

// u_alpha(x): cut-off applied componentwise.
template <class S, class Lift>
std::vector<S> eval_components_generic(const BoundParams<S>& bp, std::span<const S> x,
                                       Lift&& lift_const) {
  std::vector<S> h = mlp_hidden_stack(bp, x);
  S xi = cutoff_generic<S>(x, lift_const);
  for (S& v : h) v = xi * v;
  return h;
}

// u_{alpha,omega}(x) = omega . u_alpha(x).
template <class S, class Lift>
S eval_scalar_generic(const BoundParams<S>& bp, std::span<const S> x, Lift&& lift_const) {
  std::vector<S> u = eval_components_generic(bp, x, lift_const);
  S acc = u[0] * bp.omega[0];
  for (std::size_t n = 1; n < u.size(); ++n) acc = acc + u[n] * bp.omega[n];
  return acc;
}

// --- convenience wrappers (plain double path) -------------------------------

void check_in_domain(const Architecture& arch, std::span<const double> x);

// Componentwise trial values at one point (plain arithmetic, uncounted).
Eigen::VectorXd eval_components(const MlpParameters& p, std::span<const double> x);
double eval_scalar(const MlpParameters& p, std::span<const double> x);

// Spatial Jacobian of the components via forward mode: one evaluation with d
// seeded tangents. Rows follow components, columns the input directions.
Eigen::MatrixXd components_jacobian_forward(const MlpParameters& p, std::span<const double> x);

// Same Jacobian via reverse mode: one tape evaluation plus one sweep per
// component, parameters entering as unwatched constants.
Eigen::MatrixXd components_jacobian_backward(const MlpParameters& p, std::span<const double> x);

// Gradient of the scalar network with respect to every trainable parameter
// (alpha and omega), flattened in layer order then omega.
Eigen::VectorXd parameter_gradient(const MlpParameters& p, std::span<const double> x);

// Spatial gradient of the scalar network, forward and reverse routes.
Eigen::VectorXd scalar_spatial_gradient_forward(const MlpParameters& p, std::span<const double> x);
Eigen::VectorXd scalar_spatial_gradient_backward(const MlpParameters& p, std::span<const double> x);

}  // namespace vpinn
