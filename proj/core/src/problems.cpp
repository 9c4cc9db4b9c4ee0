#include "vpinn/problems.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "vpinn/batched_net.hpp"
#include "vpinn/mlp.hpp"

namespace vpinn {

namespace {

// u* = sin(a x) sin(b x):  f = (a^2+b^2) sin(ax) sin(bx) - 2ab cos(ax) cos(bx)
// and ||u*'||^2 = (pi/4)(a^2+b^2) when a is a positive integer and b = 1/2.
Problem sine_product_1d(const std::string& id, double a, double b) {
  Problem p;
  p.id = id;
  p.dim = 1;
  p.exact = [a, b](const double* x) { return std::sin(a * x[0]) * std::sin(b * x[0]); };
  p.exact_grad = [a, b](const double* x, double* g) {
    g[0] = a * std::cos(a * x[0]) * std::sin(b * x[0]) +
           b * std::sin(a * x[0]) * std::cos(b * x[0]);
  };
  p.source = [a, b](const double* x) {
    return (a * a + b * b) * std::sin(a * x[0]) * std::sin(b * x[0]) -
           2.0 * a * b * std::cos(a * x[0]) * std::cos(b * x[0]);
  };
  p.norm_u_sq = kPi / 4.0 * (a * a + b * b);
  return p;
}

// u* = x^beta (pi - x), singular gradient at x = 0.
//   f = pi beta (1-beta) x^{beta-2} + beta (beta+1) x^{beta-1}
//   ||u*'||^2 = pi^{2 beta + 1} [ beta^2/(2 beta - 1) - (beta+1)
//               + (beta+1)^2/(2 beta + 1) ]   (valid for beta > 1/2)
Problem singular_1d(double beta) {
  Problem p;
  p.id = "singular1d";
  p.dim = 1;
  p.exact = [beta](const double* x) { return std::pow(x[0], beta) * (kPi - x[0]); };
  p.exact_grad = [beta](const double* x, double* g) {
    g[0] = kPi * beta * std::pow(x[0], beta - 1.0) - (beta + 1.0) * std::pow(x[0], beta);
  };
  p.source = [beta](const double* x) {
    return kPi * beta * (1.0 - beta) * std::pow(x[0], beta - 2.0) +
           beta * (beta + 1.0) * std::pow(x[0], beta - 1.0);
  };
  p.norm_u_sq = std::pow(kPi, 2.0 * beta + 1.0) *
                (beta * beta / (2.0 * beta - 1.0) - (beta + 1.0) +
                 (beta + 1.0) * (beta + 1.0) / (2.0 * beta + 1.0));
  return p;
}

// u* = sin(a x) sin(2 y) e^{(x+y)/2} with a = 2 eta. Separable as
// g(x) h(y) with g = sin(ax) e^{x/2}, h = sin(2y) e^{y/2}; closed-form
// integrals with E = e^pi - 1:
//   int e^x cos(2cx) = E / (1+4c^2)           (integer c)
//   int e^x sin(2cx) = -2c E / (1+4c^2)
Problem exp_sine_2d(const std::string& id, double eta) {
  const double a = 2.0 * eta;
  Problem p;
  p.id = id;
  p.dim = 2;
  p.exact = [a](const double* x) {
    return std::sin(a * x[0]) * std::sin(2.0 * x[1]) * std::exp(0.5 * (x[0] + x[1]));
  };
  p.exact_grad = [a](const double* x, double* g) {
    const double e = std::exp(0.5 * (x[0] + x[1]));
    const double sx = std::sin(a * x[0]), cx = std::cos(a * x[0]);
    const double sy = std::sin(2.0 * x[1]), cy = std::cos(2.0 * x[1]);
    g[0] = (a * cx + 0.5 * sx) * sy * e;
    g[1] = sx * (2.0 * cy + 0.5 * sy) * e;
  };
  p.source = [a](const double* x) {
    const double e = std::exp(0.5 * (x[0] + x[1]));
    const double sx = std::sin(a * x[0]), cx = std::cos(a * x[0]);
    const double sy = std::sin(2.0 * x[1]), cy = std::cos(2.0 * x[1]);
    return e * ((a * a + 3.5) * sx * sy - a * cx * sy - 2.0 * sx * cy);
  };
  const double big_e = std::exp(kPi) - 1.0;
  // int e^x cos(2cx) and int e^x sin(2cx) over (0, pi), integer c.
  auto int_exp_cos = [&](double c) { return big_e / (1.0 + 4.0 * c * c); };
  auto int_exp_sin = [&](double c) { return -2.0 * c * big_e / (1.0 + 4.0 * c * c); };
  auto sq_int = [&](double c) {  // int g^2 with g = sin(cx) e^{x/2}
    return 0.5 * (big_e - int_exp_cos(c));
  };
  auto dsq_int = [&](double c) {  // int g'^2
    return c * c * 0.5 * (big_e + int_exp_cos(c)) + 0.5 * c * int_exp_sin(c) +
           0.125 * (big_e - int_exp_cos(c));
  };
  p.norm_u_sq = dsq_int(a) * sq_int(2.0) + sq_int(a) * dsq_int(2.0);
  return p;
}

std::map<std::string, Problem> make_registry() {
  std::map<std::string, Problem> reg;

  Problem smooth = sine_product_1d("smooth1d", 4.0, 0.5);
  smooth.width = 16;
  smooth.modes1 = 32;       // M = 2N
  smooth.points1 = 1024;    // K = 32M
  reg[smooth.id] = smooth;

  Problem high = sine_product_1d("highfreq1d", 40.0, 0.5);
  high.width = 64;
  high.modes1 = 128;
  high.points1 = 4096;
  reg[high.id] = high;

  Problem sing = singular_1d(0.7);
  sing.width = 16;
  sing.modes1 = 128;
  sing.points1 = 4096;      // K = 32M
  sing.partition = PartitionKind::graded;
  reg[sing.id] = sing;

  Problem s2 = exp_sine_2d("smooth2d", 1.0);
  s2.width = 32;
  s2.modes1 = 8;
  s2.modes2 = 8;
  s2.points1 = 128;
  s2.points2 = 128;
  s2.val_factor = 2;
  reg[s2.id] = s2;

  Problem h2 = exp_sine_2d("highfreq2d", 10.0);
  h2.width = 128;
  h2.modes1 = 64;
  h2.modes2 = 16;
  h2.points1 = 512;
  h2.points2 = 128;
  h2.val_factor = 2;
  reg[h2.id] = h2;

  return reg;
}

const std::map<std::string, Problem>& registry() {
  static const std::map<std::string, Problem> reg = make_registry();
  return reg;
}

}  // namespace

const Problem& get_problem(const std::string& id) {
  const auto& reg = registry();
  auto it = reg.find(id);
  if (it == reg.end()) throw std::invalid_argument("unknown problem id: " + id);
  return it->second;
}

std::vector<std::string> problem_ids() {
  std::vector<std::string> out;
  for (const auto& [id, _] : registry()) out.push_back(id);
  return out;
}

ErrorNorms error_norms(const Eigen::MatrixXd& grad_u, const Problem& prob,
                       const QuadratureBatch& q) {
  double acc = 0.0;
  std::array<double, 2> g{};
  for (Eigen::Index k = 0; k < q.size(); ++k) {
    std::array<double, 2> xp{q.points(k, 0), prob.dim == 2 ? q.points(k, 1) : 0.0};
    prob.exact_grad(xp.data(), g.data());
    double d2 = 0.0;
    for (int c = 0; c < prob.dim; ++c) {
      const double diff = grad_u(k, c) - g[c];
      d2 += diff * diff;
    }
    acc += q.weights(k) * d2;
  }
  count_op(Op::mul, static_cast<uint64_t>(q.size()) * (prob.dim + 1));
  count_op(Op::add, static_cast<uint64_t>(q.size()) * (2 * prob.dim));
  ErrorNorms e;
  e.error_sq = acc;
  e.relative = std::sqrt(acc) / prob.norm_u();
  return e;
}

}  // namespace vpinn
