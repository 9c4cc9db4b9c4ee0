#include "vpinn/mlp.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "vpinn/rng.hpp"

namespace vpinn {

uint64_t substream_seed(uint64_t run_seed, std::string_view tag) {
  // FNV-1a over the tag, then one SplitMix64 round.
  uint64_t h = 1469598103934665603ull;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  uint64_t z = run_seed ^ h;
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

void Architecture::validate() const {
  if (input_dim != 1 && input_dim != 2)
    throw dimension_error("input dimension must be 1 or 2");
  if (hidden.empty()) throw dimension_error("at least one hidden layer required");
  for (int w : hidden)
    if (w < 1) throw dimension_error("hidden widths must be positive");
}

std::size_t MlpParameters::alpha_count() const {
  std::size_t n = 0;
  for (const auto& l : alpha) n += static_cast<std::size_t>(l.w.size()) + l.b.size();
  return n;
}

bool MlpParameters::all_finite() const {
  for (const auto& l : alpha)
    if (!l.w.allFinite() || !l.b.allFinite()) return false;
  return omega.allFinite();
}

MlpParameters init_parameters(const Architecture& arch, uint64_t seed) {
  arch.validate();
  RandomStream rng(seed);
  MlpParameters p;
  p.arch = arch;
  int fan_in = arch.input_dim;
  for (int width : arch.hidden) {
    MlpParameters::Layer layer;
    layer.w.resize(width, fan_in);
    const double lim = std::sqrt(6.0 / (fan_in + width));
    for (int i = 0; i < width; ++i)
      for (int j = 0; j < fan_in; ++j) layer.w(i, j) = rng.uniform(-lim, lim);
    layer.b = Eigen::VectorXd::Zero(width);
    p.alpha.push_back(std::move(layer));
    fan_in = width;
  }
  const int n = arch.components();
  const double lim = std::sqrt(6.0 / (n + 1));
  p.omega.resize(n);
  for (int i = 0; i < n; ++i) p.omega(i) = rng.uniform(-lim, lim);
  return p;
}

std::string to_json(const MlpParameters& p) {
  nlohmann::json j;
  j["input_dim"] = p.arch.input_dim;
  j["hidden"] = p.arch.hidden;
  auto& layers = j["layers"] = nlohmann::json::array();
  for (const auto& l : p.alpha) {
    nlohmann::json jl;
    jl["rows"] = l.w.rows();
    jl["cols"] = l.w.cols();
    std::vector<double> w;
    w.reserve(l.w.size());
    for (Eigen::Index i = 0; i < l.w.rows(); ++i)
      for (Eigen::Index c = 0; c < l.w.cols(); ++c) w.push_back(l.w(i, c));
    jl["weights"] = w;
    jl["bias"] = std::vector<double>(l.b.data(), l.b.data() + l.b.size());
    layers.push_back(std::move(jl));
  }
  j["omega"] = std::vector<double>(p.omega.data(), p.omega.data() + p.omega.size());
  return j.dump(2);
}

MlpParameters params_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  MlpParameters p;
  p.arch.input_dim = j.at("input_dim").get<int>();
  p.arch.hidden = j.at("hidden").get<std::vector<int>>();
  p.arch.validate();
  for (const auto& jl : j.at("layers")) {
    MlpParameters::Layer l;
    const Eigen::Index rows = jl.at("rows").get<Eigen::Index>();
    const Eigen::Index cols = jl.at("cols").get<Eigen::Index>();
    auto w = jl.at("weights").get<std::vector<double>>();
    auto b = jl.at("bias").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(w.size()) != rows * cols ||
        static_cast<Eigen::Index>(b.size()) != rows)
      throw std::invalid_argument("parameter file has inconsistent layer shapes");
    l.w.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index c = 0; c < cols; ++c) l.w(i, c) = w[static_cast<std::size_t>(i) * cols + c];
    l.b = Eigen::Map<Eigen::VectorXd>(b.data(), rows);
    p.alpha.push_back(std::move(l));
  }
  auto om = j.at("omega").get<std::vector<double>>();
  p.omega = Eigen::Map<Eigen::VectorXd>(om.data(), static_cast<Eigen::Index>(om.size()));
  if (p.omega.size() != p.arch.components())
    throw std::invalid_argument("omega length does not match the last hidden width");
  return p;
}

void save_params(const MlpParameters& p, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << to_json(p) << '\n';
}

MlpParameters load_params(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return params_from_json(ss.str());
}

double cutoff_value(std::span<const double> x) {
  if (x.size() == 1) return x[0] * (x[0] - kPi);
  return x[0] * x[1] * (x[0] - kPi) * (x[1] - kPi);
}

void cutoff_gradient(std::span<const double> x, std::span<double> out) {
  if (x.size() == 1) {
    out[0] = 2.0 * x[0] - kPi;
    return;
  }
  const double gx = 2.0 * x[0] - kPi;
  const double gy = 2.0 * x[1] - kPi;
  out[0] = gx * x[1] * (x[1] - kPi);
  out[1] = gy * x[0] * (x[0] - kPi);
}

void check_in_domain(const Architecture& arch, std::span<const double> x) {
  if (static_cast<int>(x.size()) != arch.input_dim)
    throw dimension_error("point dimension does not match the architecture");
  for (double c : x)
    if (!(c >= 0.0 && c <= kPi))
      throw std::domain_error("point lies outside the closed domain [0,pi]^d");
}

namespace {
auto lift_id = [](double v) { return v; };
}

Eigen::VectorXd eval_components(const MlpParameters& p, std::span<const double> x) {
  check_in_domain(p.arch, x);
  auto bp = bind_params<double>(p, lift_id);
  auto u = eval_components_generic<double>(bp, x, lift_id);
  return Eigen::Map<Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size()));
}

double eval_scalar(const MlpParameters& p, std::span<const double> x) {
  check_in_domain(p.arch, x);
  auto bp = bind_params<double>(p, lift_id);
  return eval_scalar_generic<double>(bp, x, lift_id);
}

namespace {

template <std::size_t W>
Eigen::MatrixXd components_jacobian_fw(const MlpParameters& p, std::span<const double> x) {
  auto lift = [](double v) { return v; };
  auto bp = bind_params<Dual<W>>(p, lift);
  std::vector<Dual<W>> xd;
  for (std::size_t c = 0; c < W; ++c) xd.push_back(Dual<W>::seeded(x[c], c));
  auto u = eval_components_generic<Dual<W>>(bp, xd, lift);
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(u.size()), W);
  for (std::size_t n = 0; n < u.size(); ++n)
    for (std::size_t c = 0; c < W; ++c) jac(static_cast<Eigen::Index>(n), c) = u[n].t[c];
  return jac;
}

}  // namespace

Eigen::MatrixXd components_jacobian_forward(const MlpParameters& p, std::span<const double> x) {
  check_in_domain(p.arch, x);
  if (x.size() == 1) return components_jacobian_fw<1>(p, x);
  return components_jacobian_fw<2>(p, x);
}

Eigen::MatrixXd components_jacobian_backward(const MlpParameters& p, std::span<const double> x) {
  check_in_domain(p.arch, x);
  DTape tape;
  tape.reserve(4 * p.param_count());
  auto lift_c = [&](double v) { return tape.constant(v); };
  auto bp = bind_params<DTape::Var>(p, lift_c);
  std::vector<DTape::Var> xv;
  std::vector<DTape::Var> leaves;
  for (double c : x) {
    xv.push_back(tape.leaf(c));
    leaves.push_back(xv.back());
  }
  auto u = eval_components_generic<DTape::Var>(bp, xv, lift_c);
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(u.size()), static_cast<Eigen::Index>(x.size()));
  for (std::size_t n = 0; n < u.size(); ++n) {
    auto g = tape.gradient(u[n], leaves);
    for (std::size_t c = 0; c < x.size(); ++c) jac(static_cast<Eigen::Index>(n), c) = g[c];
  }
  return jac;
}

Eigen::VectorXd parameter_gradient(const MlpParameters& p, std::span<const double> x) {
  check_in_domain(p.arch, x);
  DTape tape;
  tape.reserve(4 * p.param_count());
  std::vector<DTape::Var> leaves;
  leaves.reserve(p.param_count());
  auto lift_leaf = [&](double v) {
    leaves.push_back(tape.leaf(v));
    return leaves.back();
  };
  auto lift_c = [&](double v) { return tape.constant(v); };
  auto bp = bind_params<DTape::Var>(p, lift_leaf);
  std::vector<DTape::Var> xv;
  for (double c : x) xv.push_back(tape.constant(c));
  auto root = eval_scalar_generic<DTape::Var>(bp, xv, lift_c);
  auto g = tape.gradient(root, leaves);
  return Eigen::Map<Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(g.size()));
}

Eigen::VectorXd scalar_spatial_gradient_forward(const MlpParameters& p, std::span<const double> x) {
  Eigen::MatrixXd jac = components_jacobian_forward(p, x);
  return jac.transpose() * p.omega;
}

Eigen::VectorXd scalar_spatial_gradient_backward(const MlpParameters& p, std::span<const double> x) {
  check_in_domain(p.arch, x);
  DTape tape;
  tape.reserve(4 * p.param_count());
  auto lift_c = [&](double v) { return tape.constant(v); };
  auto bp = bind_params<DTape::Var>(p, lift_c);
  std::vector<DTape::Var> xv;
  std::vector<DTape::Var> leaves;
  for (double c : x) {
    xv.push_back(tape.leaf(c));
    leaves.push_back(xv.back());
  }
  auto root = eval_scalar_generic<DTape::Var>(bp, xv, lift_c);
  auto g = tape.gradient(root, leaves);
  return Eigen::Map<Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(g.size()));
}

}  // namespace vpinn
