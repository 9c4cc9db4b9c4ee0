#include "vpinn/run_config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace vpinn {

const char* to_string(OptimizerKind k) {
  return k == OptimizerKind::adam ? "adam" : "ls-adam";
}
const char* to_string(Formulation f) {
  return f == Formulation::weak ? "weak" : "ultraweak";
}
const char* to_string(AdMode m) { return m == AdMode::forward ? "forward" : "backward"; }

OptimizerKind optimizer_from_string(const std::string& s) {
  if (s == "adam") return OptimizerKind::adam;
  if (s == "ls-adam" || s == "ls_adam" || s == "lsadam") return OptimizerKind::ls_adam;
  throw std::invalid_argument("unknown optimizer: " + s + " (use adam | ls-adam)");
}
Formulation formulation_from_string(const std::string& s) {
  if (s == "weak") return Formulation::weak;
  if (s == "ultraweak") return Formulation::ultraweak;
  throw std::invalid_argument("unknown formulation: " + s + " (use weak | ultraweak)");
}
AdMode ad_mode_from_string(const std::string& s) {
  if (s == "forward") return AdMode::forward;
  if (s == "backward") return AdMode::backward;
  throw std::invalid_argument("unknown ad-mode: " + s + " (use forward | backward)");
}

void RunConfig::resolve() {
  const Problem& p = prob();
  if (width <= 0) width = p.width;
  if (modes1 <= 0) {
    modes1 = p.modes1;
    modes2 = p.modes2;
    if (points1 <= 0) {
      points1 = p.points1;
      points2 = p.points2;
    }
  } else if (points1 <= 0) {
    // Test-space cut-off overridden without a point count: keep the
    // experiments' K = 32 M proportion (1D).
    if (p.dim == 1) {
      points1 = 32l * modes1;
      points2 = 1;
    } else {
      points1 = p.points1;
      points2 = p.points2;
    }
  }
  if (p.dim == 1) {
    modes2 = 1;
    points2 = 1;
  }
  if (iters < 0) iters = p.default_iters;
  if (points1 < 2 || points1 % 2 != 0 || (p.dim == 2 && (points2 < 2 || points2 % 2 != 0)))
    throw std::invalid_argument("point counts must be even (two points per cell)");
  if (modes1 < 1 || (p.dim == 2 && modes2 < 1))
    throw std::invalid_argument("mode counts must be positive");
  if (width < 1) throw std::invalid_argument("width must be positive");
  resolved = true;
}

Basis RunConfig::basis() const {
  return prob().dim == 1 ? Basis::one_d(modes1) : Basis::two_d(modes1, modes2);
}

std::string RunConfig::to_json() const {
  nlohmann::json j;
  j["problem"] = problem;
  j["optimizer"] = to_string(optimizer);
  j["formulation"] = to_string(formulation);
  j["ad_mode"] = to_string(ad_mode);
  j["width"] = width;
  j["modes"] = prob().dim == 1 ? nlohmann::json(modes1)
                               : nlohmann::json::array({modes1, modes2});
  j["points"] = prob().dim == 1 ? nlohmann::json(points1)
                                : nlohmann::json::array({points1, points2});
  j["iters"] = iters;
  j["seed"] = seed;
  j["lambda"] = lambda;
  j["lr"] = lr;
  j["out"] = out;
  return j.dump(2);
}

RunConfig RunConfig::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  RunConfig c;
  if (j.contains("problem")) c.problem = j["problem"].get<std::string>();
  if (j.contains("optimizer")) c.optimizer = optimizer_from_string(j["optimizer"]);
  if (j.contains("formulation")) c.formulation = formulation_from_string(j["formulation"]);
  if (j.contains("ad_mode")) c.ad_mode = ad_mode_from_string(j["ad_mode"]);
  if (j.contains("width")) c.width = j["width"].get<int>();
  if (j.contains("modes")) {
    if (j["modes"].is_array()) {
      c.modes1 = j["modes"][0].get<int>();
      c.modes2 = j["modes"][1].get<int>();
    } else {
      c.modes1 = j["modes"].get<int>();
    }
  }
  if (j.contains("points")) {
    if (j["points"].is_array()) {
      c.points1 = j["points"][0].get<long>();
      c.points2 = j["points"][1].get<long>();
    } else {
      c.points1 = j["points"].get<long>();
    }
  }
  if (j.contains("iters")) c.iters = j["iters"].get<int>();
  if (j.contains("seed")) c.seed = j["seed"].get<uint64_t>();
  if (j.contains("lambda")) c.lambda = j["lambda"].get<double>();
  if (j.contains("lr")) c.lr = j["lr"].get<double>();
  if (j.contains("out")) c.out = j["out"].get<std::string>();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return from_json(ss.str());
}

void RunConfig::save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << to_json() << '\n';
}

}  // namespace vpinn
