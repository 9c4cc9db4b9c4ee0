#pragma once

#include <cstdint>
#include <string>

#include "vpinn/assembly.hpp"
#include "vpinn/problems.hpp"

namespace vpinn {

enum class OptimizerKind { adam, ls_adam };
enum class AdMode { forward, backward };

const char* to_string(OptimizerKind k);
const char* to_string(Formulation f);
const char* to_string(AdMode m);
OptimizerKind optimizer_from_string(const std::string& s);
Formulation formulation_from_string(const std::string& s);
AdMode ad_mode_from_string(const std::string& s);

// One training run's full configuration. Zero / negative sentinel values are
// filled from the problem's defaults by resolve(); the resolved form echoed
// to config-echo.json reproduces the run byte for byte.
struct RunConfig {
  std::string problem = "smooth1d";
  OptimizerKind optimizer = OptimizerKind::ls_adam;
  Formulation formulation = Formulation::weak;
  AdMode ad_mode = AdMode::forward;
  int width = 0;                  // hidden width N (three hidden layers)
  int modes1 = 0, modes2 = 0;     // test-space cut-off (per axis in 2D)
  long points1 = 0, points2 = 0;  // integration points (per axis in 2D)
  int iters = -1;
  uint64_t seed = 1;
  double lambda = -1.0;           // < 0: scale-relative default per solve
  double lr = 1e-3;
  std::string out = "out";

  bool resolved = false;

  void resolve();
  Basis basis() const;
  const Problem& prob() const { return get_problem(problem); }

  std::string to_json() const;
  static RunConfig from_json(const std::string& text);
  static RunConfig load(const std::string& path);
  void save(const std::string& path) const;
};

}  // namespace vpinn
