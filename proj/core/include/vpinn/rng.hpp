#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace vpinn {

// Deterministic uniform stream. std::uniform_real_distribution is
// implementation-defined, so draws are built from raw 64-bit output to keep
// runs bit-reproducible across standard libraries.
class RandomStream {
public:
  explicit RandomStream(uint64_t seed) : gen_(seed) {}

  // Uniform in [0, 1).
  double unit() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }
  // Uniform in (lo, hi) up to rounding.
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  // Uniform over the master element (-1, 1).
  double master() { return 2.0 * unit() - 1.0; }

  uint64_t raw() { return gen_(); }

private:
  std::mt19937_64 gen_;
};

// Tagged substream derivation so that e.g. parameter init and quadrature
// sampling never share draws. SplitMix64 over seed ^ FNV(tag).
uint64_t substream_seed(uint64_t run_seed, std::string_view tag);

}  // namespace vpinn
