#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Core>

namespace cloudinv {

// Derives a stage seed from a root seed and a label ("subsample", "noise",
// "chain0", ...). Stages can then be re-run in isolation while everything
// still flows from the single root seed.
std::uint64_t derive_seed(std::uint64_t root, std::string_view label);

// mt19937_64 with a pinned uniform/normal mapping. The standard library's
// distributions are implementation-defined, which would break bitwise trace
// reproducibility across toolchains; this wrapper fixes the mapping.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on [0,1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; consumes exactly two uniforms.
  double normal() {
    const double u1 = (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  Eigen::VectorXd normals(Eigen::Index n) {
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = normal();
    return z;
  }

  // Unbiased integer in [0, bound) via masked rejection.
  std::uint64_t below(std::uint64_t bound) {
    std::uint64_t mask = ~std::uint64_t{0};
    const std::uint64_t range = bound - 1;
    mask >>= __builtin_clzll(range | 1);
    std::uint64_t r;
    do {
      r = gen_() & mask;
    } while (r > range);
    return r;
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace cloudinv
