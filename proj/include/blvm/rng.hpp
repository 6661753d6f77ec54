#pragma once

#include "blvm/types.hpp"

#include <cstdint>

namespace blvm {

// Deterministic generator with platform-stable streams. All sampling is built
// on splitmix64 so that a (seed, index) pair reproduces the same numbers on
// any machine; std::<distribution> is avoided because its output is
// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // derive an independent stream seed from (seed, index)
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next_u64();
  double uniform();                        // [0, 1)
  double uniform_positive();               // (0, 1]
  double normal();                         // standard normal, Box-Muller
  double gamma(double shape);              // shape > 0, unit scale
  std::uint64_t uniform_int(std::uint64_t bound);  // [0, bound)

  Vector normal_vector(Index d);
  Vector unit_sphere(Index d);             // uniform on S^{d-1}
  Vector dirichlet(double alpha, Index d);

 private:
  std::uint64_t state_;
};

}  // namespace blvm
