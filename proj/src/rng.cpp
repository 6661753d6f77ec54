#include "blvm/rng.hpp"

#include <cmath>

namespace blvm {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t Rng::derive(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL + index * 0xbf58476d1ce4e5b9ULL);
  splitmix64(x);
  return splitmix64(x);
}

std::uint64_t Rng::next_u64() { return splitmix64(state_); }

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform_positive() {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double Rng::normal() {
  double u1 = uniform_positive();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

double Rng::gamma(double shape) {
  require(shape > 0.0, ErrorCode::data, "gamma shape must be positive");
  if (shape < 1.0) {
    // boost to shape+1 and scale back
    double u = uniform_positive();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  // Marsaglia-Tsang squeeze
  double d = shape - 1.0 / 3.0;
  double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    double u = uniform_positive();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

std::uint64_t Rng::uniform_int(std::uint64_t bound) {
  // rejection-free modulo is fine here; bound is tiny relative to 2^64
  return next_u64() % bound;
}

Vector Rng::normal_vector(Index d) {
  Vector v(d);
  for (Index i = 0; i < d; ++i) v[i] = normal();
  return v;
}

Vector Rng::unit_sphere(Index d) {
  for (;;) {
    Vector v = normal_vector(d);
    double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

Vector Rng::dirichlet(double alpha, Index d) {
  Vector v(d);
  for (Index i = 0; i < d; ++i) v[i] = gamma(alpha);
  double s = v.sum();
  if (s <= 0.0) {
    // extreme alpha underflow: fall back to a one-hot draw
    v.setZero();
    v[static_cast<Index>(uniform_int(static_cast<std::uint64_t>(d)))] = 1.0;
    return v;
  }
  return v / s;
}

}  // namespace blvm
