#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace acg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Random number generator with self-contained variate transformations.
//
// All non-uniform draws (normal, exponential, gamma) are implemented here on
// top of mt19937_64 rather than via std::*_distribution, whose internals are
// implementation-defined. Two runs with the same seed therefore produce
// bit-identical streams on any platform, which the chain-replay guarantees
// rely on.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Uniform on [a, b).
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Uniform on (0, 1] -- safe as a log argument.
  double uniform_pos() { return 1.0 - uniform(); }

  // Standard normal via Box-Muller (cosine branch only: stateless, so the
  // stream does not depend on call pairing).
  double normal();

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Exponential with the given rate.
  double exponential(double rate = 1.0);

  // Gamma with the given shape, unit scale (Marsaglia-Tsang).
  double gamma(double shape);

  // Vector of iid standard normals.
  Vector normal_vector(Eigen::Index n);

  // Categorical draw from unnormalized log-weights; returns the index.
  int categorical_from_log_weights(const Vector& log_weights);

  // Derives a decorrelated stream seed from (seed, stream) via splitmix64.
  // Used to give data simulation and each chain independent streams that are
  // still pure functions of the user-facing seed.
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream);

 private:
  std::mt19937_64 gen_;
};

}  // namespace acg
