#include "acg/rng.hpp"

#include <cmath>

#include "acg/errors.hpp"

namespace acg {

double Rng::normal() {
  const double u1 = uniform_pos();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double Rng::exponential(double rate) {
  if (!(rate > 0.0)) throw InvalidInputError("exponential: rate must be > 0");
  return -std::log(uniform_pos()) / rate;
}

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) throw InvalidInputError("gamma: shape must be > 0");
  // Marsaglia-Tsang squeeze; shapes below 1 are boosted and scaled back.
  if (shape < 1.0) {
    const double g = gamma(shape + 1.0);
    const double u = uniform_pos();
    return g * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_pos();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

Vector Rng::normal_vector(Eigen::Index n) {
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = normal();
  return out;
}

int Rng::categorical_from_log_weights(const Vector& log_weights) {
  if (log_weights.size() == 0)
    throw InvalidInputError("categorical: empty log-weight vector");
  const double m = log_weights.maxCoeff();
  if (!std::isfinite(m))
    throw NumericError("categorical: no finite log-weight");
  double total = 0.0;
  Vector w(log_weights.size());
  for (Eigen::Index i = 0; i < log_weights.size(); ++i) {
    w[i] = std::exp(log_weights[i] - m);
    total += w[i];
  }
  const double u = uniform() * total;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < log_weights.size(); ++i) {
    acc += w[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(log_weights.size() - 1);
}

std::uint64_t Rng::mix(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined word.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace acg
