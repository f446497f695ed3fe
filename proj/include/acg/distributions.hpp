#pragma once

#include <functional>
#include <limits>

#include "acg/errors.hpp"
#include "acg/rng.hpp"

namespace acg {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Open truncation interval (lower, upper); either side may be infinite.
struct TruncInterval {
  double lower = -kInf;
  double upper = kInf;

  bool valid() const { return lower < upper; }
  bool bounded_below() const { return lower > -kInf; }
  bool bounded_above() const { return upper < kInf; }
};

// Tuning for the one-dimensional slice sampler.
struct SliceConfig {
  double width = 1.0;     // initial bracket width
  int max_stepout = 50;   // stepping-out budget (total expansions)
  TruncInterval domain;   // hard support; brackets are clipped to it
};

// log(Phi(x)) for a standard normal, stable over the whole real line
// (erfc-based in the bulk, asymptotic tail expansion below -37).
double log_norm_cdf(double x);

// log(Phi(b) - Phi(a)) for a < b without catastrophic cancellation: the
// interval is reflected so both endpoints sit on the negative side, then the
// difference is taken between log-CDFs via log1p(-exp(.)).
double log_phi_diff(double a, double b);

// One draw from N(mean, var) truncated to the open interval `trunc`.
// Exact rejection samplers throughout; the proposal is chosen by regime:
//   one-sided tails deeper than 0.5 sd  -> shifted-exponential rejection,
//   two-sided intervals narrower than 2.5 sd -> uniform rejection,
//   everything else -> naive normal rejection (deep wide two-sided intervals
//   reuse the exponential proposal with an extra upper-bound check so deep
//   boxes stay cheap).
// The returned value is strictly inside the interval.
double sample_truncnorm(double mean, double var, const TruncInterval& trunc,
                        Rng& rng);

// Inverse gamma with density proportional to x^-(shape+1) exp(-rate/x).
double sample_inverse_gamma(double shape, double rate, Rng& rng);

// One slice-sampling transition (stepping out + shrinkage) targeting the
// unnormalized log density, started at x0 (which must have finite density and
// lie inside cfg.domain).
double slice_sample_1d(const std::function<double(double)>& log_density,
                       double x0, const SliceConfig& cfg, Rng& rng);

}  // namespace acg
