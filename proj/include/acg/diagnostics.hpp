#pragma once

#include <functional>
#include <optional>

#include "acg/distributions.hpp"
#include "acg/linalg.hpp"
#include "acg/rng.hpp"

namespace acg {

// Sample autocorrelations (biased normalization, denominator N). A constant
// chain has no defined correlations: all-zero values plus the flag.
struct AcfResult {
  Vector acf;
  bool degenerate = false;
};

AcfResult autocorrelation(const Vector& chain, Eigen::Index max_lag);

// Initial-monotone-sequence estimate of the effective sample size,
// ESS = N / max(tau, 1/N) with tau = -1 + 2 * sum of truncated, monotonized
// paired autocorrelations. Antithetic chains may legitimately exceed N.
struct EssResult {
  double ess = 0.0;
  bool degenerate = false;
};

EssResult effective_sample_size(const Vector& chain);

// Per-parameter ESS throughput with the two-group reporting convention:
// mean ESS/s over the leading `first_group` parameters and over the rest.
struct EssReport {
  Vector ess;  // capped at the retained-draw count
  double wall_seconds = 0.0;
  Vector ess_per_second;
  double first_group_mean = 0.0;
  double rest_group_mean = 0.0;  // NaN when there is no remainder group
};

EssReport ess_report(const Matrix& draws, double wall_seconds,
                     Eigen::Index first_group = 10);

// Type-7 (linear interpolation) empirical quantile.
double quantile(const Vector& values, double q);

// Selection quality from equal-tailed credible intervals at `level`:
//   fpr = fraction of truth-zero coordinates whose interval excludes 0,
//   fnr = fraction of truth-nonzero coordinates whose interval covers 0,
//   mse = mean squared error of the posterior means against the truth.
// A rate with an empty denominator is reported absent.
struct SelectionMetrics {
  std::optional<double> fpr;
  std::optional<double> fnr;
  double mse = 0.0;
};

SelectionMetrics interval_selection_metrics(const Matrix& draws,
                                            const Vector& truth, double level);

// One full sweep of univariate slice updates on each coordinate's conditional
// section of the joint log density.
Vector componentwise_slice_step(
    const std::function<double(const Vector&)>& log_posterior,
    const Vector& state, const SliceConfig& cfg, Rng& rng);

}  // namespace acg
