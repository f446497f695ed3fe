#include "acg/distributions.hpp"

#include <cmath>
#include <sstream>

namespace acg {

namespace {

constexpr double kLogSqrt2Pi = 0.9189385332046727417803297;  // log sqrt(2*pi)

// Standard normal log-density.
double log_norm_pdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

}  // namespace

double log_norm_cdf(double x) {
  if (std::isnan(x)) throw InvalidInputError("log_norm_cdf: NaN argument");
  if (x == kInf) return 0.0;
  if (x == -kInf) return -kInf;
  if (x >= -37.0) {
    // erfc keeps full relative precision down to ~1e-300 here.
    return std::log(0.5 * std::erfc(-x * M_SQRT1_2));
  }
  // Deep tail: Phi(x) = phi(x)/(-x) * (1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8 ...)
  const double x2 = x * x;
  const double t = -1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2) +
                   105.0 / (x2 * x2 * x2 * x2);
  return log_norm_pdf(x) - std::log(-x) + std::log1p(t);
}

double log_phi_diff(double a, double b) {
  if (std::isnan(a) || std::isnan(b))
    throw InvalidInputError("log_phi_diff: NaN endpoint");
  if (!(a < b)) throw InvalidInputError("log_phi_diff: requires a < b");
  if (a == -kInf && b == kInf) return 0.0;
  if (a == -kInf) return log_norm_cdf(b);
  if (b == kInf) return log_norm_cdf(-a);
  // Reflect so the interval sits on the negative side; Phi is smallest there
  // and the subtraction below loses the least precision.
  if (a + b > 0.0) {
    const double t = a;
    a = -b;
    b = -t;
  }
  const double lb = log_norm_cdf(b);
  const double la = log_norm_cdf(a);
  const double diff = lb + std::log1p(-std::exp(la - lb));
  if (diff == -kInf) {
    // Interval narrower than CDF resolution: midpoint-density approximation.
    const double m = 0.5 * (a + b);
    return log_norm_pdf(m) + std::log(b - a);
  }
  return diff;
}

namespace {

// One draw from the standard normal truncated to (alpha, beta), exact.
double sample_std_truncnorm(double alpha, double beta, Rng& rng) {
  // Unbounded: plain normal.
  if (alpha == -kInf && beta == kInf) return rng.normal();

  // One-sided cases; reduce "upper tail only" to "lower tail only".
  if (alpha == -kInf) return -sample_std_truncnorm(-beta, kInf, rng);
  if (beta == kInf) {
    if (alpha <= 0.5) {
      for (;;) {
        const double z = rng.normal();
        if (z > alpha) return z;
      }
    }
    // Shifted-exponential rejection (optimal rate) for deeper tails.
    const double lambda = 0.5 * (alpha + std::sqrt(alpha * alpha + 4.0));
    for (;;) {
      const double z = alpha + rng.exponential(lambda);
      const double d = z - lambda;
      if (std::log(rng.uniform_pos()) <= -0.5 * d * d) return z;
    }
  }

  // Two-sided: reflect so the interval midpoint is nonnegative.
  if (alpha + beta < 0.0) return -sample_std_truncnorm(-beta, -alpha, rng);

  const double width = beta - alpha;
  if (width < 2.5) {
    // Uniform proposal against the density max inside the interval.
    const double z0 = alpha > 0.0 ? alpha : 0.0;
    for (;;) {
      const double z = rng.uniform(alpha, beta);
      if (!(z > alpha && z < beta)) continue;
      if (std::log(rng.uniform_pos()) <= 0.5 * (z0 * z0 - z * z)) return z;
    }
  }
  if (alpha <= 0.5) {
    // Wide and shallow (or straddling zero): naive rejection is cheap.
    for (;;) {
      const double z = rng.normal();
      if (z > alpha && z < beta) return z;
    }
  }
  // Wide and deep: one-sided exponential scheme with an upper-bound check;
  // nearly all accepted mass is within a standard deviation of alpha, so the
  // extra rejection is negligible.
  const double lambda = 0.5 * (alpha + std::sqrt(alpha * alpha + 4.0));
  for (;;) {
    const double z = alpha + rng.exponential(lambda);
    if (z >= beta) continue;
    const double d = z - lambda;
    if (std::log(rng.uniform_pos()) <= -0.5 * d * d) return z;
  }
}

}  // namespace

double sample_truncnorm(double mean, double var, const TruncInterval& trunc,
                        Rng& rng) {
  if (!std::isfinite(mean) || !std::isfinite(var) || var <= 0.0)
    throw InvalidInputError("sample_truncnorm: mean/var must be finite, var > 0");
  if (!trunc.valid())
    throw InvalidInputError("sample_truncnorm: empty truncation interval");
  const double sd = std::sqrt(var);
  const double alpha =
      trunc.bounded_below() ? (trunc.lower - mean) / sd : -kInf;
  const double beta = trunc.bounded_above() ? (trunc.upper - mean) / sd : kInf;
  for (;;) {
    const double x = mean + sd * sample_std_truncnorm(alpha, beta, rng);
    // Guarantee a strictly interior value even after rounding back to the
    // original scale.
    if (x > trunc.lower && x < trunc.upper) return x;
  }
}

double sample_inverse_gamma(double shape, double rate, Rng& rng) {
  if (!(shape > 0.0) || !(rate > 0.0))
    throw InvalidInputError("sample_inverse_gamma: shape and rate must be > 0");
  for (;;) {
    const double g = rng.gamma(shape);
    if (g > 0.0) return rate / g;
  }
}

double slice_sample_1d(const std::function<double(double)>& log_density,
                       double x0, const SliceConfig& cfg, Rng& rng) {
  if (!(cfg.width > 0.0))
    throw InvalidInputError("slice_sample_1d: width must be > 0");
  if (!cfg.domain.valid())
    throw InvalidInputError("slice_sample_1d: empty domain");
  if (!(x0 >= cfg.domain.lower && x0 <= cfg.domain.upper))
    throw InvalidInputError("slice_sample_1d: x0 outside domain");

  auto eval = [&](double x) {
    const double v = log_density(x);
    if (std::isnan(v)) {
      std::ostringstream msg;
      msg << "slice_sample_1d: log density is NaN at x = " << x;
      throw NumericError(msg.str());
    }
    return v;
  };

  const double g0 = eval(x0);
  if (g0 == -kInf)
    throw InvalidInputError("slice_sample_1d: x0 has zero density");
  const double logy = g0 - rng.exponential(1.0);

  // Initial bracket of total length `width`, randomly positioned around x0.
  const double u = rng.uniform(0.0, cfg.width);
  double lo = x0 - u;
  double hi = x0 + (cfg.width - u);

  // Stepping out, with the total expansion budget split randomly.
  if (cfg.max_stepout > 0) {
    int j = static_cast<int>(std::floor(cfg.max_stepout * rng.uniform()));
    int k = cfg.max_stepout - 1 - j;
    while (j-- > 0 && lo > cfg.domain.lower && eval(lo) > logy)
      lo -= cfg.width;
    while (k-- > 0 && hi < cfg.domain.upper && eval(hi) > logy)
      hi += cfg.width;
  }
  lo = std::max(lo, cfg.domain.lower);
  hi = std::min(hi, cfg.domain.upper);

  // Shrinkage.
  for (int it = 0; it < 1000; ++it) {
    const double x1 = rng.uniform(lo, hi);
    if (eval(x1) >= logy) return x1;
    if (x1 < x0)
      lo = x1;
    else
      hi = x1;
    if (!(hi - lo > 0.0)) break;  // bracket collapsed to a point
  }
  return x0;  // pathological shrinkage: keep the current state
}

}  // namespace acg
