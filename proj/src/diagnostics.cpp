#include "acg/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "acg/errors.hpp"

namespace acg {

namespace {

// Centered lag-k autocovariance with 1/N normalization.
double autocov(const Vector& x, double mean, Eigen::Index lag) {
  const Eigen::Index n = x.size();
  double s = 0.0;
  for (Eigen::Index i = 0; i + lag < n; ++i) {
    s += (x[i] - mean) * (x[i + lag] - mean);
  }
  return s / static_cast<double>(n);
}

// An exactly constant chain must be flagged degenerate even though the
// rounded mean leaves a nonzero numerical variance.
bool is_constant(const Vector& x) {
  return (x.array() == x[0]).all();
}

}  // namespace

AcfResult autocorrelation(const Vector& chain, Eigen::Index max_lag) {
  if (max_lag < 0) {
    throw InvalidInputError("max_lag must be nonnegative");
  }
  if (chain.size() <= max_lag) {
    throw InvalidInputError("chain length must exceed max_lag");
  }
  if (!chain.allFinite()) {
    throw InvalidInputError("chain contains non-finite values");
  }
  AcfResult out;
  out.acf = Vector::Zero(max_lag + 1);
  const double mean = chain.mean();
  const double c0 = autocov(chain, mean, 0);
  if (c0 <= 0.0 || is_constant(chain)) {
    out.degenerate = true;
    return out;
  }
  for (Eigen::Index k = 0; k <= max_lag; ++k) {
    out.acf[k] = autocov(chain, mean, k) / c0;
  }
  return out;
}

EssResult effective_sample_size(const Vector& chain) {
  const Eigen::Index n = chain.size();
  if (n < 100) {
    throw InvalidInputError("effective sample size needs at least 100 draws");
  }
  if (!chain.allFinite()) {
    throw InvalidInputError("chain contains non-finite values");
  }
  const double nd = static_cast<double>(n);
  const double mean = chain.mean();
  const double c0 = autocov(chain, mean, 0);
  if (c0 <= 0.0 || is_constant(chain)) {
    return {nd, true};
  }
  // Paired sums of autocorrelations, computed lazily: truncate at the first
  // nonpositive pair, then enforce monotone decrease.
  double tau = -1.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (Eigen::Index m = 0; 2 * m + 1 < n; ++m) {
    const double rho_even = autocov(chain, mean, 2 * m) / c0;
    const double rho_odd = autocov(chain, mean, 2 * m + 1) / c0;
    double pair = rho_even + rho_odd;
    if (pair <= 0.0) {
      break;
    }
    pair = std::min(pair, prev_pair);
    prev_pair = pair;
    tau += 2.0 * pair;
  }
  tau = std::max(tau, 1.0 / nd);
  return {nd / tau, false};
}

EssReport ess_report(const Matrix& draws, double wall_seconds,
                     Eigen::Index first_group) {
  if (draws.rows() < 100 || draws.cols() < 1) {
    throw InvalidInputError("need at least 100 draws and one parameter");
  }
  if (!(wall_seconds > 0.0) || !std::isfinite(wall_seconds)) {
    throw InvalidInputError("wall_seconds must be positive and finite");
  }
  if (first_group < 1) {
    throw InvalidInputError("first_group must be at least 1");
  }
  const Eigen::Index p = draws.cols();
  const double nd = static_cast<double>(draws.rows());
  EssReport rep;
  rep.ess.resize(p);
  rep.ess_per_second.resize(p);
  rep.wall_seconds = wall_seconds;
  for (Eigen::Index j = 0; j < p; ++j) {
    rep.ess[j] = std::min(effective_sample_size(draws.col(j)).ess, nd);
    rep.ess_per_second[j] = rep.ess[j] / wall_seconds;
  }
  const Eigen::Index lead = std::min(first_group, p);
  rep.first_group_mean = rep.ess_per_second.head(lead).mean();
  rep.rest_group_mean = p > first_group
                            ? rep.ess_per_second.tail(p - first_group).mean()
                            : std::numeric_limits<double>::quiet_NaN();
  return rep;
}

double quantile(const Vector& values, double q) {
  if (values.size() < 1) {
    throw InvalidInputError("quantile of an empty sample");
  }
  if (!(q >= 0.0 && q <= 1.0)) {
    throw InvalidInputError("quantile level must lie in [0, 1]");
  }
  std::vector<double> v(values.data(), values.data() + values.size());
  std::sort(v.begin(), v.end());
  const double h = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= v.size()) {
    return v.back();
  }
  const double frac = h - std::floor(h);
  return v[lo] + frac * (v[lo + 1] - v[lo]);
}

SelectionMetrics interval_selection_metrics(const Matrix& draws,
                                            const Vector& truth,
                                            double level) {
  if (draws.cols() != truth.size()) {
    throw InvalidInputError("truth length does not match parameter count");
  }
  if (draws.rows() < 1) {
    throw InvalidInputError("no draws supplied");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw InvalidInputError("credible level must lie in (0, 1)");
  }
  const double alpha = 1.0 - level;
  long n_zero = 0, n_nonzero = 0, false_pos = 0, false_neg = 0;
  double sq_err = 0.0;
  for (Eigen::Index j = 0; j < truth.size(); ++j) {
    const Vector col = draws.col(j);
    const double lo = quantile(col, alpha / 2.0);
    const double hi = quantile(col, 1.0 - alpha / 2.0);
    const bool covers_zero = lo <= 0.0 && 0.0 <= hi;
    if (truth[j] == 0.0) {
      ++n_zero;
      if (!covers_zero) ++false_pos;
    } else {
      ++n_nonzero;
      if (covers_zero) ++false_neg;
    }
    const double err = col.mean() - truth[j];
    sq_err += err * err;
  }
  SelectionMetrics out;
  if (n_zero > 0) {
    out.fpr = static_cast<double>(false_pos) / static_cast<double>(n_zero);
  }
  if (n_nonzero > 0) {
    out.fnr = static_cast<double>(false_neg) / static_cast<double>(n_nonzero);
  }
  out.mse = sq_err / static_cast<double>(truth.size());
  return out;
}

Vector componentwise_slice_step(
    const std::function<double(const Vector&)>& log_posterior,
    const Vector& state, const SliceConfig& cfg, Rng& rng) {
  Vector x = state;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const auto section = [&](double v) {
      const double keep = x[j];
      x[j] = v;
      const double val = log_posterior(x);
      x[j] = keep;
      return val;
    };
    x[j] = slice_sample_1d(section, x[j], cfg, rng);
  }
  return x;
}

}  // namespace acg
