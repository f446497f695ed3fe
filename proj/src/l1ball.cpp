#include "acg/l1ball.hpp"

#include <algorithm>
#include <cmath>

#include "acg/errors.hpp"

namespace acg {

namespace {

constexpr double kLogSqrt2Pi = 0.9189385332046727417803297;

void validate(const CoordCoeffs& co) {
  if (!std::isfinite(co.a) || !std::isfinite(co.c))
    throw InvalidInputError("coord coeffs: a and c must be finite");
  if (!(co.d > 0.0) || !(co.e > 0.0))
    throw InvalidInputError("coord coeffs: d and e must be > 0");
  if (!(co.kappa >= 0.0) || !std::isfinite(co.kappa))
    throw InvalidInputError("coord coeffs: kappa must be finite and >= 0");
}

// log of s*sqrt(2*pi)*(Phi((hi-mu)/s) - Phi((lo-mu)/s)): the mass a Gaussian
// integrand exp(-(x-mu)^2/(2 s^2)) puts on (lo, hi).
double log_gauss_mass(double mu, double s, double lo, double hi) {
  const double za = lo == -kInf ? -kInf : (lo - mu) / s;
  const double zb = hi == kInf ? kInf : (hi - mu) / s;
  return std::log(s) + kLogSqrt2Pi + log_phi_diff(za, zb);
}

}  // namespace

void MixtureWeights::probabilities(double& p_neg, double& p_zero,
                                   double& p_pos) const {
  const double m = std::max({log_neg, log_zero, log_pos});
  if (!std::isfinite(m))
    throw NumericError("mixture weights: no finite component");
  const double wn = std::exp(log_neg - m);
  const double wz = std::exp(log_zero - m);
  const double wp = std::exp(log_pos - m);
  const double z = wn + wz + wp;
  p_neg = wn / z;
  p_zero = wz / z;
  p_pos = wp / z;
}

int MixtureWeights::sample(Rng& rng) const {
  double pn, pz, pp;
  probabilities(pn, pz, pp);
  const double u = rng.uniform();
  if (u < pn) return -1;
  if (u < pn + pz) return 0;
  return 1;
}

double soft_threshold(double beta, double kappa) {
  const double mag = std::abs(beta) - kappa;
  if (mag <= 0.0) return 0.0;
  return beta > 0.0 ? mag : -mag;
}

Vector soft_threshold(const Vector& beta, const Vector& kappa) {
  if (beta.size() != kappa.size())
    throw InvalidInputError("soft_threshold: beta/kappa length mismatch");
  Vector out(beta.size());
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    out[j] = soft_threshold(beta[j], kappa[j]);
  return out;
}

Vector soft_threshold(const Vector& beta, double kappa) {
  Vector out(beta.size());
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    out[j] = soft_threshold(beta[j], kappa);
  return out;
}

MixtureWeights mixture_log_weights(const CoordCoeffs& co) {
  validate(co);
  const double a = co.a, c = co.c, d = co.d, e = co.e, k = co.kappa;
  MixtureWeights w;

  // b = 0: beta in (-k, k), theta = 0. Exponent completes to c^2/(2e) around
  // mean c/e with variance 1/e.
  if (k == 0.0) {
    w.log_zero = -kInf;
  } else {
    w.log_zero =
        0.5 * c * c / e + log_gauss_mass(c / e, 1.0 / std::sqrt(e), -k, k);
  }

  // b = +1: beta > k, theta = beta - k. Completed square around
  // (a + c + d k)/(d + e) with variance 1/(d + e); the residual constant is
  // -d k^2/2 - a k.
  const double de = d + e;
  const double s = 1.0 / std::sqrt(de);
  const double mu_pos = (a + c + d * k) / de;
  w.log_pos = 0.5 * (a + c + d * k) * (a + c + d * k) / de -
              0.5 * d * k * k - a * k + log_gauss_mass(mu_pos, s, k, kInf);

  // b = -1: mirror image with +a k.
  const double mu_neg = (a + c - d * k) / de;
  w.log_neg = 0.5 * (a + c - d * k) * (a + c - d * k) / de -
              0.5 * d * k * k + a * k + log_gauss_mass(mu_neg, s, -kInf, -k);

  return w;
}

double sample_beta_coord(int b, const CoordCoeffs& co, Rng& rng) {
  validate(co);
  const double de = co.d + co.e;
  switch (b) {
    case 0: {
      if (co.kappa == 0.0)
        throw InvalidInputError(
            "sample_beta_coord: zero component is empty when kappa = 0");
      return sample_truncnorm(co.c / co.e, 1.0 / co.e,
                              {-co.kappa, co.kappa}, rng);
    }
    case 1:
      return sample_truncnorm((co.a + co.c + co.d * co.kappa) / de, 1.0 / de,
                              {co.kappa, kInf}, rng);
    case -1:
      return sample_truncnorm((co.a + co.c - co.d * co.kappa) / de, 1.0 / de,
                              {-kInf, -co.kappa}, rng);
    default:
      throw InvalidInputError("sample_beta_coord: b must be -1, 0 or 1");
  }
}

BlockedDraw blocked_beta_update(const std::vector<CoordCoeffs>& coeffs,
                                Rng& rng) {
  const auto p = static_cast<Eigen::Index>(coeffs.size());
  BlockedDraw out;
  out.beta.resize(p);
  out.theta.resize(p);
  out.b.resize(coeffs.size());
  for (Eigen::Index j = 0; j < p; ++j) {
    const CoordCoeffs& co = coeffs[j];
    const int b = mixture_log_weights(co).sample(rng);
    const double beta = sample_beta_coord(b, co, rng);
    out.b[j] = b;
    out.beta[j] = beta;
    out.theta[j] = soft_threshold(beta, co.kappa);
  }
  return out;
}

double kappa_slice_update(
    const Vector& beta, const std::function<double(const Vector&)>& m_energy,
    const std::function<double(double)>& prior_log_density, double kappa0,
    const SliceConfig& cfg, Rng& rng) {
  if (!(kappa0 > 0.0))
    throw InvalidInputError("kappa_slice_update: kappa0 must be > 0");
  auto log_target = [&](double k) {
    const double prior = prior_log_density(k);
    if (prior == -kInf) return -kInf;
    return prior - m_energy(soft_threshold(beta, k));
  };
  SliceConfig clipped = cfg;
  clipped.domain.lower = std::max(cfg.domain.lower, 0.0);
  return slice_sample_1d(log_target, kappa0, clipped, rng);
}

}  // namespace acg
