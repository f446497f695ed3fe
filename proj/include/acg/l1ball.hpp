#pragma once

#include <functional>
#include <vector>

#include "acg/distributions.hpp"
#include "acg/rng.hpp"

namespace acg {

// Per-coordinate inputs to the three-component sign mixture. With the
// Gaussian augmentation variables folded in these are
//   a = phi_j + r_j,  c = psi_j + t_j,
// and (d, e) are the coordinate's quadratic coefficients (the shared
// augmentation level when the corresponding matrix is dense, or its j-th
// diagonal entry when it is diagonal and no augmentation is used).
struct CoordCoeffs {
  double a = 0.0;
  double c = 0.0;
  double d = 1.0;
  double e = 1.0;
  double kappa = 0.0;
};

// Unnormalized log-weights of the sign component b in {-1, 0, +1}.
struct MixtureWeights {
  double log_neg = 0.0;
  double log_zero = 0.0;
  double log_pos = 0.0;

  // Normalized probabilities (log-sum-exp; safe with -inf entries).
  void probabilities(double& p_neg, double& p_zero, double& p_pos) const;

  // Draw b in {-1, 0, +1}.
  int sample(Rng& rng) const;
};

// Soft-thresholding map theta = sign(beta) * max(|beta| - kappa, 0),
// elementwise; produces exact zeros and is 1-Lipschitz in beta.
double soft_threshold(double beta, double kappa);
Vector soft_threshold(const Vector& beta, const Vector& kappa);
Vector soft_threshold(const Vector& beta, double kappa);

// Log-weights of the sign mixture for one coordinate. Each component's
// weight is the integral of exp(-[d*theta^2 - 2a*theta + e*beta^2 - 2c*beta]/2)
// over its beta region, i.e. the completed-square exponent plus the log-mass
// log(s * sqrt(2*pi) * (Phi(hi') - Phi(lo'))) of the matching truncated
// normal. kappa = 0 collapses the zero component to weight zero (-inf).
MixtureWeights mixture_log_weights(const CoordCoeffs& co);

// Draw beta_j given its sign component: a truncated normal on (-kappa, kappa),
// (kappa, inf) or (-inf, -kappa) with the completed-square mean/variance.
double sample_beta_coord(int b, const CoordCoeffs& co, Rng& rng);

struct BlockedDraw {
  Vector beta;
  Vector theta;
  std::vector<int> b;
};

// One full conditionally-independent sweep: for every coordinate draw the
// sign component, then beta_j, then form theta by soft-thresholding.
BlockedDraw blocked_beta_update(const std::vector<CoordCoeffs>& coeffs,
                                Rng& rng);

// One slice-sampling transition for the global threshold kappa0 on (0, inf).
// The target is  prior_log_density(k) - [theta'M theta / 2 - phi'theta]  with
// theta = soft_threshold(beta, k) recomputed per evaluation; the beta-side
// quadratic is constant in kappa0 and omitted. `m_energy` must evaluate
// theta'M theta / 2 - phi'theta.
double kappa_slice_update(
    const Vector& beta, const std::function<double(const Vector&)>& m_energy,
    const std::function<double(double)>& prior_log_density, double kappa0,
    const SliceConfig& cfg, Rng& rng);

}  // namespace acg
