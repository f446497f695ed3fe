#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "acg/anticorr.hpp"
#include "acg/distributions.hpp"
#include "acg/l1ball.hpp"
#include "acg/quad_target.hpp"

namespace acg {

// Mutable chain state. After every full step theta is exactly
// soft_threshold(beta, kappa); check_consistency enforces it.
struct ChainState {
  Vector beta;
  Vector theta;
  Vector r;  // empty when M is diagonal (no augmentation needed)
  Vector t;  // empty when H is diagonal
  double kappa0 = 1.0;
  std::map<std::string, double> hyper;
  long iteration = 0;

  void check_consistency(const Vector& kappa) const;
};

// One augmented draw plus the quadratic coefficient (d or e) it was drawn at.
struct AugDraw {
  Vector value;
  double coef = 0.0;
};

using AugSamplerFn =
    std::function<AugDraw(const QuadTarget&, const ChainState&, Rng&)>;

// Customization points for a model. All members are optional: with none set,
// gibbs_step runs the pure quadratic target with kappa held fixed.
struct GibbsHooks {
  AugSamplerFn sample_r;  // override for the M-side augmentation
  AugSamplerFn sample_t;  // override for the H-side augmentation
  std::function<void(ChainState&, QuadTarget&, Rng&)> update_hypers;
  std::function<double(const ChainState&, const QuadTarget&)> log_posterior;
  std::function<double(double)> kappa_prior_log_density;  // enables the kappa move
  SliceConfig kappa_slice{1.0, 50, {0.0, kInf}};
};

struct GibbsSpecs {
  double epsilon = 1e-6;                       // margin for d and e
  BoundKind bound_kind = BoundKind::kSpectral; // bound driving d and e
};

// Cached factorizations for the default augmentation samplers, keyed on the
// target's version counter.
struct GibbsCache {
  long version = -1;
  std::optional<DirectAnticorrSampler> m_direct;
  std::optional<DirectAnticorrSampler> h_direct;
  double m_d = 0.0;
  double h_e = 0.0;
};

// One blocked sweep: (1) draw the augmentation(s), (2) draw all (b_j, beta_j)
// conditionally independently and soft-threshold, (3) slice-update kappa0 if
// a prior hook is present, (4) run the hyperparameter hook.
void gibbs_step(ChainState& state, QuadTarget& target, const GibbsSpecs& specs,
                const GibbsHooks& hooks, GibbsCache& cache, Rng& rng);

// Retained draws plus run metadata. CSV bodies derived from this are
// deterministic functions of the seed.
struct SampleStore {
  std::vector<std::string> param_names;
  Matrix draws;                 // retained rows x parameters
  std::vector<double> logpost;  // one entry per iteration incl. burn-in
  std::uint64_t seed = 0;
  long iterations = 0;
  long burn_in = 0;
  long thinning = 1;
  double wall_seconds = 0.0;
};

struct ChainConfig {
  long iterations = 10000;
  long burn_in = 2000;
  long thinning = 1;
  std::uint64_t seed = 1;
  GibbsSpecs specs;
};

// A model is its target plus hooks plus presentation: how to initialize the
// state and which values form one retained row.
struct ModelHandle {
  QuadTarget target;
  GibbsHooks hooks;
  std::function<void(ChainState&, Rng&)> init;              // optional
  std::function<Vector(const ChainState&)> retained;        // default: theta
  std::vector<std::string> param_names;                     // default: theta_j
  std::function<void(const ChainState&)> on_retained;       // optional observer

  explicit ModelHandle(QuadTarget t) : target(std::move(t)) {}
};

// Runs a full chain; wall-clock covers only the iteration loop, never model
// construction or precomputation. Equal seeds replay bit-identically.
SampleStore run_chain(const ChainConfig& cfg, ModelHandle& model);

// --- Extensions on the same augmentation idea ---

// Latent-field decoupling: given the current field z with conditional
// Gaussian energy z'Mz/2 (plus independent per-coordinate likelihood terms),
// draw r ~ N((dI - M) z, dI - M); each coordinate's conditional then factors
// as g_i(z_i) * exp(-d z_i^2/2 + z_i r_i) and is sampled independently by the
// provided coordinate sampler.
using LatentCoordSampler =
    std::function<double(Eigen::Index i, double d, double r_i, double z_i, Rng&)>;

class LatentGaussianDecoupler {
 public:
  LatentGaussianDecoupler(const SymMatrix& m, const AntiCorrSpec& spec);

  double d() const { return sampler_.d(); }
  Vector update(const Vector& z, const LatentCoordSampler& coord,
                Rng& rng) const;

 private:
  DirectAnticorrSampler sampler_;
};

Vector latent_gaussian_decouple_update(const SymMatrix& m,
                                       const AntiCorrSpec& spec,
                                       const Vector& z,
                                       const LatentCoordSampler& coord,
                                       Rng& rng);

// Builds a LatentCoordSampler that slice-samples each coordinate's log
// likelihood log_g(i, z) plus the decoupled Gaussian exponent.
LatentCoordSampler make_slice_latent_sampler(
    std::function<double(Eigen::Index, double)> log_g, SliceConfig cfg);

// Truncated multivariate normal N(mu, precision^{-1}) restricted to an
// axis-aligned box: one Gibbs scan is a joint r draw followed by p
// independent univariate truncated-normal draws.
class TruncatedMvnSampler {
 public:
  TruncatedMvnSampler(Vector mu, const SymMatrix& precision,
                      std::vector<TruncInterval> box,
                      const GibbsSpecs& specs = {});

  double d() const { return d_; }
  Eigen::Index dim() const { return mu_.size(); }
  Vector initial_point() const;
  Vector step(const Vector& theta, Rng& rng) const;

 private:
  Vector mu_;
  std::vector<TruncInterval> box_;
  double d_;
  DirectAnticorrSampler r_sampler_;
};

// One-shot form (factors per call; fine for small problems and tests).
Vector truncated_mvn_step(const Vector& theta, const Vector& mu,
                          const SymMatrix& precision, double d,
                          const std::vector<TruncInterval>& box, Rng& rng);

}  // namespace acg
