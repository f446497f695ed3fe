#include "acg/gibbs.hpp"

#include <chrono>
#include <cmath>
#include <utility>

#include "acg/errors.hpp"

namespace acg {

void ChainState::check_consistency(const Vector& kappa) const {
  if (theta.size() != beta.size() || kappa.size() != beta.size()) {
    throw StateError("chain state dimensions disagree");
  }
  const Vector expect = soft_threshold(beta, kappa);
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (!(theta[j] == expect[j])) {  // also trips on NaN
      throw StateError("theta is not the soft-threshold of beta at entry " +
                       std::to_string(j));
    }
  }
}

namespace {

// Default augmentation for one side of the target: exact in the eigenbasis
// shape, Cholesky on a dense materialization otherwise, skipped entirely for
// diagonal shapes (their quadratic already factorizes over coordinates).
AugDraw default_aug_draw(const QuadMat& q, const Vector& point,
                         const GibbsSpecs& specs,
                         std::optional<DirectAnticorrSampler>& direct,
                         double& coef, Rng& rng) {
  if (q.is_diagonal()) {
    return {};
  }
  if (q.kind() == QuadMat::Kind::kEigenBasis) {
    const Vector& w = q.eigen_weights();
    const double e = choose_d(q.spectral_norm_bound(specs.bound_kind),
                              specs.epsilon);
    const Matrix& basis = q.eigen_q();
    Vector u = basis.transpose() * point;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      const double gap = e - w[i];
      u[i] = gap * u[i] + std::sqrt(gap) * rng.normal();
    }
    return {basis * u, e};
  }
  if (!direct) {
    coef = choose_d(q.spectral_norm_bound(specs.bound_kind), specs.epsilon);
    direct.emplace(SymMatrix(q.to_dense()), coef);
  }
  return {direct->draw(point, rng), coef};
}

}  // namespace

void gibbs_step(ChainState& state, QuadTarget& target, const GibbsSpecs& specs,
                const GibbsHooks& hooks, GibbsCache& cache, Rng& rng) {
  const Eigen::Index p = target.dim();
  if (state.beta.size() != p || state.theta.size() != p) {
    throw StateError("chain state does not match target dimension");
  }
  if (cache.version != target.version) {
    cache.m_direct.reset();
    cache.h_direct.reset();
    cache.m_d = 0.0;
    cache.h_e = 0.0;
    cache.version = target.version;
  }

  AugDraw rd = hooks.sample_r
                   ? hooks.sample_r(target, state, rng)
                   : default_aug_draw(target.m, state.theta, specs,
                                      cache.m_direct, cache.m_d, rng);
  AugDraw td = hooks.sample_t
                   ? hooks.sample_t(target, state, rng)
                   : default_aug_draw(target.h, state.beta, specs,
                                      cache.h_direct, cache.h_e, rng);
  const bool has_r = rd.value.size() > 0;
  const bool has_t = td.value.size() > 0;
  if ((has_r && rd.value.size() != p) || (has_t && td.value.size() != p)) {
    throw StateError("augmentation draw has wrong dimension");
  }
  if (!has_r && !target.m.is_diagonal()) {
    throw StateError("non-diagonal likelihood precision needs an r draw");
  }
  if (!has_t && !target.h.is_diagonal()) {
    throw StateError("non-diagonal prior precision needs a t draw");
  }
  state.r = rd.value;
  state.t = td.value;

  std::vector<CoordCoeffs> coeffs(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) {
    CoordCoeffs& co = coeffs[static_cast<std::size_t>(j)];
    co.a = has_r ? target.phi[j] + rd.value[j] : target.phi[j];
    co.d = has_r ? rd.coef : target.m.diag_values()[j];
    co.c = has_t ? target.psi[j] + td.value[j] : target.psi[j];
    co.e = has_t ? td.coef : target.h.diag_values()[j];
    co.kappa = target.kappa[j];
  }
  BlockedDraw bd = blocked_beta_update(coeffs, rng);
  state.beta = std::move(bd.beta);
  state.theta = std::move(bd.theta);

  if (hooks.kappa_prior_log_density) {
    const auto m_energy = [&target](const Vector& th) {
      return target.m_energy(th);
    };
    state.kappa0 =
        kappa_slice_update(state.beta, m_energy, hooks.kappa_prior_log_density,
                           state.kappa0, hooks.kappa_slice, rng);
    target.kappa = Vector::Constant(p, state.kappa0);
    state.theta = soft_threshold(state.beta, state.kappa0);
  }
  state.check_consistency(target.kappa);

  if (hooks.update_hypers) {
    hooks.update_hypers(state, target, rng);
  }
  ++state.iteration;
}

SampleStore run_chain(const ChainConfig& cfg, ModelHandle& model) {
  if (cfg.iterations < 1) {
    throw ConfigError("iterations must be at least 1");
  }
  if (cfg.burn_in < 0 || cfg.burn_in >= cfg.iterations) {
    throw ConfigError("burn_in must lie in [0, iterations)");
  }
  if (cfg.thinning < 1) {
    throw ConfigError("thinning must be at least 1");
  }
  const Eigen::Index p = model.target.dim();

  Rng rng(Rng::mix(cfg.seed, 1));
  ChainState state;
  state.beta = Vector::Zero(p);
  state.kappa0 = p > 0 ? model.target.kappa[0] : 1.0;
  if (model.init) {
    model.init(state, rng);
  }
  if (state.beta.size() != p) {
    throw StateError("init produced a beta of the wrong dimension");
  }
  if (model.hooks.kappa_prior_log_density) {
    if (!(state.kappa0 > 0.0) || !std::isfinite(state.kappa0)) {
      throw ConfigError("initial kappa0 must be positive and finite");
    }
    model.target.kappa = Vector::Constant(p, state.kappa0);
  }
  state.theta = soft_threshold(state.beta, model.target.kappa);
  state.iteration = 0;

  const auto retained_of = [&model](const ChainState& s) {
    return model.retained ? model.retained(s) : s.theta;
  };
  std::vector<std::string> names = model.param_names;
  if (names.empty()) {
    if (model.retained) {
      const Vector probe = retained_of(state);
      for (Eigen::Index j = 0; j < probe.size(); ++j) {
        names.push_back("param_" + std::to_string(j));
      }
    } else {
      for (Eigen::Index j = 0; j < p; ++j) {
        names.push_back("theta_" + std::to_string(j));
      }
    }
  }

  const long n_rows = (cfg.iterations - cfg.burn_in) / cfg.thinning;
  SampleStore store;
  store.param_names = names;
  store.draws.resize(n_rows, static_cast<Eigen::Index>(names.size()));
  store.seed = cfg.seed;
  store.iterations = cfg.iterations;
  store.burn_in = cfg.burn_in;
  store.thinning = cfg.thinning;
  if (model.hooks.log_posterior) {
    store.logpost.reserve(static_cast<std::size_t>(cfg.iterations));
  }

  GibbsCache cache;
  long row = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (long i = 0; i < cfg.iterations; ++i) {
    try {
      gibbs_step(state, model.target, cfg.specs, model.hooks, cache, rng);
    } catch (const Error& err) {
      throw StateError("iteration " + std::to_string(i) + ": " + err.what());
    }
    if (model.hooks.log_posterior) {
      store.logpost.push_back(model.hooks.log_posterior(state, model.target));
    }
    if (i >= cfg.burn_in && (i - cfg.burn_in + 1) % cfg.thinning == 0) {
      const Vector vals = retained_of(state);
      if (vals.size() != static_cast<Eigen::Index>(names.size())) {
        throw StateError("retained row does not match parameter names");
      }
      store.draws.row(row++) = vals.transpose();
      if (model.on_retained) {
        model.on_retained(state);
      }
    }
  }
  const auto t1 = std::chrono::steady_clock::now();
  store.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  if (row != n_rows) {
    throw StateError("retained row count mismatch");
  }
  return store;
}

LatentGaussianDecoupler::LatentGaussianDecoupler(const SymMatrix& m,
                                                 const AntiCorrSpec& spec)
    : sampler_(m, spec.d > 0.0
                      ? spec.d
                      : choose_d(bound_of(m, BoundKind::kSpectral),
                                 spec.epsilon_margin)) {}

Vector LatentGaussianDecoupler::update(const Vector& z,
                                       const LatentCoordSampler& coord,
                                       Rng& rng) const {
  const Vector r = sampler_.draw(z, rng);
  Vector out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    out[i] = coord(i, sampler_.d(), r[i], z[i], rng);
  }
  return out;
}

Vector latent_gaussian_decouple_update(const SymMatrix& m,
                                       const AntiCorrSpec& spec,
                                       const Vector& z,
                                       const LatentCoordSampler& coord,
                                       Rng& rng) {
  return LatentGaussianDecoupler(m, spec).update(z, coord, rng);
}

LatentCoordSampler make_slice_latent_sampler(
    std::function<double(Eigen::Index, double)> log_g, SliceConfig cfg) {
  return [log_g = std::move(log_g), cfg](Eigen::Index i, double d, double r_i,
                                         double z_i, Rng& rng) {
    const auto target = [&](double x) {
      return log_g(i, x) - 0.5 * d * x * x + r_i * x;
    };
    return slice_sample_1d(target, z_i, cfg, rng);
  };
}

TruncatedMvnSampler::TruncatedMvnSampler(Vector mu, const SymMatrix& precision,
                                         std::vector<TruncInterval> box,
                                         const GibbsSpecs& specs)
    : mu_(std::move(mu)),
      box_(std::move(box)),
      d_(choose_d(bound_of(precision, specs.bound_kind), specs.epsilon)),
      r_sampler_(precision, d_) {
  if (mu_.size() != precision.dim() ||
      box_.size() != static_cast<std::size_t>(mu_.size())) {
    throw InvalidInputError("mean, precision and box dimensions disagree");
  }
  if (!mu_.allFinite()) {
    throw InvalidInputError("truncated normal mean must be finite");
  }
  for (const TruncInterval& iv : box_) {
    if (!iv.valid()) {
      throw InvalidInputError("box interval is empty or NaN");
    }
  }
}

Vector TruncatedMvnSampler::initial_point() const {
  Vector x(mu_.size());
  for (Eigen::Index j = 0; j < mu_.size(); ++j) {
    const TruncInterval& iv = box_[static_cast<std::size_t>(j)];
    if (mu_[j] > iv.lower && mu_[j] < iv.upper) {
      x[j] = mu_[j];
    } else if (iv.bounded_below() && iv.bounded_above()) {
      x[j] = 0.5 * (iv.lower + iv.upper);
    } else if (iv.bounded_below()) {
      x[j] = iv.lower + 1.0;
    } else {
      x[j] = iv.upper - 1.0;
    }
  }
  return x;
}

namespace {

void require_in_box(const Vector& theta, const std::vector<TruncInterval>& box) {
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    const TruncInterval& iv = box[static_cast<std::size_t>(j)];
    if (!(theta[j] >= iv.lower && theta[j] <= iv.upper)) {
      throw InvalidInputError("state lies outside the truncation box at entry " +
                              std::to_string(j));
    }
  }
}

}  // namespace

Vector TruncatedMvnSampler::step(const Vector& theta, Rng& rng) const {
  if (theta.size() != mu_.size()) {
    throw InvalidInputError("state does not match sampler dimension");
  }
  require_in_box(theta, box_);
  const Vector r = r_sampler_.draw(theta - mu_, rng);
  Vector out(theta.size());
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    out[j] = sample_truncnorm(mu_[j] + r[j] / d_, 1.0 / d_,
                              box_[static_cast<std::size_t>(j)], rng);
  }
  return out;
}

Vector truncated_mvn_step(const Vector& theta, const Vector& mu,
                          const SymMatrix& precision, double d,
                          const std::vector<TruncInterval>& box, Rng& rng) {
  if (theta.size() != mu.size() || precision.dim() != mu.size() ||
      box.size() != static_cast<std::size_t>(mu.size())) {
    throw InvalidInputError("truncated normal step dimensions disagree");
  }
  require_in_box(theta, box);
  DirectAnticorrSampler sampler(precision, d);
  const Vector r = sampler.draw(theta - mu, rng);
  Vector out(theta.size());
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    out[j] = sample_truncnorm(mu[j] + r[j] / d, 1.0 / d,
                              box[static_cast<std::size_t>(j)], rng);
  }
  return out;
}

}  // namespace acg
