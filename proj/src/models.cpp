#include "acg/models.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include <Eigen/Eigenvalues>

#include "acg/errors.hpp"

namespace acg {

void LinRegModel::validate() const {
  if (!x) {
    throw InvalidInputError("design matrix is not set");
  }
  if (x->rows() != y.size() || x->cols() != tau.size()) {
    throw InvalidInputError("design, response and tau dimensions disagree");
  }
  if (tau.size() < 1) {
    throw InvalidInputError("model needs at least one coefficient");
  }
  if (!x->allFinite() || !y.allFinite()) {
    throw InvalidInputError("design or response contains non-finite values");
  }
  if (!tau.allFinite() || (tau.array() <= 0.0).any()) {
    throw InvalidInputError("tau entries must be positive and finite");
  }
  const bool pos_scalars = sigma2 > 0.0 && kappa0 > 0.0 && a_tau > 0.0 &&
                           b_tau > 0.0 && a_sigma > 0.0 && b_sigma > 0.0 &&
                           exp_rate_kappa > 0.0;
  if (!pos_scalars) {
    throw InvalidInputError("variance and prior parameters must be positive");
  }
}

QuadTarget linreg_target(const LinRegModel& model) {
  model.validate();
  const Eigen::Index n = model.n();
  const Eigen::Index p = model.p();
  QuadMat m = QuadMat::gram(model.x, Vector::Constant(n, 1.0 / model.sigma2));
  Vector phi = model.x->transpose() * model.y / model.sigma2;
  QuadMat h = QuadMat::diagonal(model.tau.cwiseInverse());
  return {std::move(m), std::move(phi), std::move(h), Vector::Zero(p),
          Vector::Constant(p, model.kappa0)};
}

double update_sigma2(const Matrix& x, const Vector& y, const Vector& theta,
                     double a_sigma, double b_sigma, Rng& rng) {
  const double rss = (y - x * theta).squaredNorm();
  return sample_inverse_gamma(a_sigma + 0.5 * static_cast<double>(y.size()),
                              b_sigma + 0.5 * rss, rng);
}

Vector update_tau(const Vector& beta, double a_tau, double b_tau, Rng& rng) {
  Vector tau(beta.size());
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    tau[j] =
        sample_inverse_gamma(a_tau + 0.5, b_tau + 0.5 * beta[j] * beta[j], rng);
  }
  return tau;
}

double linreg_log_joint(const LinRegModel& model, const Vector& beta,
                        const Vector& theta, const Vector& tau, double sigma2,
                        double kappa0) {
  const double n = static_cast<double>(model.n());
  const Vector resid = model.y - (*model.x) * theta;
  double lp = -0.5 * n * std::log(sigma2) - 0.5 * resid.squaredNorm() / sigma2;
  for (Eigen::Index j = 0; j < tau.size(); ++j) {
    const double beta2 = beta[j] * beta[j];
    lp += -0.5 * std::log(tau[j]) - 0.5 * beta2 / tau[j];  // beta prior
    lp += -(model.a_tau + 1.0) * std::log(tau[j]) - model.b_tau / tau[j];
  }
  lp += -(model.a_sigma + 1.0) * std::log(sigma2) - model.b_sigma / sigma2;
  lp += std::log(model.exp_rate_kappa) - model.exp_rate_kappa * kappa0;
  return lp;
}

namespace {

// Shared closure state for the regression handle.
struct LinRegRuntime {
  LinRegModel model;
  LinRegOptions options;
  Vector xty;
  double gram_bound = 0.0;  // bound on the spectral norm of XᵀX
  std::optional<HomoscedasticGramSampler> homo;
  std::optional<SvdFactors> svd;
};

}  // namespace

ModelHandle make_linreg_handle(LinRegModel model, const LinRegOptions& options) {
  model.validate();
  auto rt = std::make_shared<LinRegRuntime>();
  rt->model = std::move(model);
  rt->options = options;
  const LinRegModel& mo = rt->model;
  rt->xty = mo.x->transpose() * mo.y;
  const Vector ones = Vector::Ones(mo.n());
  switch (options.method) {
    case AnticorrMethod::kDirect:
      rt->homo.emplace(mo.x, options.epsilon, options.bound_kind);
      rt->gram_bound = rt->homo->gram_bound();
      break;
    case AnticorrMethod::kSvd:
      rt->svd = full_svd(*mo.x);
      rt->gram_bound = options.bound_kind == BoundKind::kSpectral
                           ? gram_spectral_upper_bound(*mo.x, ones)
                           : gram_frobenius_bound(*mo.x, ones);
      break;
    case AnticorrMethod::kSeries:
      rt->gram_bound = options.bound_kind == BoundKind::kSpectral
                           ? gram_spectral_upper_bound(*mo.x, ones)
                           : gram_frobenius_bound(*mo.x, ones);
      break;
  }

  ModelHandle handle(linreg_target(mo));
  const Eigen::Index n = mo.n();
  const Eigen::Index p = mo.p();

  handle.hooks.sample_r = [rt, n](const QuadTarget&, const ChainState& state,
                                  Rng& rng) -> AugDraw {
    const double s2 = state.hyper.at("sigma2");
    switch (rt->options.method) {
      case AnticorrMethod::kDirect:
        return {rt->homo->draw(s2, state.theta, rng), rt->homo->d(s2)};
      case AnticorrMethod::kSvd: {
        const RegressionOmega om(Vector::Constant(n, 1.0 / s2));
        const double d = (rt->gram_bound + rt->options.epsilon) / s2;
        return {sample_anticorr_regression(*rt->svd, om, d, state.theta, rng),
                d};
      }
      case AnticorrMethod::kSeries:
      default: {
        const RegressionOmega om(Vector::Constant(n, 1.0 / s2));
        const double d = rt->gram_bound / (s2 * rt->options.rho_target);
        return {sample_anticorr_series(*rt->model.x, om, d,
                                       rt->options.rho_target,
                                       rt->options.eps_series, state.theta,
                                       rng, nullptr, rt->gram_bound / s2),
                d};
      }
    }
  };

  handle.hooks.update_hypers = [rt, n](ChainState& state, QuadTarget& target,
                                       Rng& rng) {
    bool changed = false;
    if (rt->options.sample_sigma2) {
      const double s2 = update_sigma2(*rt->model.x, rt->model.y, state.theta,
                                      rt->model.a_sigma, rt->model.b_sigma,
                                      rng);
      state.hyper["sigma2"] = s2;
      target.m.set_gram_omega(Vector::Constant(n, 1.0 / s2));
      target.phi = rt->xty / s2;
      changed = true;
    }
    if (rt->options.sample_tau) {
      const Vector tau =
          update_tau(state.beta, rt->model.a_tau, rt->model.b_tau, rng);
      target.h.set_diagonal(tau.cwiseInverse());
      changed = true;
    }
    if (changed) {
      target.bump_version();
    }
  };

  if (options.sample_kappa) {
    const double rate = mo.exp_rate_kappa;
    handle.hooks.kappa_prior_log_density = [rate](double k) {
      return k > 0.0 ? std::log(rate) - rate * k
                     : -std::numeric_limits<double>::infinity();
    };
  }

  handle.hooks.log_posterior = [rt](const ChainState& state,
                                    const QuadTarget& target) {
    const Vector tau = target.h.diag_values().cwiseInverse();
    return linreg_log_joint(rt->model, state.beta, state.theta, tau,
                            state.hyper.at("sigma2"), state.kappa0);
  };

  handle.init = [rt](ChainState& state, Rng&) {
    state.beta = Vector::Zero(rt->model.p());
    state.kappa0 = rt->model.kappa0;
    state.hyper["sigma2"] = rt->model.sigma2;
  };

  handle.retained = [p](const ChainState& state) {
    Vector row(p + 2);
    row.head(p) = state.theta;
    row[p] = state.kappa0;
    row[p + 1] = state.hyper.at("sigma2");
    return row;
  };
  for (Eigen::Index j = 0; j < p; ++j) {
    handle.param_names.push_back("theta_" + std::to_string(j));
  }
  handle.param_names.emplace_back("kappa0");
  handle.param_names.emplace_back("sigma2");
  return handle;
}

LinRegSim simulate_regression(Eigen::Index n, Eigen::Index p, double rho,
                              double c, std::uint64_t seed) {
  if (p < 10) {
    throw InvalidInputError("simulation requires p >= 10");
  }
  if (n < 1) {
    throw InvalidInputError("simulation requires n >= 1");
  }
  if (!(std::abs(rho) < 1.0)) {
    throw InvalidInputError("design correlation must satisfy |rho| < 1");
  }
  Rng rng(Rng::mix(seed, 0));
  LinRegSim sim;
  sim.x.resize(n, p);
  const double innovation = std::sqrt(1.0 - rho * rho);
  for (Eigen::Index i = 0; i < n; ++i) {
    sim.x(i, 0) = rng.normal();
    for (Eigen::Index j = 1; j < p; ++j) {
      sim.x(i, j) = rho * sim.x(i, j - 1) + innovation * rng.normal();
    }
  }
  const double scale =
      c * std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(n));
  const double pattern[10] = {2, -3, 2, 2, -3, 3, -2, 3, -2, 3};
  sim.theta_true = Vector::Zero(p);
  for (int j = 0; j < 10; ++j) {
    sim.theta_true[j] = scale * pattern[j];
  }
  sim.y = sim.x * sim.theta_true + rng.normal_vector(n);
  return sim;
}

// --- STGP ---

Matrix make_grid(Eigen::Index n1, Eigen::Index n2) {
  if (n1 < 1 || n2 < 1) {
    throw InvalidInputError("grid dimensions must be positive");
  }
  Matrix grid(n1 * n2, 2);
  for (Eigen::Index i = 0; i < n1; ++i) {
    for (Eigen::Index j = 0; j < n2; ++j) {
      grid(i * n2 + j, 0) = static_cast<double>(i);
      grid(i * n2 + j, 1) = static_cast<double>(j);
    }
  }
  return grid;
}

Matrix squared_exponential_kernel(const Matrix& grid, double xi) {
  if (!(xi > 0.0) || !std::isfinite(xi)) {
    throw InvalidInputError("kernel bandwidth must be positive and finite");
  }
  const Eigen::Index p = grid.rows();
  Matrix k(p, p);
  const double inv = 1.0 / (2.0 * xi * xi);
  for (Eigen::Index a = 0; a < p; ++a) {
    k(a, a) = 1.0;
    for (Eigen::Index b = a + 1; b < p; ++b) {
      const double dist2 = (grid.row(a) - grid.row(b)).squaredNorm();
      k(a, b) = k(b, a) = std::exp(-dist2 * inv);
    }
  }
  return k;
}

Vector default_xi_grid() {
  Vector xi(20);
  for (int t = 1; t <= 20; ++t) {
    xi[t - 1] = 0.5 * t;
  }
  return xi;
}

StgpPrecompute build_stgp_precompute(const Matrix& grid,
                                     const Vector& xi_grid) {
  if (xi_grid.size() < 1) {
    throw InvalidInputError("need at least one candidate bandwidth");
  }
  StgpPrecompute pre;
  pre.p = grid.rows();
  pre.bases.reserve(static_cast<std::size_t>(xi_grid.size()));
  for (Eigen::Index l = 0; l < xi_grid.size(); ++l) {
    Matrix k = squared_exponential_kernel(grid, xi_grid[l]);
    const double jitter = 1e-8 * k.diagonal().mean();
    k.diagonal().array() += jitter;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(k);
    if (eig.info() != Eigen::Success) {
      throw NumericError("kernel eigendecomposition failed at bandwidth " +
                         std::to_string(xi_grid[l]));
    }
    StgpBasis basis;
    basis.evals = eig.eigenvalues();
    if ((basis.evals.array() <= 0.0).any()) {
      throw DefinitenessError("kernel matrix not positive definite at bandwidth " +
                              std::to_string(xi_grid[l]));
    }
    basis.q = std::make_shared<Matrix>(eig.eigenvectors());
    basis.logdet = basis.evals.array().log().sum();
    basis.xi = xi_grid[l];
    pre.bases.push_back(std::move(basis));
  }
  return pre;
}

void StgpModel::validate() const {
  if (grid.rows() != y.size() || grid.cols() != 2) {
    throw InvalidInputError("grid and response dimensions disagree");
  }
  if (precompute.p != y.size() ||
      precompute.bases.size() != static_cast<std::size_t>(xi_grid.size())) {
    throw StateError("precompute store does not cover the model grid");
  }
  if (xi_index < 0 ||
      static_cast<std::size_t>(xi_index) >= precompute.bases.size()) {
    throw InvalidInputError("bandwidth index out of range");
  }
  const bool pos = tau_gp > 0.0 && sigma2 > 0.0 && kappa0 > 0.0 &&
                   a_tau > 0.0 && b_tau > 0.0 && a_sigma > 0.0 &&
                   b_sigma > 0.0 && exp_rate_kappa > 0.0;
  if (!pos) {
    throw InvalidInputError("variance and prior parameters must be positive");
  }
}

// betaᵀ K̃⁻¹ beta through the eigenbasis.
double kernel_quad(const StgpBasis& basis, const Vector& beta) {
  const Vector proj = basis.q->transpose() * beta;
  return (proj.array().square() / basis.evals.array()).sum();
}

namespace {

QuadMat stgp_h(const StgpBasis& basis, double tau_gp) {
  Vector weights = (tau_gp * basis.evals.array()).inverse().matrix();
  return QuadMat::eigen_basis(basis.q, std::move(weights));
}

}  // namespace

QuadTarget stgp_target(const StgpModel& model) {
  model.validate();
  const Eigen::Index p = model.p();
  QuadMat m = QuadMat::diagonal(Vector::Constant(p, 1.0 / model.sigma2));
  Vector phi = model.y / model.sigma2;
  QuadMat h = stgp_h(model.precompute.bases[static_cast<std::size_t>(
                         model.xi_index)],
                     model.tau_gp);
  return {std::move(m), std::move(phi), std::move(h), Vector::Zero(p),
          Vector::Constant(p, model.kappa0)};
}

int update_xi(const StgpPrecompute& pre, const Vector& beta, double tau_gp,
              Rng& rng) {
  if (!(tau_gp > 0.0)) {
    throw InvalidInputError("tau must be positive");
  }
  const double p = static_cast<double>(pre.p);
  Vector lw(static_cast<Eigen::Index>(pre.bases.size()));
  for (std::size_t l = 0; l < pre.bases.size(); ++l) {
    const double quad = kernel_quad(pre.bases[l], beta);
    lw[static_cast<Eigen::Index>(l)] =
        -0.5 * (p * std::log(tau_gp) + pre.bases[l].logdet) -
        0.5 * quad / tau_gp;
  }
  return rng.categorical_from_log_weights(lw);
}

double update_tau_gp(const StgpPrecompute& pre, int xi_index,
                     const Vector& beta, double a_tau, double b_tau,
                     Rng& rng) {
  if (xi_index < 0 || static_cast<std::size_t>(xi_index) >= pre.bases.size()) {
    throw InvalidInputError("bandwidth index out of range");
  }
  const double quad =
      kernel_quad(pre.bases[static_cast<std::size_t>(xi_index)], beta);
  return sample_inverse_gamma(a_tau + 0.5 * static_cast<double>(pre.p),
                              b_tau + 0.5 * quad, rng);
}

ModelHandle make_stgp_handle(std::shared_ptr<StgpModel> model,
                             const StgpOptions& options) {
  if (!model) {
    throw InvalidInputError("model handle requires a model");
  }
  model->validate();
  ModelHandle handle(stgp_target(*model));
  const Eigen::Index p = model->p();

  handle.hooks.update_hypers = [model, options, p](ChainState& state,
                                                   QuadTarget& target,
                                                   Rng& rng) {
    const StgpPrecompute& pre = model->precompute;
    int xi = static_cast<int>(state.hyper.at("xi_index"));
    double tau = state.hyper.at("tau_gp");
    bool h_changed = false;
    if (options.sample_xi) {
      xi = update_xi(pre, state.beta, tau, rng);
      state.hyper["xi_index"] = static_cast<double>(xi);
      h_changed = true;
    }
    if (options.sample_tau_gp) {
      tau = update_tau_gp(pre, xi, state.beta, model->a_tau, model->b_tau,
                          rng);
      state.hyper["tau_gp"] = tau;
      h_changed = true;
    }
    if (h_changed) {
      target.h = stgp_h(pre.bases[static_cast<std::size_t>(xi)], tau);
    }
    bool m_changed = false;
    if (options.sample_sigma2) {
      const double rss = (model->y - state.theta).squaredNorm();
      const double s2 = sample_inverse_gamma(
          model->a_sigma + 0.5 * static_cast<double>(p),
          model->b_sigma + 0.5 * rss, rng);
      state.hyper["sigma2"] = s2;
      target.m.set_diagonal(Vector::Constant(p, 1.0 / s2));
      target.phi = model->y / s2;
      m_changed = true;
    }
    if (h_changed || m_changed) {
      target.bump_version();
    }
  };

  if (options.sample_kappa) {
    const double rate = model->exp_rate_kappa;
    handle.hooks.kappa_prior_log_density = [rate](double k) {
      return k > 0.0 ? std::log(rate) - rate * k
                     : -std::numeric_limits<double>::infinity();
    };
  }

  handle.hooks.log_posterior = [model, p](const ChainState& state,
                                          const QuadTarget&) {
    const double s2 = state.hyper.at("sigma2");
    const double tau = state.hyper.at("tau_gp");
    const int xi = static_cast<int>(state.hyper.at("xi_index"));
    const StgpBasis& basis =
        model->precompute.bases[static_cast<std::size_t>(xi)];
    const double pd = static_cast<double>(p);
    double lp = -0.5 * pd * std::log(s2) -
                0.5 * (model->y - state.theta).squaredNorm() / s2;
    lp += -0.5 * (pd * std::log(tau) + basis.logdet) -
          0.5 * kernel_quad(basis, state.beta) / tau;
    lp += -(model->a_sigma + 1.0) * std::log(s2) - model->b_sigma / s2;
    lp += -(model->a_tau + 1.0) * std::log(tau) - model->b_tau / tau;
    lp += std::log(model->exp_rate_kappa) -
          model->exp_rate_kappa * state.kappa0;
    return lp;
  };

  handle.init = [model](ChainState& state, Rng&) {
    state.beta = model->y;
    state.kappa0 = model->kappa0;
    state.hyper["sigma2"] = model->sigma2;
    state.hyper["tau_gp"] = model->tau_gp;
    state.hyper["xi_index"] = static_cast<double>(model->xi_index);
  };

  handle.retained = [model, p](const ChainState& state) {
    Vector row(p + 4);
    row.head(p) = state.theta;
    row[p] = state.kappa0;
    row[p + 1] = state.hyper.at("sigma2");
    row[p + 2] = state.hyper.at("tau_gp");
    const int xi = static_cast<int>(state.hyper.at("xi_index"));
    row[p + 3] = model->xi_grid[xi];
    return row;
  };
  for (Eigen::Index j = 0; j < p; ++j) {
    handle.param_names.push_back("theta_" + std::to_string(j));
  }
  handle.param_names.emplace_back("kappa0");
  handle.param_names.emplace_back("sigma2");
  handle.param_names.emplace_back("tau_gp");
  handle.param_names.emplace_back("xi");
  return handle;
}

StgpSim simulate_stgp_image(Eigen::Index n1, Eigen::Index n2,
                            const StgpSimParams& params, std::uint64_t seed) {
  if (!(params.tau > 0.0) || !(params.xi > 0.0) || !(params.kappa_star >= 0.0) ||
      !(params.sigma2 >= 0.0)) {
    throw InvalidInputError("simulation parameters out of range");
  }
  const Matrix grid = make_grid(n1, n2);
  Matrix k = squared_exponential_kernel(grid, params.xi);
  const double jitter = 1e-8 * k.diagonal().mean();
  k.diagonal().array() += jitter;
  const CholeskyResult chol = cholesky_psd(SymMatrix(k));
  Rng rng(Rng::mix(seed, 0));
  const Eigen::Index p = grid.rows();
  StgpSim sim;
  sim.beta_true =
      std::sqrt(params.tau) * (chol.lower * rng.normal_vector(p));
  sim.theta_true = soft_threshold(sim.beta_true, params.kappa_star);
  sim.y = sim.theta_true + std::sqrt(params.sigma2) * rng.normal_vector(p);
  return sim;
}

}  // namespace acg
