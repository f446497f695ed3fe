#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <vector>

#include "acg/errors.hpp"
#include "acg/models.hpp"
#include "acg/rng.hpp"
#include "doctest.h"

using acg::LinRegModel;
using acg::Matrix;
using acg::Rng;
using acg::StgpModel;
using acg::Vector;

namespace {

LinRegModel tiny_model() {
  LinRegModel model;
  auto x = std::make_shared<Matrix>(Matrix::Identity(2, 2));
  model.x = x;
  model.y = Vector(2);
  model.y << 1.0, 2.0;
  model.tau = Vector::Ones(2);
  return model;
}

}  // namespace

TEST_CASE("regression target carries the likelihood quadratic exactly") {
  LinRegModel model = tiny_model();
  acg::QuadTarget target = acg::linreg_target(model);
  REQUIRE(target.dim() == 2);
  CHECK(target.phi == model.y);
  CHECK(target.psi == Vector::Zero(2));
  CHECK(target.h.diag_values() == Vector::Ones(2));
  CHECK((target.kappa.array() == model.kappa0).all());

  Rng rng(401);
  for (int i = 0; i < 20; ++i) {
    const Vector theta = rng.normal_vector(2);
    // theta'M theta/2 - phi'theta == ||y - X theta||^2/(2 sigma2) - const
    const double lhs = target.m_energy(theta);
    const double rhs = 0.5 * (model.y - *model.x * theta).squaredNorm() -
                       0.5 * model.y.squaredNorm();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }

  model.sigma2 = 4.0;
  acg::QuadTarget scaled = acg::linreg_target(model);
  CHECK(scaled.phi == Vector(model.y / 4.0));
  const Vector theta = Vector::Ones(2);
  CHECK(scaled.m.quad(theta) ==
        doctest::Approx(target.m.quad(theta) / 4.0).epsilon(1e-12));

  model.tau = Vector::Constant(2, 0.25);
  acg::QuadTarget prior_scaled = acg::linreg_target(model);
  CHECK(prior_scaled.h.diag_values() == Vector::Constant(2, 4.0));
}

TEST_CASE("model validation rejects inconsistent blocks") {
  LinRegModel model = tiny_model();
  model.sigma2 = -1.0;
  CHECK_THROWS_AS(model.validate(), acg::InvalidInputError);
  model = tiny_model();
  model.tau = Vector::Ones(3);
  CHECK_THROWS_AS(model.validate(), acg::InvalidInputError);
  model = tiny_model();
  model.y = Vector::Ones(5);
  CHECK_THROWS_AS(model.validate(), acg::InvalidInputError);
}

TEST_CASE("simulated designs have the documented signal and correlation") {
  const acg::LinRegSim sim = acg::simulate_regression(300, 10, 0.0, 3.0, 5);
  REQUIRE(sim.x.rows() == 300);
  REQUIRE(sim.x.cols() == 10);
  const double scale = 3.0 * std::sqrt(std::log(10.0) / 300.0);
  CHECK(sim.theta_true[0] == doctest::Approx(2.0 * scale).epsilon(1e-12));
  CHECK(sim.theta_true[0] == doctest::Approx(0.525654).epsilon(1e-4));
  CHECK(sim.theta_true[1] == doctest::Approx(-3.0 * scale).epsilon(1e-12));

  const acg::LinRegSim sparse = acg::simulate_regression(50, 50, 0.5, 3.0, 6);
  CHECK(sparse.theta_true.head(10).cwiseAbs().minCoeff() > 0.0);
  CHECK(sparse.theta_true.tail(40).cwiseAbs().maxCoeff() == 0.0);

  // independent columns at rho = 0
  Vector c0 = sim.x.col(0), c1 = sim.x.col(1);
  c0.array() -= c0.mean();
  c1.array() -= c1.mean();
  const double corr0 = c0.dot(c1) / std::sqrt(c0.squaredNorm() *
                                              c1.squaredNorm());
  CHECK(std::abs(corr0) < 0.15);

  const acg::LinRegSim ar = acg::simulate_regression(3000, 12, 0.9, 3.0, 7);
  Vector a0 = ar.x.col(4), a1 = ar.x.col(5);
  a0.array() -= a0.mean();
  a1.array() -= a1.mean();
  const double corr9 = a0.dot(a1) / std::sqrt(a0.squaredNorm() *
                                              a1.squaredNorm());
  CHECK(corr9 == doctest::Approx(0.9).epsilon(0.06));

  // unit observation noise around the linear predictor
  const Vector resid = ar.y - ar.x * ar.theta_true;
  CHECK(resid.squaredNorm() / resid.size() == doctest::Approx(1.0).epsilon(0.1));

  CHECK(acg::simulate_regression(300, 10, 0.0, 3.0, 5).y == sim.y);
  CHECK_THROWS_AS(acg::simulate_regression(300, 5, 0.0, 3.0, 5),
                  acg::InvalidInputError);
  CHECK_THROWS_AS(acg::simulate_regression(300, 10, 1.0, 3.0, 5),
                  acg::InvalidInputError);
}

TEST_CASE("conjugate hyper updates match their analytic posteriors") {
  Rng rng(405);
  const acg::LinRegSim sim = acg::simulate_regression(40, 10, 0.3, 3.0, 9);
  const Vector theta = Vector::Zero(10);
  // sigma2 | theta=0 ~ IG(a + n/2, b + ||y||^2/2)
  const double shape = 1.0 + 20.0;
  const double rate = 1.0 + 0.5 * sim.y.squaredNorm();
  const int n = 100000;
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    s += acg::update_sigma2(sim.x, sim.y, theta, 1.0, 1.0, rng);
  CHECK(s / n == doctest::Approx(rate / (shape - 1.0)).epsilon(0.02));

  // tau_j | beta_j ~ IG(a + 1/2, b + beta_j^2/2), independently over j
  Vector beta(2);
  beta << 2.0, 0.0;
  Vector acc = Vector::Zero(2);
  for (int i = 0; i < n; ++i) acc += acg::update_tau(beta, 5.0, 1.0, rng);
  CHECK(acc[0] / n == doctest::Approx(3.0 / 4.5).epsilon(0.02));
  CHECK(acc[1] / n == doctest::Approx(1.0 / 4.5).epsilon(0.02));
}

TEST_CASE("joint log density differences match a direct reimplementation") {
  const acg::LinRegSim sim = acg::simulate_regression(30, 10, 0.2, 3.0, 11);
  LinRegModel model;
  model.x = std::make_shared<Matrix>(sim.x);
  model.y = sim.y;
  model.tau = Vector::Ones(10);
  const auto direct = [&](const Vector& beta, const Vector& tau, double s2,
                          double k0) {
    const Vector theta = acg::soft_threshold(beta, k0);
    double v = -0.5 * model.n() * std::log(s2) -
               0.5 * (model.y - sim.x * theta).squaredNorm() / s2;
    for (Eigen::Index j = 0; j < 10; ++j) {
      v += -0.5 * std::log(tau[j]) - 0.5 * beta[j] * beta[j] / tau[j];
      v += -(model.a_tau + 1.0) * std::log(tau[j]) - model.b_tau / tau[j];
    }
    v += -(model.a_sigma + 1.0) * std::log(s2) - model.b_sigma / s2;
    v += std::log(model.exp_rate_kappa) - model.exp_rate_kappa * k0;
    return v;
  };
  Rng rng(413);
  for (int i = 0; i < 10; ++i) {
    const Vector beta1 = rng.normal_vector(10);
    const Vector beta2 = rng.normal_vector(10);
    const Vector tau1 = rng.normal_vector(10).cwiseAbs() +
                        Vector::Constant(10, 0.1);
    const Vector tau2 = rng.normal_vector(10).cwiseAbs() +
                        Vector::Constant(10, 0.1);
    const double d_lib =
        acg::linreg_log_joint(model, beta1,
                              acg::soft_threshold(beta1, 0.7), tau1, 1.3,
                              0.7) -
        acg::linreg_log_joint(model, beta2,
                              acg::soft_threshold(beta2, 0.4), tau2, 0.8,
                              0.4);
    const double d_direct = direct(beta1, tau1, 1.3, 0.7) -
                            direct(beta2, tau2, 0.8, 0.4);
    CHECK(d_lib == doctest::Approx(d_direct).epsilon(1e-10));
  }
}

TEST_CASE("regression handles run under every augmentation scheme") {
  const acg::LinRegSim sim = acg::simulate_regression(40, 12, 0.4, 3.0, 13);
  for (const acg::AnticorrMethod method :
       {acg::AnticorrMethod::kDirect, acg::AnticorrMethod::kSvd,
        acg::AnticorrMethod::kSeries}) {
    LinRegModel model;
    model.x = std::make_shared<Matrix>(sim.x);
    model.y = sim.y;
    model.tau = Vector::Ones(12);
    acg::LinRegOptions options;
    options.method = method;
    acg::ModelHandle handle = acg::make_linreg_handle(model, options);
    acg::ChainConfig cfg;
    cfg.iterations = 300;
    cfg.burn_in = 100;
    cfg.seed = 17;
    const acg::SampleStore store = acg::run_chain(cfg, handle);
    REQUIRE(store.draws.cols() == 14);
    CHECK(store.param_names[12] == "kappa0");
    CHECK(store.param_names[13] == "sigma2");
    CHECK(store.draws.allFinite());
    CHECK(store.draws.col(12).minCoeff() > 0.0);  // kappa0
    CHECK(store.draws.col(13).minCoeff() > 0.0);  // sigma2
    REQUIRE(store.logpost.size() == 300);
    for (const double lp : store.logpost) REQUIRE(std::isfinite(lp));
  }
}

TEST_CASE("grid construction and kernel basics") {
  const Matrix grid = acg::make_grid(2, 3);
  REQUIRE(grid.rows() == 6);
  REQUIRE(grid.cols() == 2);
  CHECK(grid(0, 0) == 0.0);
  CHECK(grid(0, 1) == 0.0);
  CHECK(grid(1, 1) == 1.0);  // row-major: second point is (0, 1)
  CHECK(grid(3, 0) == 1.0);

  const Matrix k1 = acg::squared_exponential_kernel(acg::make_grid(1, 1), 2.0);
  REQUIRE(k1.rows() == 1);
  CHECK(k1(0, 0) == 1.0);

  // two pixels at distance 1 with 2 xi^2 = 1: off-diagonal exp(-1)
  const Matrix k2 = acg::squared_exponential_kernel(
      acg::make_grid(1, 2), std::sqrt(0.5));
  CHECK(k2(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(k2(1, 0) == k2(0, 1));

  const Vector xi_grid = acg::default_xi_grid();
  REQUIRE(xi_grid.size() == 20);
  CHECK(xi_grid[0] == 0.5);
  CHECK(xi_grid[19] == 10.0);
}

TEST_CASE("precomputed eigenbases reconstruct the jittered kernels") {
  const Matrix grid = acg::make_grid(3, 3);
  Vector xi_grid(2);
  xi_grid << 1.0, 2.0;
  const acg::StgpPrecompute pre = acg::build_stgp_precompute(grid, xi_grid);
  REQUIRE(pre.bases.size() == 2);
  REQUIRE(pre.p == 9);
  for (const acg::StgpBasis& basis : pre.bases) {
    REQUIRE(basis.evals.size() == 9);
    CHECK(basis.evals.minCoeff() > 0.0);
    const Matrix k = acg::squared_exponential_kernel(grid, basis.xi);
    const Matrix rebuilt =
        *basis.q * basis.evals.asDiagonal() * basis.q->transpose();
    CHECK((rebuilt - k).cwiseAbs().maxCoeff() < 1e-6);
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < 9; ++i) logdet += std::log(basis.evals[i]);
    CHECK(basis.logdet == doctest::Approx(logdet).epsilon(1e-10));

    Rng rng(417);
    const Vector beta = rng.normal_vector(9);
    const double quad = acg::kernel_quad(basis, beta);
    const double solved = beta.dot(rebuilt.ldlt().solve(beta));
    CHECK(quad == doctest::Approx(solved).epsilon(1e-8));
  }
}

TEST_CASE("bandwidth draw follows the exact two-candidate posterior") {
  const Matrix grid = acg::make_grid(2, 2);
  Vector xi_grid(2);
  xi_grid << 0.8, 2.5;
  const acg::StgpPrecompute pre = acg::build_stgp_precompute(grid, xi_grid);
  Rng rng(419);
  const Vector beta = 0.7 * rng.normal_vector(4);
  const double tau = 1.4;

  // exact posterior from the normal density of beta under each candidate
  Vector lw(2);
  for (int l = 0; l < 2; ++l) {
    lw[l] = -0.5 * (4.0 * std::log(tau) + pre.bases[l].logdet) -
            0.5 * acg::kernel_quad(pre.bases[l], beta) / tau;
  }
  const double p1 = 1.0 / (1.0 + std::exp(lw[0] - lw[1]));
  const int n = 100000;
  int ones = 0;
  for (int i = 0; i < n; ++i) ones += acg::update_xi(pre, beta, tau, rng) == 1;
  const double se = std::sqrt(p1 * (1.0 - p1) / n) + 1e-12;
  CHECK(std::abs(ones / static_cast<double>(n) - p1) < 5.0 * se);
}

TEST_CASE("gp amplitude draw reduces to its prior at beta = 0") {
  const Matrix grid = acg::make_grid(2, 2);
  Vector xi_grid(1);
  xi_grid << 1.0;
  const acg::StgpPrecompute pre = acg::build_stgp_precompute(grid, xi_grid);
  Rng rng(421);
  const Vector beta = Vector::Zero(4);
  const int n = 100000;
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    s += acg::update_tau_gp(pre, 0, beta, 0.1, 0.1, rng);
  // IG(0.1 + 2, 0.1): mean = 0.1 / 1.1
  CHECK(s / n == doctest::Approx(0.1 / 1.1).epsilon(0.03));
}

TEST_CASE("image simulation respects its parameters") {
  acg::StgpSimParams params;
  params.kappa_star = 1e9;
  const acg::StgpSim flat = acg::simulate_stgp_image(4, 4, params, 23);
  CHECK(flat.theta_true.cwiseAbs().maxCoeff() == 0.0);

  params.kappa_star = 0.5;
  params.sigma2 = 0.0;
  const acg::StgpSim noiseless = acg::simulate_stgp_image(4, 4, params, 23);
  CHECK(noiseless.y == noiseless.theta_true);
  CHECK(noiseless.theta_true ==
        acg::soft_threshold(noiseless.beta_true, 0.5));

  const acg::StgpSim a = acg::simulate_stgp_image(5, 4, {}, 29);
  const acg::StgpSim b = acg::simulate_stgp_image(5, 4, {}, 29);
  REQUIRE(a.y.size() == 20);
  CHECK(a.y == b.y);
  CHECK(a.y != acg::simulate_stgp_image(5, 4, {}, 30).y);
}

TEST_CASE("stgp target and handle wire the eigenbasis prior") {
  const acg::StgpSim sim = acg::simulate_stgp_image(4, 4, {}, 31);
  auto model = std::make_shared<StgpModel>();
  model->grid = acg::make_grid(4, 4);
  model->y = sim.y;
  Vector xi_grid(3);
  xi_grid << 1.0, 2.0, 3.0;
  model->xi_grid = xi_grid;
  model->precompute = acg::build_stgp_precompute(model->grid, xi_grid);
  model->xi_index = 1;
  model->sigma2 = 0.5;

  const acg::QuadTarget target = acg::stgp_target(*model);
  CHECK(target.m.diag_values() == Vector::Constant(16, 2.0));
  CHECK(target.phi == Vector(model->y * 2.0));
  // H = (tau K)^-1 in the eigenbasis: quad form equals the kernel solve
  Rng rng(431);
  const Vector beta = rng.normal_vector(16);
  CHECK(target.h.quad(beta) ==
        doctest::Approx(acg::kernel_quad(model->precompute.bases[1], beta) /
                        model->tau_gp)
            .epsilon(1e-10));

  acg::ModelHandle handle = acg::make_stgp_handle(model, acg::StgpOptions{});
  acg::ChainConfig cfg;
  cfg.iterations = 300;
  cfg.burn_in = 100;
  cfg.seed = 37;
  const acg::SampleStore store = acg::run_chain(cfg, handle);
  REQUIRE(store.draws.cols() == 16 + 4);
  CHECK(store.param_names[16] == "kappa0");
  CHECK(store.param_names[17] == "sigma2");
  CHECK(store.param_names[18] == "tau_gp");
  CHECK(store.param_names[19] == "xi");
  CHECK(store.draws.allFinite());
  CHECK(store.draws.col(18).minCoeff() > 0.0);
  // xi draws take values from the candidate grid
  for (Eigen::Index i = 0; i < store.draws.rows(); ++i) {
    const double xi = store.draws(i, 19);
    CHECK((xi == 1.0 || xi == 2.0 || xi == 3.0));
  }
}
