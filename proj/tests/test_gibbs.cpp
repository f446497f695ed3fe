#include <cmath>
#include <functional>
#include <vector>

#include "acg/diagnostics.hpp"
#include "acg/errors.hpp"
#include "acg/gibbs.hpp"
#include "acg/l1ball.hpp"
#include "acg/quad_target.hpp"
#include "acg/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

using acg::Matrix;
using acg::ModelHandle;
using acg::QuadMat;
using acg::QuadTarget;
using acg::Rng;
using acg::SymMatrix;
using acg::Vector;

namespace {

Matrix random_psd(Eigen::Index p, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Matrix x(p + 3, p);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < p; ++j) x(i, j) = rng.normal();
  return scale * (x.transpose() * x) / static_cast<double>(p + 3);
}

// 1-D quadrature moments of the coordinate law
// f(beta) = exp(a*th - d th^2/2 + c beta - e beta^2/2), th = ST(beta, kappa).
struct CoordLaw {
  double p_zero = 0.0;
  double mean_theta = 0.0;
};

CoordLaw coord_law(double a, double c, double d, double e, double kappa) {
  const auto f = [&](long double bl) {
    const double beta = static_cast<double>(bl);
    const double th = acg::soft_threshold(beta, kappa);
    return static_cast<long double>(
        std::exp(a * th - 0.5 * d * th * th + c * beta - 0.5 * e * beta * beta));
  };
  const double span =
      45.0 / std::sqrt(d + e) + (std::abs(a) + std::abs(c)) / (d + e) + kappa +
      1.0;
  // segmented: the tail mass can hide in a narrow spike near +/-kappa that a
  // single top-level adaptive call never probes
  const double w0 =
      static_cast<double>(oracles::integrate_segmented(f, -kappa, kappa, 1e-14));
  const double wp =
      static_cast<double>(oracles::integrate_segmented(f, kappa, span, 1e-14));
  const double wn = static_cast<double>(
      oracles::integrate_segmented(f, -span, -kappa, 1e-14));
  const auto th_f = [&](long double bl) {
    return static_cast<long double>(acg::soft_threshold(
               static_cast<double>(bl), kappa)) *
           f(bl);
  };
  const double m = static_cast<double>(
      oracles::integrate_segmented(th_f, kappa, span, 1e-14) +
      oracles::integrate_segmented(th_f, -span, -kappa, 1e-14));
  return {w0 / (w0 + wp + wn), m / (w0 + wp + wn)};
}

// piecewise 2-D quadrature of g over [-L, L]^2 split at the soft-threshold
// kinks +/- kappa in each coordinate
double quad2d(const std::function<double(double, double)>& g, double kappa1,
              double kappa2, double span) {
  const std::vector<double> b1 = {-span, -kappa1, kappa1, span};
  const std::vector<double> b2 = {-span, -kappa2, kappa2, span};
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < b1.size(); ++i) {
    const auto outer = [&](long double x) -> long double {
      long double inner_total = 0.0;
      for (std::size_t j = 0; j + 1 < b2.size(); ++j) {
        inner_total += oracles::integrate_segmented(
            [&](long double y) {
              return static_cast<long double>(
                  g(static_cast<double>(x), static_cast<double>(y)));
            },
            b2[j], b2[j + 1], 1e-13, 16);
      }
      return inner_total;
    };
    total += static_cast<double>(
        oracles::integrate_segmented(outer, b1[i], b1[i + 1], 1e-10, 24));
  }
  return total;
}

ModelHandle diagonal_model() {
  Vector m_diag(3), h_diag(3), phi(3), psi(3), kappa(3);
  m_diag << 1.2, 0.7, 2.0;
  h_diag << 0.8, 1.5, 0.4;
  phi << 0.5, -1.0, 0.0;
  psi << -0.3, 0.6, 0.8;
  kappa << 1.0, 0.4, 1.5;
  QuadTarget target(QuadMat::diagonal(m_diag), phi, QuadMat::diagonal(h_diag),
                    psi, kappa);
  return ModelHandle(std::move(target));
}

}  // namespace

TEST_CASE("run_chain validates its configuration") {
  acg::ChainConfig cfg;
  ModelHandle model = diagonal_model();
  cfg.iterations = 0;
  CHECK_THROWS_AS(acg::run_chain(cfg, model), acg::ConfigError);
  cfg.iterations = 100;
  cfg.burn_in = 100;
  CHECK_THROWS_AS(acg::run_chain(cfg, model), acg::ConfigError);
  cfg.burn_in = -1;
  CHECK_THROWS_AS(acg::run_chain(cfg, model), acg::ConfigError);
  cfg.burn_in = 10;
  cfg.thinning = 0;
  CHECK_THROWS_AS(acg::run_chain(cfg, model), acg::ConfigError);
}

TEST_CASE("run_chain is reproducible and sized by the retain rule") {
  acg::ChainConfig cfg;
  cfg.iterations = 500;
  cfg.burn_in = 120;
  cfg.thinning = 3;
  cfg.seed = 42;
  ModelHandle m1 = diagonal_model();
  ModelHandle m2 = diagonal_model();
  ModelHandle m3 = diagonal_model();
  const acg::SampleStore s1 = acg::run_chain(cfg, m1);
  const acg::SampleStore s2 = acg::run_chain(cfg, m2);
  CHECK(s1.draws.rows() == (500 - 120) / 3);
  CHECK(s1.draws.cols() == 3);
  CHECK(s1.param_names == std::vector<std::string>{"theta_0", "theta_1",
                                                   "theta_2"});
  CHECK(s1.draws == s2.draws);
  cfg.seed = 43;
  const acg::SampleStore s3 = acg::run_chain(cfg, m3);
  CHECK(s1.draws != s3.draws);

  acg::ChainConfig cfg10k;
  cfg10k.iterations = 10000;
  cfg10k.burn_in = 2000;
  ModelHandle m4 = diagonal_model();
  CHECK(acg::run_chain(cfg10k, m4).draws.rows() == 8000);
}

TEST_CASE("diagonal targets factorize over coordinates") {
  ModelHandle model = diagonal_model();
  acg::ChainConfig cfg;
  cfg.iterations = 60000;
  cfg.burn_in = 2000;
  cfg.seed = 7;
  const acg::SampleStore store = acg::run_chain(cfg, model);
  const double n = static_cast<double>(store.draws.rows());

  Vector m_diag(3), h_diag(3), phi(3), psi(3), kappa(3);
  m_diag << 1.2, 0.7, 2.0;
  h_diag << 0.8, 1.5, 0.4;
  phi << 0.5, -1.0, 0.0;
  psi << -0.3, 0.6, 0.8;
  kappa << 1.0, 0.4, 1.5;
  for (int j = 0; j < 3; ++j) {
    const CoordLaw law = coord_law(phi[j], psi[j], m_diag[j], h_diag[j],
                                   kappa[j]);
    const double p_hat =
        (store.draws.col(j).array() == 0.0).cast<double>().mean();
    // independent coordinate draws each sweep: the chain is iid here
    const double se = std::sqrt(law.p_zero * (1.0 - law.p_zero) / n);
    CHECK(std::abs(p_hat - law.p_zero) < 5.0 * se + 1e-9);
    const double sd = std::sqrt(
        (store.draws.col(j).array() - store.draws.col(j).mean()).square().mean());
    CHECK(std::abs(store.draws.col(j).mean() - law.mean_theta) <
          5.0 * sd / std::sqrt(n));
  }
}

TEST_CASE("dense couplings are stationary for the quadrature law") {
  const Matrix m = random_psd(2, 901);
  const Matrix h = random_psd(2, 902, 0.5);
  Vector phi(2), psi(2), kappa(2);
  phi << 0.8, -0.2;
  psi << 0.1, 0.4;
  kappa << 0.7, 0.7;
  QuadTarget target(QuadMat::dense(SymMatrix(m)), phi,
                    QuadMat::dense(SymMatrix(h)), psi, kappa);
  ModelHandle model{std::move(target)};

  const auto joint = [&](double b1, double b2) {
    Vector beta(2);
    beta << b1, b2;
    const Vector th = acg::soft_threshold(beta, kappa);
    const double expo = phi.dot(th) - 0.5 * th.dot(m * th) + psi.dot(beta) -
                        0.5 * beta.dot(h * beta);
    return std::exp(expo);
  };
  const double span = 14.0;
  const double z = quad2d(joint, kappa[0], kappa[1], span);
  const double mean_th1 =
      quad2d([&](double b1, double b2) {
        return acg::soft_threshold(b1, kappa[0]) * joint(b1, b2);
      },
             kappa[0], kappa[1], span) /
      z;
  const double p_zero_1 =
      quad2d([&](double b1, double b2) {
        return std::abs(b1) < kappa[0] ? joint(b1, b2) : 0.0;
      },
             kappa[0], kappa[1], span) /
      z;

  acg::ChainConfig cfg;
  cfg.iterations = 60000;
  cfg.burn_in = 4000;
  cfg.seed = 11;
  const acg::SampleStore store = acg::run_chain(cfg, model);
  const Vector chain = store.draws.col(0);
  const double n = static_cast<double>(chain.size());
  const double ess = acg::effective_sample_size(chain).ess;
  const double sd =
      std::sqrt((chain.array() - chain.mean()).square().mean());
  CHECK(std::abs(chain.mean() - mean_th1) <
        5.0 * sd / std::sqrt(std::min(ess, n)) + 1e-4);
  const double p_hat = (chain.array() == 0.0).cast<double>().mean();
  CHECK(std::abs(p_hat - p_zero_1) < 0.02);
}

TEST_CASE("gibbs_step keeps theta consistent and wraps hook failures") {
  ModelHandle model = diagonal_model();
  model.hooks.kappa_prior_log_density = [](double k) { return -k; };
  acg::ChainState state;
  state.beta = Vector::Zero(3);
  state.kappa0 = 1.0;
  model.target.kappa = Vector::Constant(3, 1.0);
  state.theta = acg::soft_threshold(state.beta, model.target.kappa);
  acg::GibbsCache cache;
  Rng rng(77);
  for (int i = 0; i < 200; ++i) {
    acg::gibbs_step(state, model.target, acg::GibbsSpecs{}, model.hooks, cache,
                    rng);
    CHECK(state.theta == acg::soft_threshold(state.beta, model.target.kappa));
    CHECK((model.target.kappa.array() == state.kappa0).all());
  }
  CHECK(state.iteration == 200);

  ModelHandle failing = diagonal_model();
  failing.hooks.update_hypers = [](acg::ChainState&, QuadTarget&, Rng&) {
    throw acg::NumericError("hook failure");
  };
  acg::ChainConfig cfg;
  cfg.iterations = 10;
  cfg.burn_in = 2;
  CHECK_THROWS_AS(acg::run_chain(cfg, failing), acg::StateError);
}

TEST_CASE("missing augmentation draw for a coupled side is an error") {
  const Matrix m = random_psd(2, 905);
  Vector phi(2), psi(2), kappa(2);
  phi << 0.1, 0.2;
  psi << 0.0, 0.0;
  kappa << 0.5, 0.5;
  QuadTarget target(QuadMat::dense(SymMatrix(m)), phi,
                    QuadMat::diagonal(Vector::Ones(2)), psi, kappa);
  acg::GibbsHooks hooks;
  hooks.sample_r = [](const QuadTarget&, const acg::ChainState&, Rng&) {
    return acg::AugDraw{};  // empty draw despite a dense M
  };
  acg::ChainState state;
  state.beta = Vector::Zero(2);
  state.theta = acg::soft_threshold(state.beta, kappa);
  acg::GibbsCache cache;
  Rng rng(79);
  CHECK_THROWS_AS(
      acg::gibbs_step(state, target, acg::GibbsSpecs{}, hooks, cache, rng),
      acg::StateError);
}

TEST_CASE("latent gaussian decoupling matches the conjugate posterior") {
  const Eigen::Index p = 3;
  const Matrix m = random_psd(p, 907);
  Vector y(p), v(p);
  y << 0.5, -1.0, 2.0;
  v << 0.5, 1.0, 0.25;
  const Matrix precision = m + Vector(v.cwiseInverse()).asDiagonal().toDenseMatrix();
  const Matrix cov = precision.inverse();
  const Vector mean = cov * Vector(y.array() / v.array()).matrix();

  const acg::LatentGaussianDecoupler dec(
      SymMatrix(m), acg::AntiCorrSpec{0.0, 1e-6});
  const acg::LatentCoordSampler coord =
      [&](Eigen::Index i, double d, double r_i, double, Rng& rng) {
        const double prec = d + 1.0 / v[i];
        return rng.normal((r_i + y[i] / v[i]) / prec, 1.0 / std::sqrt(prec));
      };
  Rng rng(83);
  const int n = 30000;
  Matrix draws(n, p);
  Vector z = Vector::Zero(p);
  for (int i = 0; i < n; ++i) {
    z = dec.update(z, coord, rng);
    draws.row(i) = z.transpose();
  }
  for (Eigen::Index j = 0; j < p; ++j) {
    const Vector col = draws.col(j);
    const double ess = acg::effective_sample_size(col).ess;
    const double sd = std::sqrt((col.array() - col.mean()).square().mean());
    CHECK(std::abs(col.mean() - mean[j]) < 5.0 * sd / std::sqrt(ess));
    CHECK(sd * sd == doctest::Approx(cov(j, j)).epsilon(0.08));
  }
}

TEST_CASE("a zero coupling reduces the latent update to independent targets") {
  const Matrix m = Matrix::Zero(2, 2);
  Vector y(2), v(2);
  y << 1.0, -2.0;
  v << 0.25, 1.0;
  const acg::LatentCoordSampler coord =
      [&](Eigen::Index i, double d, double r_i, double, Rng& rng) {
        const double prec = d + 1.0 / v[i];
        return rng.normal((r_i + y[i] / v[i]) / prec, 1.0 / std::sqrt(prec));
      };
  Rng rng(87);
  Vector z = Vector::Zero(2);
  const int n = 30000;
  Matrix draws(n, 2);
  for (int i = 0; i < n; ++i) {
    z = acg::latent_gaussian_decouple_update(
        SymMatrix(m), acg::AntiCorrSpec{0.0, 1e-2}, z, coord, rng);
    draws.row(i) = z.transpose();
  }
  for (Eigen::Index j = 0; j < 2; ++j) {
    const Vector col = draws.col(j);
    const double ess = acg::effective_sample_size(col).ess;
    CHECK(std::abs(col.mean() - y[j]) <
          5.0 * std::sqrt(v[j]) / std::sqrt(ess));
    CHECK((col.array() - col.mean()).square().mean() ==
          doctest::Approx(v[j]).epsilon(0.08));
  }
}

TEST_CASE("poisson log-link latent model matches quadrature marginals") {
  // pi(z) propto exp(sum_i [y_i z_i - exp(z_i)] - z'Mz/2)
  Matrix m(2, 2);
  m << 0.6, 0.3, 0.3, 0.9;
  Vector y(2);
  y << 1.0, 3.0;
  const auto joint = [&](double z1, double z2) {
    Vector z(2);
    z << z1, z2;
    return std::exp(y[0] * z1 - std::exp(z1) + y[1] * z2 - std::exp(z2) -
                    0.5 * z.dot(m * z));
  };
  // tabulate the z1 marginal cdf
  const double lo = -9.0, hi = 5.0;
  const int grid_n = 500;
  std::vector<double> xs(grid_n + 1), cdf(grid_n + 1);
  const double h = (hi - lo) / grid_n;
  double acc = 0.0;
  double prev = oracles::integrate(
      [&](long double z2) {
        return static_cast<long double>(joint(lo, static_cast<double>(z2)));
      },
      lo, hi, 1e-12);
  xs[0] = lo;
  cdf[0] = 0.0;
  for (int i = 1; i <= grid_n; ++i) {
    xs[i] = lo + h * i;
    const double cur = oracles::integrate(
        [&](long double z2) {
          return static_cast<long double>(joint(xs[i], static_cast<double>(z2)));
        },
        lo, hi, 1e-12);
    acc += 0.5 * h * (prev + cur);
    cdf[i] = acc;
    prev = cur;
  }
  for (double& c : cdf) c /= acc;
  const auto cdf_fn = [&](double x) {
    if (x <= lo) return 0.0;
    if (x >= hi) return 1.0;
    const int i = static_cast<int>((x - lo) / h);
    const double t = (x - lo - i * h) / h;
    return cdf[i] * (1.0 - t) + cdf[static_cast<std::size_t>(i) + 1] * t;
  };

  const acg::LatentCoordSampler coord = acg::make_slice_latent_sampler(
      [&](Eigen::Index i, double x) { return y[i] * x - std::exp(x); },
      acg::SliceConfig{1.0, 50, {-acg::kInf, acg::kInf}});
  const acg::LatentGaussianDecoupler dec(SymMatrix(Matrix(m)),
                                         acg::AntiCorrSpec{0.0, 1e-6});
  Rng rng(89);
  Vector z = Vector::Zero(2);
  const int burn = 2000, keep = 20000;
  std::vector<double> sample;
  sample.reserve(keep);
  for (int i = 0; i < burn + keep; ++i) {
    z = dec.update(z, coord, rng);
    if (i >= burn) sample.push_back(z[0]);
  }
  CHECK(oracles::ks_statistic(sample, cdf_fn) < 0.03);
}

TEST_CASE("truncated mvn with an unbounded box is plain gaussian sampling") {
  const Eigen::Index p = 4;
  const Matrix prec = random_psd(p, 911) +
                      0.5 * Matrix::Identity(p, p);
  Vector mu(p);
  mu << 1.0, -2.0, 0.0, 0.5;
  const Matrix cov = prec.inverse();
  std::vector<acg::TruncInterval> box(p);  // default = unbounded
  acg::TruncatedMvnSampler sampler(mu, SymMatrix(prec), box);
  CHECK(sampler.dim() == p);
  CHECK(sampler.initial_point() == mu);

  Rng rng(91);
  Vector x = sampler.initial_point();
  const int n = 40000;
  Matrix draws(n, p);
  for (int i = 0; i < n; ++i) {
    x = sampler.step(x, rng);
    draws.row(i) = x.transpose();
  }
  for (Eigen::Index j = 0; j < p; ++j) {
    const Vector col = draws.col(j);
    const double ess = acg::effective_sample_size(col).ess;
    const double sd = std::sqrt((col.array() - col.mean()).square().mean());
    CHECK(std::abs(col.mean() - mu[j]) < 5.0 * sd / std::sqrt(ess));
    CHECK(sd * sd == doctest::Approx(cov(j, j)).epsilon(0.10));
  }
}

TEST_CASE("correlated positive-orthant truncation matches quadrature") {
  Matrix sigma(2, 2);
  sigma << 1.0, 0.8, 0.8, 1.0;
  const Matrix prec = sigma.inverse();
  const auto dens = [&](double x1, double x2) {
    Vector x(2);
    x << x1, x2;
    return std::exp(-0.5 * x.dot(prec * x));
  };
  const double span = 8.0;
  double z = 0.0, m1 = 0.0;
  {
    const auto inner = [&](long double x1, bool weighted) {
      return oracles::integrate(
          [&](long double x2) {
            const double f = dens(static_cast<double>(x1),
                                  static_cast<double>(x2));
            return static_cast<long double>(weighted ? x1 * f : f);
          },
          0.0, span, 1e-12);
    };
    z = oracles::integrate(
        [&](long double x1) {
          return static_cast<long double>(inner(x1, false));
        },
        0.0, span, 1e-9);
    m1 = oracles::integrate(
             [&](long double x1) {
               return static_cast<long double>(inner(x1, true));
             },
             0.0, span, 1e-9) /
         z;
  }

  std::vector<acg::TruncInterval> box{{0.0, acg::kInf}, {0.0, acg::kInf}};
  acg::TruncatedMvnSampler sampler(Vector::Zero(2), SymMatrix(prec), box);
  Rng rng(93);
  Vector x = sampler.initial_point();
  CHECK(x[0] > 0.0);
  const int n = 200000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    x = sampler.step(x, rng);
    REQUIRE(x[0] > 0.0);
    REQUIRE(x[1] > 0.0);
    s += x[0];
  }
  CHECK(s / n == doctest::Approx(m1).epsilon(0.015));
}

TEST_CASE("a state outside the box is rejected") {
  std::vector<acg::TruncInterval> box{{0.0, 1.0}};
  acg::TruncatedMvnSampler sampler(Vector::Zero(1),
                                   SymMatrix(Matrix::Identity(1, 1)), box);
  Rng rng(97);
  Vector bad(1);
  bad << 2.0;
  CHECK_THROWS_AS(sampler.step(bad, rng), acg::InvalidInputError);
  Vector nan_state(1);
  nan_state << std::nan("");
  CHECK_THROWS_AS(sampler.step(nan_state, rng), acg::InvalidInputError);
}

TEST_CASE("empty boxes and dimension mismatches are rejected") {
  std::vector<acg::TruncInterval> bad_box{{1.0, 1.0}};
  CHECK_THROWS_AS(
      acg::TruncatedMvnSampler(Vector::Zero(1),
                               SymMatrix(Matrix::Identity(1, 1)), bad_box),
      acg::InvalidInputError);
  std::vector<acg::TruncInterval> box{{0.0, 1.0}};
  CHECK_THROWS_AS(
      acg::TruncatedMvnSampler(Vector::Zero(2),
                               SymMatrix(Matrix::Identity(2, 2)), box),
      acg::InvalidInputError);
}
