#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <utility>

#include "acg/anticorr.hpp"
#include "acg/diagnostics.hpp"
#include "acg/distributions.hpp"
#include "acg/errors.hpp"
#include "acg/experiments.hpp"
#include "acg/l1ball.hpp"
#include "acg/linalg.hpp"
#include "acg/models.hpp"
#include "acg/rng.hpp"

namespace py = pybind11;

namespace {

py::dict store_to_dict(const acg::SampleStore& store) {
  py::dict d;
  d["draws"] = store.draws;
  d["param_names"] = store.param_names;
  d["logpost"] = store.logpost;
  d["seed"] = store.seed;
  d["wall_seconds"] = store.wall_seconds;
  return d;
}

}  // namespace

PYBIND11_MODULE(_acgibbs, mod) {
  mod.doc() =
      "Blocked Gibbs sampling for soft-thresholded sparse models via "
      "anti-correlation Gaussian data augmentation";

  py::register_exception<acg::InvalidInputError>(mod, "InvalidInputError",
                                                 PyExc_ValueError);
  py::register_exception<acg::DefinitenessError>(mod, "DefinitenessError",
                                                 PyExc_ArithmeticError);

  mod.def(
      "soft_threshold",
      [](const acg::Vector& beta, const acg::Vector& kappa) {
        return acg::soft_threshold(beta, kappa);
      },
      py::arg("beta"), py::arg("kappa"),
      "Elementwise sign(beta) * max(|beta| - kappa, 0).");
  mod.def(
      "soft_threshold_scalar",
      [](double beta, double kappa) { return acg::soft_threshold(beta, kappa); },
      py::arg("beta"), py::arg("kappa"));

  mod.def("log_norm_cdf", &acg::log_norm_cdf, py::arg("x"));
  mod.def("log_phi_diff", &acg::log_phi_diff, py::arg("a"), py::arg("b"),
          "log(Phi(b) - Phi(a)), stable in the far tails.");

  mod.def("choose_d", &acg::choose_d, py::arg("bound"),
          py::arg("epsilon") = 1e-6,
          "Augmentation level strictly above a spectral-norm bound.");
  mod.def(
      "spectral_upper_bound",
      [](const acg::Matrix& m) {
        return acg::spectral_upper_bound(acg::SymMatrix(m));
      },
      py::arg("m"));
  mod.def(
      "gram_spectral_upper_bound",
      [](const acg::Matrix& x, const acg::Vector& omega) {
        return acg::gram_spectral_upper_bound(x, omega);
      },
      py::arg("x"), py::arg("omega"));

  mod.def(
      "series_plan",
      [](double eps, double rho) {
        const acg::SeriesPlan plan = acg::series_plan(eps, rho);
        return py::make_tuple(plan.k_hat, plan.passes);
      },
      py::arg("eps"), py::arg("rho"),
      "(series order, recursion passes) reaching covariance-tail eps.");

  mod.def(
      "sample_anticorr",
      [](const acg::Matrix& m, double d, const acg::Vector& theta, long n,
         std::uint64_t seed) {
        const acg::DirectAnticorrSampler sampler(acg::SymMatrix(m), d);
        acg::Rng rng(acg::Rng::mix(seed, 0));
        acg::Matrix out(n, theta.size());
        for (long i = 0; i < n; ++i)
          out.row(i) = sampler.draw(theta, rng).transpose();
        return out;
      },
      py::arg("m"), py::arg("d"), py::arg("theta"), py::arg("n"),
      py::arg("seed"),
      "n rows drawn from N((dI - M) theta, dI - M); requires d above the "
      "spectral norm of M.");

  mod.def(
      "mixture_probabilities",
      [](double a, double c, double d, double e, double kappa) {
        acg::CoordCoeffs co;
        co.a = a;
        co.c = c;
        co.d = d;
        co.e = e;
        co.kappa = kappa;
        double p_neg = 0.0, p_zero = 0.0, p_pos = 0.0;
        acg::mixture_log_weights(co).probabilities(p_neg, p_zero, p_pos);
        return py::make_tuple(p_neg, p_zero, p_pos);
      },
      py::arg("a"), py::arg("c"), py::arg("d"), py::arg("e"),
      py::arg("kappa"),
      "Probabilities of the sign component b in {-1, 0, +1} for one "
      "coordinate.");

  mod.def(
      "autocorrelation",
      [](const acg::Vector& chain, Eigen::Index max_lag) {
        return acg::autocorrelation(chain, max_lag).acf;
      },
      py::arg("chain"), py::arg("max_lag"));
  mod.def(
      "effective_sample_size",
      [](const acg::Vector& chain) {
        return acg::effective_sample_size(chain).ess;
      },
      py::arg("chain"));
  mod.def("quantile", &acg::quantile, py::arg("values"), py::arg("q"));

  mod.def(
      "simulate_regression",
      [](Eigen::Index n, Eigen::Index p, double rho, double c,
         std::uint64_t seed) {
        acg::LinRegSim sim = acg::simulate_regression(n, p, rho, c, seed);
        py::dict d;
        d["x"] = sim.x;
        d["y"] = sim.y;
        d["theta_true"] = sim.theta_true;
        return d;
      },
      py::arg("n"), py::arg("p"), py::arg("rho"), py::arg("c"),
      py::arg("seed"));

  mod.def(
      "run_linreg",
      [](Eigen::Index n, Eigen::Index p, double rho, double c,
         long iterations, long burn_in, long thinning, std::uint64_t seed) {
        acg::LinRegExperimentConfig cfg;
        cfg.n = n;
        cfg.p = p;
        cfg.rho = rho;
        cfg.c = c;
        cfg.iterations = iterations;
        cfg.burn_in = burn_in;
        cfg.thinning = thinning;
        cfg.seeds = {seed};
        const acg::LinRegExperimentResult res = acg::run_linreg_experiment(cfg);
        const acg::LinRegSeedResult& r = res.per_seed.front();
        py::dict d = store_to_dict(r.store);
        d["theta_true"] = r.theta_true;
        d["mse"] = r.metrics.mse;
        d["fpr"] = r.metrics.fpr;
        d["fnr"] = r.metrics.fnr;
        d["ess_per_second"] = r.ess.ess_per_second;
        return d;
      },
      py::arg("n") = 300, py::arg("p") = 50, py::arg("rho") = 0.5,
      py::arg("c") = 3.0, py::arg("iterations") = 10000,
      py::arg("burn_in") = 2000, py::arg("thinning") = 1, py::arg("seed") = 1,
      "Sparse-regression benchmark: one simulated dataset, one blocked "
      "chain, selection metrics against the simulation truth.");

  mod.def(
      "run_tmvn",
      [](Eigen::Index p, double rho, double lower, double upper,
         long iterations, long burn_in, std::uint64_t seed) {
        acg::TmvnExperimentConfig cfg;
        cfg.p = p;
        cfg.rho = rho;
        cfg.lower = lower;
        cfg.upper = upper;
        cfg.iterations = iterations;
        cfg.burn_in = burn_in;
        cfg.seed = seed;
        const acg::TmvnExperimentResult res = acg::run_tmvn_experiment(cfg);
        py::dict d;
        d["draws"] = res.draws;
        d["marginal_mean"] = res.marginal_mean;
        d["marginal_var"] = res.marginal_var;
        d["analytic_mean"] = res.analytic_mean;
        d["all_inside_box"] = res.all_inside_box;
        return d;
      },
      py::arg("p") = 10, py::arg("rho") = 0.0, py::arg("lower") = -4.0,
      py::arg("upper") = -3.0, py::arg("iterations") = 12000,
      py::arg("burn_in") = 2000, py::arg("seed") = 1,
      "Gibbs sampling of a box-truncated multivariate normal.");

  mod.def(
      "run_stgp",
      [](Eigen::Index n1, Eigen::Index n2, long iterations, long burn_in,
         std::uint64_t seed) {
        acg::StgpExperimentConfig cfg;
        cfg.n1 = n1;
        cfg.n2 = n2;
        cfg.iterations = iterations;
        cfg.burn_in = burn_in;
        cfg.seed = seed;
        const acg::StgpExperimentResult res = acg::run_stgp_experiment(cfg);
        py::dict d;
        d["posterior_mean"] = res.posterior_mean;
        d["posterior_sd"] = res.posterior_sd;
        d["inclusion_prob"] = res.inclusion_prob;
        d["truth"] = res.data.theta_true;
        d["mse"] = res.mse;
        d["lipschitz_ok"] = res.lipschitz_ok;
        return d;
      },
      py::arg("n1") = 30, py::arg("n2") = 30, py::arg("iterations") = 3000,
      py::arg("burn_in") = 1000, py::arg("seed") = 1,
      "Soft-thresholded GP image regression on an n1 x n2 grid.");
}
