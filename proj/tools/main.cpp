#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "acg/errors.hpp"
#include "acg/experiments.hpp"
#include "acg/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json json_or_null(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

json json_vector(const acg::Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    arr.push_back(v[i]);
  }
  return arr;
}

void emit_acf_csv(const std::string& path,
                  const std::vector<acg::LinRegSeedResult>& results,
                  Eigen::Index p) {
  std::vector<std::string> seed_col, param_col, lag_col, value_col;
  for (const acg::LinRegSeedResult& r : results) {
    const Eigen::Index n_params = std::min<Eigen::Index>(10, p);
    const Eigen::Index max_lag =
        std::min<Eigen::Index>(50, r.store.draws.rows() - 1);
    for (Eigen::Index j = 0; j < n_params; ++j) {
      const acg::AcfResult acf =
          acg::autocorrelation(r.store.draws.col(j), max_lag);
      for (Eigen::Index lag = 0; lag <= max_lag; ++lag) {
        seed_col.push_back(std::to_string(r.seed));
        param_col.push_back(r.store.param_names[static_cast<std::size_t>(j)]);
        lag_col.push_back(std::to_string(lag));
        value_col.push_back(acg::format_double(acf.acf[lag]));
      }
    }
  }
  acg::write_long_csv(path, {"seed", "param", "lag", "acf"},
                      {seed_col, param_col, lag_col, value_col});
}

int cmd_linreg(const acg::LinRegExperimentConfig& cfg,
               const std::string& output_dir) {
  const acg::LinRegExperimentResult result = acg::run_linreg_experiment(cfg);
  fs::create_directories(output_dir);

  std::vector<std::string> t_seed, t_iter, t_logpost;
  json per_seed = json::array();
  for (const acg::LinRegSeedResult& r : result.per_seed) {
    acg::write_sample_store_csv(
        output_dir + "/draws_seed" + std::to_string(r.seed) + ".csv", r.store);
    for (std::size_t i = 0; i < r.store.logpost.size(); ++i) {
      t_seed.push_back(std::to_string(r.seed));
      t_iter.push_back(std::to_string(i));
      t_logpost.push_back(acg::format_double(r.store.logpost[i]));
    }
    json entry;
    entry["seed"] = r.seed;
    entry["iterations"] = r.store.iterations;
    entry["burn_in"] = r.store.burn_in;
    entry["thinning"] = r.store.thinning;
    entry["wall_seconds"] = r.store.wall_seconds;
    entry["fpr"] = json_or_null(r.metrics.fpr);
    entry["fnr"] = json_or_null(r.metrics.fnr);
    entry["mse"] = r.metrics.mse;
    entry["ess"] = json_vector(r.ess.ess);
    entry["ess_per_second_first10"] = r.ess.first_group_mean;
    entry["ess_per_second_rest"] =
        std::isnan(r.ess.rest_group_mean) ? json(nullptr)
                                          : json(r.ess.rest_group_mean);
    per_seed.push_back(std::move(entry));
  }
  acg::write_long_csv(output_dir + "/traces.csv",
                      {"seed", "iteration", "logpost"},
                      {t_seed, t_iter, t_logpost});
  emit_acf_csv(output_dir + "/acf.csv", result.per_seed, cfg.p);

  json summary;
  summary["schema_version"] = 1;
  summary["experiment"] = "linreg";
  summary["config"] = {
      {"n", cfg.n},
      {"p", cfg.p},
      {"rho", cfg.rho},
      {"c", cfg.c},
      {"iterations", cfg.iterations},
      {"burn_in", cfg.burn_in},
      {"thinning", cfg.thinning},
      {"sampler", cfg.sampler == acg::RegressionSampler::kBlockedGibbs
                      ? "blocked-gibbs"
                      : "comp-slice"},
  };
  summary["per_seed"] = std::move(per_seed);
  summary["mean_mse"] = result.mean_mse();
  acg::write_text_file(output_dir + "/summary.json", summary.dump(2) + "\n");
  std::cout << "linreg: " << result.per_seed.size()
            << " seed(s) done, mean MSE " << result.mean_mse() << "\n";
  return 0;
}

int cmd_stgp(const acg::StgpExperimentConfig& cfg,
             const std::string& output_dir) {
  const acg::StgpExperimentResult result = acg::run_stgp_experiment(cfg);
  fs::create_directories(output_dir);
  acg::write_sample_store_csv(output_dir + "/draws.csv", result.store);
  acg::write_grid_csv(output_dir + "/posterior_mean.csv",
                      result.posterior_mean, cfg.n1, cfg.n2);
  acg::write_grid_csv(output_dir + "/posterior_sd.csv", result.posterior_sd,
                      cfg.n1, cfg.n2);
  acg::write_grid_csv(output_dir + "/inclusion.csv", result.inclusion_prob,
                      cfg.n1, cfg.n2);
  acg::write_grid_csv(output_dir + "/truth.csv", result.data.theta_true,
                      cfg.n1, cfg.n2);
  acg::write_grid_csv(output_dir + "/y.csv", result.data.y, cfg.n1, cfg.n2);

  const Eigen::Index p = cfg.n1 * cfg.n2;
  const acg::EssReport ess =
      acg::ess_report(result.store.draws.leftCols(p), result.store.wall_seconds);
  json summary;
  summary["schema_version"] = 1;
  summary["experiment"] = "stgp";
  summary["config"] = {
      {"n1", cfg.n1},          {"n2", cfg.n2},
      {"iterations", cfg.iterations}, {"burn_in", cfg.burn_in},
      {"thinning", cfg.thinning},     {"seed", cfg.seed},
      {"sim_tau", cfg.sim.tau},       {"sim_xi", cfg.sim.xi},
      {"sim_kappa", cfg.sim.kappa_star}, {"sim_sigma2", cfg.sim.sigma2},
  };
  summary["seed"] = cfg.seed;
  summary["iterations"] = cfg.iterations;
  summary["burn_in"] = cfg.burn_in;
  summary["wall_seconds"] = result.store.wall_seconds;
  summary["mse"] = result.mse;
  summary["lipschitz_ok"] = result.lipschitz_ok;
  summary["lipschitz_violations"] = result.lipschitz_violations;
  summary["ess_per_second_first10"] = ess.first_group_mean;
  summary["ess_per_second_rest"] = ess.rest_group_mean;
  acg::write_text_file(output_dir + "/summary.json", summary.dump(2) + "\n");
  std::cout << "stgp: MSE " << result.mse << ", Lipschitz "
            << (result.lipschitz_ok ? "ok" : "violated") << "\n";
  return 0;
}

int cmd_tmvn(const acg::TmvnExperimentConfig& cfg,
             const std::string& output_dir) {
  const acg::TmvnExperimentResult result = acg::run_tmvn_experiment(cfg);
  fs::create_directories(output_dir);
  std::vector<std::string> header;
  for (Eigen::Index j = 0; j < cfg.p; ++j) {
    header.push_back("x_" + std::to_string(j));
  }
  acg::write_csv(output_dir + "/draws.csv", header, result.draws);

  double max_err = 0.0;
  json summary;
  summary["schema_version"] = 1;
  summary["experiment"] = "tmvn";
  summary["config"] = {
      {"p", cfg.p},         {"rho", cfg.rho},
      {"lower", cfg.lower}, {"upper", cfg.upper},
      {"iterations", cfg.iterations}, {"burn_in", cfg.burn_in},
      {"seed", cfg.seed},
  };
  summary["seed"] = cfg.seed;
  summary["iterations"] = cfg.iterations;
  summary["burn_in"] = cfg.burn_in;
  summary["wall_seconds"] = result.wall_seconds;
  summary["marginal_mean"] = json_vector(result.marginal_mean);
  summary["marginal_var"] = json_vector(result.marginal_var);
  summary["all_inside_box"] = result.all_inside_box;
  if (result.analytic_mean) {
    summary["analytic_mean"] = *result.analytic_mean;
    for (Eigen::Index j = 0; j < cfg.p; ++j) {
      max_err = std::max(max_err,
                         std::abs(result.marginal_mean[j] -
                                  *result.analytic_mean));
    }
    summary["max_abs_mean_error"] = max_err;
  }
  acg::write_text_file(output_dir + "/summary.json", summary.dump(2) + "\n");
  std::cout << "tmvn: all draws inside box: "
            << (result.all_inside_box ? "yes" : "no");
  if (result.analytic_mean) {
    std::cout << ", max |mean error| " << max_err;
  }
  std::cout << "\n";
  return 0;
}

int cmd_anticorr_check(const acg::AnticorrCheckConfig& cfg,
                       const std::string& output_dir) {
  const acg::AnticorrCheckResult result = acg::run_anticorr_check(cfg);
  std::cout << "series plan: K_hat=" << result.plan.k_hat
            << ", passes=" << result.plan.passes << "\n";
  json instances = json::array();
  for (std::size_t i = 0; i < result.instances.size(); ++i) {
    const acg::AnticorrInstanceReport& rep = result.instances[i];
    std::cout << "instance " << i << ": n=" << rep.n << " p=" << rep.p
              << " max_mean_z=" << rep.max_mean_z
              << " max_cov_z=" << rep.max_cov_z
              << " min_energy_p=" << rep.min_energy_pvalue
              << " energy_rejections=" << rep.energy_rejections << " "
              << (rep.pass ? "PASS" : "FAIL") << "\n";
    json entry;
    entry["n"] = rep.n;
    entry["p"] = rep.p;
    entry["d"] = rep.d;
    entry["max_mean_z"] = rep.max_mean_z;
    entry["max_cov_z"] = rep.max_cov_z;
    entry["min_energy_pvalue"] = rep.min_energy_pvalue;
    entry["energy_rejections"] = rep.energy_rejections;
    entry["series_k_hat"] = rep.series.k_hat;
    entry["series_passes"] = rep.series.passes_executed;
    entry["pass"] = rep.pass;
    instances.push_back(std::move(entry));
  }
  fs::create_directories(output_dir);
  json summary;
  summary["schema_version"] = 1;
  summary["experiment"] = "anticorr-check";
  summary["k_hat"] = result.plan.k_hat;
  summary["passes"] = result.plan.passes;
  summary["instances"] = std::move(instances);
  summary["total_energy_rejections"] = result.total_energy_rejections;
  summary["all_pass"] = result.all_pass;
  acg::write_text_file(output_dir + "/report.json", summary.dump(2) + "\n");
  if (!result.all_pass && !cfg.force_bad_d) {
    std::cerr << "anticorr-check: distribution checks failed\n";
    return 3;
  }
  std::cout << "anticorr-check: all instances pass\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blocked Gibbs sampling with anti-correlation Gaussian "
               "augmentation: experiment runner"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from an INI-style config file");

  const char* env_dir = std::getenv("ACGIBBS_OUTPUT_DIR");
  const std::string default_dir = env_dir ? env_dir : "acgibbs_out";

  // linreg
  acg::LinRegExperimentConfig lin;
  long lin_iterations = -1;
  long lin_burn_in = -1;
  std::string lin_out = default_dir;
  const std::map<std::string, acg::RegressionSampler> sampler_map{
      {"blocked-gibbs", acg::RegressionSampler::kBlockedGibbs},
      {"comp-slice", acg::RegressionSampler::kCompSlice}};
  const std::map<std::string, acg::AnticorrMethod> method_map{
      {"direct", acg::AnticorrMethod::kDirect},
      {"svd", acg::AnticorrMethod::kSvd},
      {"series", acg::AnticorrMethod::kSeries}};
  CLI::App* linreg = app.add_subcommand(
      "linreg", "Sparse-regression simulation benchmark");
  linreg->add_option("--n", lin.n, "Observations")->capture_default_str();
  linreg->add_option("--p", lin.p, "Coefficients")->capture_default_str();
  linreg->add_option("--rho", lin.rho, "Design AR(1) correlation")
      ->capture_default_str();
  linreg->add_option("--c", lin.c, "Signal strength")->capture_default_str();
  linreg->add_option("--iterations", lin_iterations,
                     "Iterations (default 10000, or 20000 when rho > 0.7)");
  linreg->add_option("--burn-in", lin_burn_in,
                     "Burn-in (default 2000, or 10000 when rho > 0.7)");
  linreg->add_option("--thinning", lin.thinning, "Thinning")
      ->capture_default_str();
  linreg->add_option("--seeds", lin.seeds, "Chain seeds")
      ->delimiter(',')
      ->capture_default_str();
  linreg
      ->add_option("--sampler", lin.sampler,
                   "blocked-gibbs or comp-slice")
      ->transform(CLI::CheckedTransformer(sampler_map, CLI::ignore_case))
      ->capture_default_str();
  linreg
      ->add_option("--method", lin.options.method,
                   "Augmentation scheme: direct, svd, or series")
      ->transform(CLI::CheckedTransformer(method_map, CLI::ignore_case))
      ->capture_default_str();
  linreg->add_option("--epsilon", lin.options.epsilon, "Margin for d")
      ->capture_default_str();
  linreg
      ->add_option("--eps-series", lin.options.eps_series,
                   "Series truncation tolerance")
      ->capture_default_str();
  linreg
      ->add_option("--rho-target", lin.options.rho_target,
                   "Series spectral ratio target")
      ->capture_default_str();
  linreg->add_option("--threads", lin.threads, "Worker threads over seeds")
      ->capture_default_str();
  linreg->add_option("--output-dir", lin_out, "Output directory")
      ->capture_default_str();

  // stgp
  acg::StgpExperimentConfig stgp;
  std::string stgp_out = default_dir;
  CLI::App* stgp_cmd = app.add_subcommand(
      "stgp", "Soft-thresholded GP image smoothing experiment");
  stgp_cmd->add_option("--n1", stgp.n1, "Grid rows")->capture_default_str();
  stgp_cmd->add_option("--n2", stgp.n2, "Grid columns")->capture_default_str();
  stgp_cmd->add_option("--iterations", stgp.iterations, "Iterations")
      ->capture_default_str();
  stgp_cmd->add_option("--burn-in", stgp.burn_in, "Burn-in")
      ->capture_default_str();
  stgp_cmd->add_option("--thinning", stgp.thinning, "Thinning")
      ->capture_default_str();
  stgp_cmd->add_option("--seed", stgp.seed, "Chain seed")
      ->capture_default_str();
  stgp_cmd->add_option("--sim-tau", stgp.sim.tau, "Truth GP amplitude")
      ->capture_default_str();
  stgp_cmd->add_option("--sim-xi", stgp.sim.xi, "Truth GP bandwidth")
      ->capture_default_str();
  stgp_cmd
      ->add_option("--sim-kappa", stgp.sim.kappa_star, "Truth threshold")
      ->capture_default_str();
  stgp_cmd->add_option("--sim-sigma2", stgp.sim.sigma2, "Truth noise variance")
      ->capture_default_str();
  stgp_cmd->add_option("--output-dir", stgp_out, "Output directory")
      ->capture_default_str();

  // tmvn
  acg::TmvnExperimentConfig tmvn;
  std::string tmvn_out = default_dir;
  CLI::App* tmvn_cmd = app.add_subcommand(
      "tmvn", "Box-truncated multivariate normal sampler");
  tmvn_cmd->add_option("--p", tmvn.p, "Dimension")->capture_default_str();
  tmvn_cmd
      ->add_option("--rho", tmvn.rho,
                   "AR(1) correlation of the covariance (0 = identity)")
      ->capture_default_str();
  tmvn_cmd->add_option("--lower", tmvn.lower, "Box lower bound")
      ->capture_default_str();
  tmvn_cmd->add_option("--upper", tmvn.upper, "Box upper bound")
      ->capture_default_str();
  tmvn_cmd->add_option("--iterations", tmvn.iterations, "Iterations")
      ->capture_default_str();
  tmvn_cmd->add_option("--burn-in", tmvn.burn_in, "Burn-in")
      ->capture_default_str();
  tmvn_cmd->add_option("--seed", tmvn.seed, "Chain seed")
      ->capture_default_str();
  tmvn_cmd->add_option("--epsilon", tmvn.specs.epsilon, "Margin for d")
      ->capture_default_str();
  tmvn_cmd->add_option("--output-dir", tmvn_out, "Output directory")
      ->capture_default_str();

  // anticorr-check
  acg::AnticorrCheckConfig chk;
  std::string chk_out = default_dir;
  CLI::App* chk_cmd = app.add_subcommand(
      "anticorr-check", "Cross-method agreement checks for the augmentation "
                        "samplers");
  chk_cmd->add_option("--instances", chk.instances, "Random instances")
      ->capture_default_str();
  chk_cmd->add_option("--draws", chk.n_draws, "Draws per method")
      ->capture_default_str();
  chk_cmd->add_option("--seed", chk.seed, "Seed")->capture_default_str();
  chk_cmd->add_option("--eps-series", chk.eps_series, "Series tolerance")
      ->capture_default_str();
  chk_cmd->add_option("--rho-target", chk.rho_target, "Series ratio target")
      ->capture_default_str();
  chk_cmd->add_option("--alpha", chk.alpha, "Energy-test level")
      ->capture_default_str();
  chk_cmd
      ->add_option("--subsample", chk.energy_subsample,
                   "Draws per sample in the energy test")
      ->capture_default_str();
  chk_cmd
      ->add_option("--permutations", chk.energy_permutations,
                   "Energy-test permutations")
      ->capture_default_str();
  chk_cmd->add_flag("--force-bad-d", chk.force_bad_d,
                    "Probe the definiteness gate with an invalid d");
  chk_cmd->add_option("--output-dir", chk_out, "Output directory")
      ->capture_default_str();

  CLI::App* show_cmd = app.add_subcommand(
      "show-config", "Print the effective configuration of every command");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (lin_iterations >= 0) {
    lin.iterations = lin_iterations;
  } else {
    lin.iterations = lin.rho > 0.7 ? 20000 : 10000;
  }
  if (lin_burn_in >= 0) {
    lin.burn_in = lin_burn_in;
  } else {
    lin.burn_in = lin.rho > 0.7 ? 10000 : 2000;
  }

  try {
    if (app.got_subcommand(linreg)) {
      return cmd_linreg(lin, lin_out);
    }
    if (app.got_subcommand(stgp_cmd)) {
      return cmd_stgp(stgp, stgp_out);
    }
    if (app.got_subcommand(tmvn_cmd)) {
      return cmd_tmvn(tmvn, tmvn_out);
    }
    if (app.got_subcommand(chk_cmd)) {
      return cmd_anticorr_check(chk, chk_out);
    }
    if (app.got_subcommand(show_cmd)) {
      std::cout << app.config_to_str(true, true);
      return 0;
    }
  } catch (const acg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const acg::InvalidInputError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const acg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
