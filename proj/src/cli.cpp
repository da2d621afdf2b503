#include <CLI11.hpp>

#include <cmath>
#include <iostream>

#include "proxpnp/harness.hpp"

namespace proxpnp {

namespace {

int do_run(ExperimentSpec spec, bool nu_255) {
  if (nu_255) spec.noise_level /= 255.0;
  Defaults d = resolve_defaults(spec.scheme, spec.noise_level);
  if (!d.exact_key)
    std::cerr << "warning: noise level " << spec.noise_level
              << " is not a tabulated key; using the nearest defaults\n";
  RunReport report = run_experiment(spec);
  std::cout << "scheme " << scheme_name(report.scheme) << ": " << report.iterations
            << " iterations, status "
            << (report.status == RunStatus::converged        ? "converged"
                : report.status == RunStatus::max_iterations ? "max_iterations"
                                                             : "step_failure")
            << ", max violation " << max_violation(report.trace) << "\n";
  std::cout << "artifacts written to " << spec.output_dir << "/\n";
  if (report.status == RunStatus::step_failure) {
    std::cerr << report.message << "\n";
    return 1;
  }
  return 0;
}

int do_validate(const std::string& scheme_str, AlgoConfig cfg, double gamma, double lg,
                double lf, bool have_alpha) {
  auto scheme = scheme_from_name(scheme_str);
  if (!scheme) {
    std::cerr << "unknown scheme: " << scheme_str << "\n";
    return 1;
  }
  const double eff_l = gamma * lg;
  if (!have_alpha) {
    // default alpha to the top of its admissible interval
    const double upper = cfg.lambda * lf > 0.0 ? 1.0 / (cfg.lambda * lf) : 1.0;
    cfg.alpha = std::min(1.0, upper);
  }
  BoundReport r = validate_scheme(*scheme, cfg, lf, eff_l);
  std::cout << r.summary() << "\n";
  if (std::isfinite(r.lambda_limit)) std::cout << "lambda limit: " << r.lambda_limit << "\n";
  if (std::isfinite(r.alpha_lower) && std::isfinite(r.alpha_upper))
    std::cout << "feasible alpha interval: (" << r.alpha_lower << ", " << r.alpha_upper << "]\n";
  if (std::isfinite(r.l_max)) std::cout << "L_max(beta): " << r.l_max << "\n";
  return r.pass ? 0 : 2;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Convergent plug-and-play restoration with certified parameter bounds"};
  app.require_subcommand(1);
  // key=value configuration file; run options live in a [run] section
  app.set_config("--config", "", "configuration file (key=value, [run] section)");

  // ---- run ----
  auto* run_cmd = app.add_subcommand("run", "restore an image and write trace/certificate");
  run_cmd->configurable(true);
  run_cmd->fallthrough(true);  // lets --config appear after the subcommand

  ExperimentSpec spec;
  std::string task_str = "deblur";
  std::string scheme_str = "pgd";
  std::string kernel_str = "gaussian";
  std::string prior_str = "linear";
  bool nu_255 = false;
  double lambda_flag = NAN, alpha_flag = NAN, beta_flag = NAN, gamma_flag = NAN,
         sigma_flag = NAN;

  run_cmd->add_option("--task", task_str, "deblur|sr")
      ->check(CLI::IsMember({"deblur", "sr"}));
  run_cmd
      ->add_option("--scheme", scheme_str,
                   "pgd|alpha_pgd|drs|drsdiff|pd_form|pgd_generic|alpha_pgd_generic")
      ->required();
  run_cmd->add_option("--image", spec.image_path, "input image (png/pgm/ppm)")->required();
  run_cmd->add_option("--out", spec.output_dir, "output directory");
  run_cmd->add_option("--nu", spec.noise_level, "noise level");
  run_cmd->add_flag("--nu-255", nu_255, "interpret --nu in 0..255 units");
  run_cmd->add_option("--kernel", kernel_str, "gaussian|uniform|file");
  run_cmd->add_option("--kernel-std", spec.kernel.stddev, "gaussian kernel std (pixels)");
  run_cmd->add_option("--kernel-size", spec.kernel.size, "kernel side length (odd; 0=auto)");
  run_cmd->add_option("--kernel-file", spec.kernel.path, "plain-text kernel file");
  run_cmd->add_option("--scale", spec.scale, "super-resolution factor");
  run_cmd->add_option("--prior", prior_str, "linear|nonlinear")
      ->check(CLI::IsMember({"linear", "nonlinear"}));
  run_cmd->add_option("--target-lipschitz", spec.prior.target_lipschitz,
                      "certified L of the prior gradient");
  run_cmd->add_option("--hidden", spec.prior.hidden, "nonlinear prior width");
  run_cmd->add_option("--prior-seed", spec.prior.seed, "nonlinear prior weight seed");
  run_cmd->add_option("--lambda", lambda_flag, "regularization trade-off override");
  run_cmd->add_option("--alpha", alpha_flag, "relaxed-scheme alpha override");
  run_cmd->add_option("--beta", beta_flag, "Douglas-Rachford beta override");
  run_cmd->add_option("--gamma", gamma_flag, "denoiser relaxation override");
  run_cmd->add_option("--sigma", sigma_flag, "denoiser strength override");
  run_cmd->add_option("--tau", spec.tau, "stepsize for the generic schemes");
  run_cmd->add_option("--maxiter", spec.max_iter, "iteration cap");
  run_cmd->add_option("--stop", spec.stop_residual, "relative residual stop (0 disables)");
  run_cmd->add_option("--seed", spec.noise_seed, "observation noise seed");
  run_cmd->add_flag("--unsafe", spec.unsafe, "run even if the validator rejects");

  // ---- validate ----
  auto* val_cmd = app.add_subcommand("validate", "check convergence bounds for a configuration");
  std::string v_scheme;
  AlgoConfig v_cfg;
  double v_gamma = 1.0, v_lg = 1.0, v_lf = 1.0;
  val_cmd->add_option("--scheme", v_scheme, "scheme to validate")->required();
  val_cmd->add_option("--lambda", v_cfg.lambda, "regularization trade-off");
  auto* alpha_opt = val_cmd->add_option("--alpha", v_cfg.alpha, "relaxed-scheme alpha");
  val_cmd->add_option("--beta", v_cfg.beta, "Douglas-Rachford beta");
  val_cmd->add_option("--tau", v_cfg.tau, "generic stepsize");
  val_cmd->add_option("--gamma", v_gamma, "denoiser relaxation");
  val_cmd->add_option("--L", v_lg, "certified Lipschitz bound of the prior gradient");
  val_cmd->add_option("--Lf", v_lf, "Lipschitz constant of the fidelity gradient");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (run_cmd->parsed()) {
      spec.task = task_str == "sr" ? Task::sr : Task::deblur;
      auto scheme = scheme_from_name(scheme_str);
      if (!scheme) {
        std::cerr << "unknown scheme: " << scheme_str << "\n";
        return 1;
      }
      spec.scheme = *scheme;
      if (kernel_str == "gaussian") spec.kernel.family = KernelFamily::gaussian;
      else if (kernel_str == "uniform") spec.kernel.family = KernelFamily::uniform;
      else if (kernel_str == "file") spec.kernel.family = KernelFamily::file;
      else {
        std::cerr << "unknown kernel family: " << kernel_str << "\n";
        return 1;
      }
      spec.prior.kind = prior_str == "nonlinear" ? PriorKind::nonlinear : PriorKind::linear;
      if (!std::isnan(lambda_flag)) spec.lambda_override = lambda_flag;
      if (!std::isnan(alpha_flag)) spec.alpha_override = alpha_flag;
      if (!std::isnan(beta_flag)) spec.beta_override = beta_flag;
      if (!std::isnan(gamma_flag)) spec.gamma_override = gamma_flag;
      if (!std::isnan(sigma_flag)) spec.sigma_override = sigma_flag;
      return do_run(spec, nu_255);
    }
    return do_validate(v_scheme, v_cfg, v_gamma, v_lg, v_lf, alpha_opt->count() > 0);
  } catch (const ValidationError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace proxpnp
