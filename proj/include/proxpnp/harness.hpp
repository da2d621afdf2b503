#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "proxpnp/algorithms.hpp"
#include "proxpnp/operators.hpp"

namespace proxpnp {

enum class Task { deblur, sr };
enum class PriorKind { linear, nonlinear };

struct PriorSpec {
  PriorKind kind = PriorKind::linear;
  double target_lipschitz = 0.8;
  int hidden = 32;          // nonlinear prior width
  std::uint64_t seed = 17;  // nonlinear prior weights
};

struct ExperimentSpec {
  Task task = Task::deblur;
  Scheme scheme = Scheme::pgd;
  KernelSpec kernel;
  int scale = 2;              // sr only
  double noise_level = 0.03;  // nu, in [0,1] units
  PriorSpec prior;
  std::optional<double> lambda_override;
  std::optional<double> alpha_override;
  std::optional<double> beta_override;
  std::optional<double> gamma_override;
  std::optional<double> sigma_override;
  double tau = 1.0;  // generic-stepsize schemes only
  int max_iter = 400;
  double stop_residual = 1e-8;
  bool unsafe = false;
  std::uint64_t noise_seed = 0;
  std::string image_path;
  std::string output_dir = "out";
};

// Default hyperparameters keyed by (scheme, noise level); noise levels other
// than {0.01, 0.03, 0.05} fall back to the nearest key.
struct Defaults {
  double gamma = 1.0;
  double lambda = 1.5;
  double alpha = 0.5;
  double beta = 0.5;
  double sigma_ratio = 0.75;  // sigma / nu
  bool exact_key = true;      // false when the nearest-key fallback was used
};

Defaults resolve_defaults(Scheme scheme, double nu);

// Fully assembled experiment: fidelity for the degraded observation
// y = A x* + nu * N(0, I), the relaxed denoiser, initialization, ground
// truth, and the resolved algorithm configuration.
struct BuiltProblem {
  Problem problem;
  Signal reference;
  Signal degraded;
  AlgoConfig config;
  Defaults defaults;
  double nu = 0.0;
};

BuiltProblem build_problem(const ExperimentSpec& spec);
// Variant with the clean image supplied directly (testing path).
BuiltProblem build_problem(const ExperimentSpec& spec, const Signal& clean);

// Runs the experiment and writes trace.csv, restored.png and
// certificate.json into spec.output_dir.
RunReport run_experiment(const ExperimentSpec& spec);

std::string certificate_json(const RunReport& report);

// Command-line entry point (subcommands: run, validate). Returns 0 on
// success, 2 on validator rejection, 1 on runtime failure.
int cli_main(int argc, const char* const* argv);

}  // namespace proxpnp
