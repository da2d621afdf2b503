#pragma once

#include <optional>
#include <string>
#include <vector>

#include "proxpnp/fidelity.hpp"
#include "proxpnp/monitors.hpp"
#include "proxpnp/prior.hpp"

namespace proxpnp {

enum class Scheme { pgd, alpha_pgd, drs, drsdiff, pgd_generic, alpha_pgd_generic, pd_form };

std::string scheme_name(Scheme s);
std::optional<Scheme> scheme_from_name(const std::string& name);

struct AlgoConfig {
  double lambda = 1.0;   // regularization trade-off, > 0
  double alpha = 0.5;    // averaging parameter of the relaxed scheme, (0,1]
  double beta = 0.5;     // Douglas-Rachford relaxation, (0,1)
  double tau = 1.0;      // generic stepsize; fixed to 1 for the plug-in schemes
  int max_iter = 400;
  double stop_residual = 1e-8;  // on ||x_{k+1}-x_k||^2 / ||x_0||^2; 0 disables
  bool unsafe = false;          // run despite a failed validator
};

// Scheme-dependent iterates. pgd: x and pre-denoise z; alpha-pgd: x, y, q
// and previous y; drs variants: x, y, z and previous x; pd form: x, y (dual
// image) and q doubling as the extrapolated point.
struct AlgoState {
  int k = 0;
  Signal x;
  Signal z;
  Signal y;
  Signal q;
  Signal x_prev;
  Signal y_prev;
};

AlgoState init_state(Scheme scheme, const Signal& x0);

void pgd_step(AlgoState& s, const L2Fidelity& fid, const ProxDenoiser& d, const AlgoConfig& cfg);
void alpha_pgd_step(AlgoState& s, const L2Fidelity& fid, const ProxDenoiser& d,
                    const AlgoConfig& cfg);
// Fully primal form of the Bregman primal-dual scheme the relaxed PGD comes
// from; used as an equivalence oracle for alpha_pgd_step.
void pd_form_step(AlgoState& s, const L2Fidelity& fid, const ProxDenoiser& d,
                  const AlgoConfig& cfg);
void drs_step(AlgoState& s, const L2Fidelity& fid, const ProxDenoiser& d, const AlgoConfig& cfg);
void drsdiff_step(AlgoState& s, const L2Fidelity& fid, const ProxDenoiser& d,
                  const AlgoConfig& cfg);
void pgd_generic_step(AlgoState& s, const L2Fidelity& fid, const ProxDenoiser& d,
                      const AlgoConfig& cfg);
void alpha_pgd_generic_step(AlgoState& s, const L2Fidelity& fid, const ProxDenoiser& d,
                            const AlgoConfig& cfg);

struct BoundCheck {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool satisfied = false;
};

// Outcome of validating a configuration against the scheme's convergence
// conditions. Bounds that guarantee the Lyapunov decrease pass at equality
// (zero margin): the decrease coefficient is then 0 but monotonicity still
// holds, and the reference parameter tables sit exactly on these bounds.
struct BoundReport {
  Scheme scheme = Scheme::pgd;
  bool pass = false;
  std::vector<BoundCheck> checks;
  double lambda_limit = std::numeric_limits<double>::quiet_NaN();
  double alpha_lower = std::numeric_limits<double>::quiet_NaN();
  double alpha_upper = std::numeric_limits<double>::quiet_NaN();
  double tau_limit = std::numeric_limits<double>::quiet_NaN();
  double tau_limit_refined = std::numeric_limits<double>::quiet_NaN();
  double l_max = std::numeric_limits<double>::quiet_NaN();
  std::string summary() const;
  // The failed check (or the tightest satisfied one) for reporting.
  const BoundCheck* binding() const;
};

// Plug-in stepsize-1 bound lambda*Lf <= 2 - M, generic bound
// tau <= max(2/(lambda*Lf + M), 1/(lambda*Lf)).
BoundReport validate_pgd(const AlgoConfig& cfg, double lf, double m, bool generic_tau = false);
// Plug-in: lambda*Lf*M < 1 and M < alpha <= 1/(lambda*Lf). Generic: tau <=
// min(1/(alpha lambda Lf), alpha/M), with the refined alternative
// 2 alpha / (alpha^3 lambda Lf + (2-alpha) M) also reported.
BoundReport validate_alpha_pgd(const AlgoConfig& cfg, double lf, double m,
                               bool generic_tau = false);
// Cubic condition beta(2L^3 - 3L^2 + 1) + (2L^2 + L - 1) < 0 for any lambda;
// also exposes the admissible bound l_max(beta) by bisection.
BoundReport validate_drs(double beta, double l);
// Differentiable-fidelity variant: lambda * Lf <= 1.
BoundReport validate_drsdiff(const AlgoConfig& cfg, double lf);

// Dispatch on the scheme; effective_l is the relaxed constant gamma * L_g.
BoundReport validate_scheme(Scheme scheme, const AlgoConfig& cfg, double lf, double effective_l);

double drs_cubic(double beta, double l);
double drs_l_max(double beta, double tol = 1e-9);
// Guaranteed envelope decrease coefficient per squared x-step.
double drs_decrease_delta(double beta, double l);

class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& what, BoundReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const BoundReport& report() const { return report_; }

 private:
  BoundReport report_;
};

struct Problem {
  L2Fidelity fid;
  ProxDenoiser denoiser;
  Signal x0;
};

enum class RunStatus { converged, max_iterations, step_failure };

struct RunReport {
  Scheme scheme = Scheme::pgd;
  AlgoConfig config;
  BoundReport validation;
  std::vector<TraceRow> trace;
  std::vector<double> step_sqnorms;
  Signal x_final;    // scheme's main iterate at termination
  Signal restored;   // image estimate (post-denoiser / averaged variable)
  RunStatus status = RunStatus::max_iterations;
  std::string message;
  int iterations = 0;
};

struct RunOptions {
  const Signal* reference = nullptr;  // enables the psnr column
  bool record_lyapunov = true;
};

// Iterates until max_iter or the relative residual drops below
// stop_residual; refuses to start on a failed validator unless cfg.unsafe.
// Step failures are recorded and the partial trace returned.
RunReport run(Scheme scheme, const Problem& problem, const AlgoConfig& cfg,
              const RunOptions& opts = {});

}  // namespace proxpnp
