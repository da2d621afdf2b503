#pragma once

#include <iosfwd>
#include <vector>

#include "proxpnp/fidelity.hpp"
#include "proxpnp/prior.hpp"
#include "proxpnp/signal.hpp"

namespace proxpnp {

// One trace entry per iteration. lyapunov/objective/residual/psnr are NaN
// where the quantity is not defined yet (e.g. the DRS envelope needs one
// completed iteration, the residual needs one step, psnr needs a reference).
struct TraceRow {
  int k = 0;
  double lyapunov = std::numeric_limits<double>::quiet_NaN();
  double objective = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();
  double psnr = std::numeric_limits<double>::quiet_NaN();
  double violation = 0.0;  // max(0, lyapunov_k - lyapunov_{k-1})
};

// F(x_k) evaluated through the pre-denoise point z_k with x_k = D(z_k):
// lambda f(x_k) + gamma g(z_k) - 1/2||z_k - x_k||^2 (free constant = 0).
double lyap_pgd(const Signal& x, const Signal& z, const L2Fidelity& fid, const ProxDenoiser& d,
                double lambda);

// F_alpha(y_k) = lambda f(y_k) + phi(y_k) + (alpha/(2 tau))(1-1/alpha)^2 ||y_k - y_{k-1}||^2.
// The first iteration uses the y_{-1} = y_0 convention.
double lyap_alpha_pgd(const Signal& y, const Signal& y_prev, const L2Fidelity& fid,
                      const ProxDenoiser& d, double lambda, double alpha, double tau = 1.0);
// Variant with phi(y) already evaluated (avoids re-inversion along a run).
double lyap_alpha_pgd_with_phi(const Signal& y, const Signal& y_prev, double fidelity_value,
                               double phi_y, double lambda, double alpha, double tau = 1.0);

// Douglas-Rachford envelope at (x_{k-1}, y_k, z_k). With swapped = false the
// denoiser output is y (envelope lambda f(z) + phi(y) + <y-x, y-z> +
// 1/2||y-z||^2); swapped = true evaluates lambda f(y) + phi(z) + the same
// coupling, matching the variant whose first prox is the fidelity.
double lyap_drs(const Signal& x_prev, const Signal& y, const Signal& z, const L2Fidelity& fid,
                const ProxDenoiser& d, double lambda, bool swapped);
double lyap_drs_with_phi(const Signal& x_prev, const Signal& y, const Signal& z,
                         double fidelity_value, double phi_value, double lambda, bool swapped);

// Running minimum of squared step norms normalized by ||x_0||^2.
std::vector<double> residual_curve(const std::vector<double>& step_sqnorms, double x0_sqnorm);
// Final value of the running minimum over a full trace.
double residual(const std::vector<TraceRow>& trace);

// Peak-1 PSNR in dB; +infinity when the signals coincide.
double psnr(const Signal& x, const Signal& reference);

// Least-squares slope of log(residual) vs log(k) over finite positive
// entries; NaN when fewer than two usable points exist.
double rate_slope(const std::vector<TraceRow>& trace);

double max_violation(const std::vector<TraceRow>& trace);

// CSV with columns k,lyapunov,residual,psnr,violation (deterministic format).
void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace);

}  // namespace proxpnp
