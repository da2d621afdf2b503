#include "proxpnp/monitors.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace proxpnp {

double lyap_pgd(const Signal& x, const Signal& z, const L2Fidelity& fid, const ProxDenoiser& d,
                double lambda) {
  return lambda * fid.value(x) + d.phi_at_denoised(z, x);
}

double lyap_alpha_pgd_with_phi(const Signal& y, const Signal& y_prev, double fidelity_value,
                               double phi_y, double lambda, double alpha, double tau) {
  const double w = alpha / (2.0 * tau) * (1.0 - 1.0 / alpha) * (1.0 - 1.0 / alpha);
  return lambda * fidelity_value + phi_y + w * sqdist(y, y_prev);
}

double lyap_alpha_pgd(const Signal& y, const Signal& y_prev, const L2Fidelity& fid,
                      const ProxDenoiser& d, double lambda, double alpha, double tau) {
  return lyap_alpha_pgd_with_phi(y, y_prev, fid.value(y), d.phi(y), lambda, alpha, tau);
}

double lyap_drs_with_phi(const Signal& x_prev, const Signal& y, const Signal& z,
                         double fidelity_value, double phi_value, double lambda, bool swapped) {
  (void)swapped;  // phi_value/fidelity_value are already evaluated at the right points
  const double coupling = dot(y - x_prev, y - z) + 0.5 * sqdist(y, z);
  return lambda * fidelity_value + phi_value + coupling;
}

double lyap_drs(const Signal& x_prev, const Signal& y, const Signal& z, const L2Fidelity& fid,
                const ProxDenoiser& d, double lambda, bool swapped) {
  const double f_val = swapped ? fid.value(y) : fid.value(z);
  const double phi_val = swapped ? d.phi(z) : d.phi(y);
  return lyap_drs_with_phi(x_prev, y, z, f_val, phi_val, lambda, swapped);
}

std::vector<double> residual_curve(const std::vector<double>& step_sqnorms, double x0_sqnorm) {
  const double denom = x0_sqnorm > 0.0 ? x0_sqnorm : 1.0;
  std::vector<double> out;
  out.reserve(step_sqnorms.size());
  double running = std::numeric_limits<double>::infinity();
  for (double s : step_sqnorms) {
    running = std::min(running, s / denom);
    out.push_back(running);
  }
  return out;
}

double residual(const std::vector<TraceRow>& trace) {
  double last = std::numeric_limits<double>::quiet_NaN();
  for (const auto& row : trace)
    if (std::isfinite(row.residual)) last = row.residual;
  return last;
}

double psnr(const Signal& x, const Signal& reference) {
  const double mse = mean_squared_error(x, reference);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double rate_slope(const std::vector<TraceRow>& trace) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& row : trace) {
    if (row.k < 1 || !std::isfinite(row.residual) || row.residual <= 0.0) continue;
    const double lx = std::log(static_cast<double>(row.k));
    const double ly = std::log(row.residual);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / denom;
}

double max_violation(const std::vector<TraceRow>& trace) {
  double worst = 0.0;
  for (const auto& row : trace) worst = std::max(worst, row.violation);
  return worst;
}

namespace {
void append_number(std::string& line, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  line += buf;
}
}  // namespace

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace) {
  os << "k,lyapunov,residual,psnr,violation\n";
  for (const auto& row : trace) {
    std::string line = std::to_string(row.k);
    line += ',';
    append_number(line, row.lyapunov);
    line += ',';
    append_number(line, row.residual);
    line += ',';
    append_number(line, row.psnr);
    line += ',';
    append_number(line, row.violation);
    line += '\n';
    os << line;
  }
}

}  // namespace proxpnp
