#include "proxpnp/algorithms.hpp"

#include <cmath>
#include <sstream>

namespace proxpnp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

Signal grad_step(const Signal& x, const L2Fidelity& fid, double weight) {
  if (weight == 0.0) return x;
  Signal z = x;
  axpy(-weight, fid.gradient(x), z);
  return z;
}
}  // namespace

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::pgd: return "pgd";
    case Scheme::alpha_pgd: return "alpha_pgd";
    case Scheme::drs: return "drs";
    case Scheme::drsdiff: return "drsdiff";
    case Scheme::pgd_generic: return "pgd_generic";
    case Scheme::alpha_pgd_generic: return "alpha_pgd_generic";
    case Scheme::pd_form: return "pd_form";
  }
  return "unknown";
}

std::optional<Scheme> scheme_from_name(const std::string& name) {
  for (Scheme s : {Scheme::pgd, Scheme::alpha_pgd, Scheme::drs, Scheme::drsdiff,
                   Scheme::pgd_generic, Scheme::alpha_pgd_generic, Scheme::pd_form})
    if (scheme_name(s) == name) return s;
  return std::nullopt;
}

AlgoState init_state(Scheme scheme, const Signal& x0) {
  AlgoState s;
  s.k = 0;
  s.x = x0;
  switch (scheme) {
    case Scheme::alpha_pgd:
    case Scheme::alpha_pgd_generic:
      s.y = x0;
      s.y_prev = x0;
      break;
    case Scheme::pd_form:
      s.y = x0;  // dual image variable
      s.q = x0;  // extrapolated point
      break;
    case Scheme::drs:
    case Scheme::drsdiff:
      s.x_prev = x0;
      break;
    default:
      break;
  }
  return s;
}

void pgd_step(AlgoState& s, const L2Fidelity& fid, const ProxDenoiser& d, const AlgoConfig& cfg) {
  Signal z = grad_step(s.x, fid, cfg.lambda);
  s.x = d.denoise(z);
  s.z = std::move(z);
  ++s.k;
}

void pgd_generic_step(AlgoState& s, const L2Fidelity& fid, const ProxDenoiser& d,
                      const AlgoConfig& cfg) {
  Signal z = grad_step(s.x, fid, cfg.tau * cfg.lambda);
  Signal preimage;
  s.x = d.prox_phi(z, cfg.tau, &preimage);
  s.z = std::move(preimage);
  ++s.k;
}

void alpha_pgd_step(AlgoState& s, const L2Fidelity& fid, const ProxDenoiser& d,
                    const AlgoConfig& cfg) {
  const double a = cfg.alpha;
  s.q = lincomb(1.0 - a, s.y, a, s.x);
  Signal pre = s.x;
  if (cfg.lambda != 0.0) axpy(-cfg.lambda, fid.gradient(s.q), pre);
  s.x = d.denoise(pre);
  s.z = std::move(pre);
  s.y_prev = s.y;
  s.y = lincomb(1.0 - a, s.y, a, s.x);
  ++s.k;
}

void alpha_pgd_generic_step(AlgoState& s, const L2Fidelity& fid, const ProxDenoiser& d,
                            const AlgoConfig& cfg) {
  const double a = cfg.alpha;
  s.q = lincomb(1.0 - a, s.y, a, s.x);
  Signal pre = s.x;
  if (cfg.lambda != 0.0) axpy(-cfg.tau * cfg.lambda, fid.gradient(s.q), pre);
  Signal preimage;
  s.x = d.prox_phi(pre, cfg.tau, &preimage);
  s.z = std::move(preimage);
  s.y_prev = s.y;
  s.y = lincomb(1.0 - a, s.y, a, s.x);
  ++s.k;
}

void pd_form_step(AlgoState& s, const L2Fidelity& fid, const ProxDenoiser& d,
                  const AlgoConfig& cfg) {
  // Primal form of the Bregman primal-dual iteration with alpha = 1/(1 + Lf/sigma),
  // beta = 1 - alpha; s.q holds the extrapolated point.
  const double a = cfg.alpha;
  const double ratio = (1.0 - a) / a;  // Lf/sigma
  Signal y_new = lincomb(1.0 / (1.0 + ratio), s.q, ratio / (1.0 + ratio), s.y);
  Signal pre = s.x;
  if (cfg.lambda != 0.0) axpy(-cfg.lambda, fid.gradient(y_new), pre);
  Signal x_new = d.denoise(pre);
  s.q = lincomb(1.0 + (1.0 - a), x_new, -(1.0 - a), s.x);
  s.y = std::move(y_new);
  s.x = std::move(x_new);
  s.z = std::move(pre);
  ++s.k;
}

void drs_step(AlgoState& s, const L2Fidelity& fid, const ProxDenoiser& d, const AlgoConfig& cfg) {
  s.x_prev = s.x;
  s.y = d.denoise(s.x);
  s.z = fid.prox(lincomb(2.0, s.y, -1.0, s.x), cfg.lambda);
  axpy(2.0 * cfg.beta, s.z - s.y, s.x);
  ++s.k;
}

void drsdiff_step(AlgoState& s, const L2Fidelity& fid, const ProxDenoiser& d,
                  const AlgoConfig& cfg) {
  s.x_prev = s.x;
  s.y = fid.prox(s.x, cfg.lambda);
  s.z = d.denoise(lincomb(2.0, s.y, -1.0, s.x));
  axpy(2.0 * cfg.beta, s.z - s.y, s.x);
  ++s.k;
}

const BoundCheck* BoundReport::binding() const {
  const BoundCheck* pick = nullptr;
  for (const auto& c : checks)
    if (!c.satisfied && !pick) pick = &c;
  if (pick) return pick;
  double best = kInf;
  for (const auto& c : checks) {
    const double margin = std::abs(c.limit - c.value);
    if (margin < best) {
      best = margin;
      pick = &c;
    }
  }
  return pick;
}

std::string BoundReport::summary() const {
  std::ostringstream os;
  os << scheme_name(scheme) << (pass ? " accepted" : " rejected");
  for (const auto& c : checks)
    os << "; " << c.name << ": " << c.value << " vs " << c.limit << (c.satisfied ? " ok" : " FAIL");
  return os.str();
}

BoundReport validate_pgd(const AlgoConfig& cfg, double lf, double m, bool generic_tau) {
  BoundReport r;
  r.scheme = generic_tau ? Scheme::pgd_generic : Scheme::pgd;
  const double smooth = cfg.lambda * lf;
  r.lambda_limit = lf > 0.0 ? (2.0 - m) / lf : kInf;
  if (!generic_tau) {
    BoundCheck c{"lambda*Lf <= 2-M", smooth, 2.0 - m, smooth <= 2.0 - m};
    r.pass = c.satisfied;
    r.checks.push_back(c);
    r.tau_limit = std::max(smooth + m > 0.0 ? 2.0 / (smooth + m) : kInf,
                           smooth > 0.0 ? 1.0 / smooth : kInf);
    return r;
  }
  r.tau_limit = std::max(smooth + m > 0.0 ? 2.0 / (smooth + m) : kInf,
                         smooth > 0.0 ? 1.0 / smooth : kInf);
  const double gl = m / (1.0 - m);  // relaxed gradient constant gamma*L
  BoundCheck c1{"tau <= max(2/(lambda*Lf+M), 1/(lambda*Lf))", cfg.tau, r.tau_limit,
                cfg.tau <= r.tau_limit};
  BoundCheck c2{"tau*M < 1 (prox subproblem strongly convex)", cfg.tau * m, 1.0,
                cfg.tau * m < 1.0};
  BoundCheck c3{"|1-tau|*gamma*L < 1 (prox solvable)", std::abs(1.0 - cfg.tau) * gl, 1.0,
                std::abs(1.0 - cfg.tau) * gl < 1.0};
  r.pass = c1.satisfied && c2.satisfied && c3.satisfied;
  r.checks = {c1, c2, c3};
  return r;
}

BoundReport validate_alpha_pgd(const AlgoConfig& cfg, double lf, double m, bool generic_tau) {
  BoundReport r;
  r.scheme = generic_tau ? Scheme::alpha_pgd_generic : Scheme::alpha_pgd;
  const double smooth = cfg.lambda * lf;
  r.lambda_limit = (lf > 0.0 && m > 0.0) ? 1.0 / (lf * m) : kInf;
  r.alpha_lower = m;
  r.alpha_upper = smooth > 0.0 ? 1.0 / smooth : kInf;
  if (!generic_tau) {
    BoundCheck c0{"alpha in (0,1]", cfg.alpha, 1.0, cfg.alpha > 0.0 && cfg.alpha <= 1.0};
    BoundCheck c1{"lambda*Lf*M < 1", smooth * m, 1.0, smooth * m < 1.0};
    BoundCheck c2{"alpha > M", cfg.alpha, m, cfg.alpha > m};
    BoundCheck c3{"alpha <= 1/(lambda*Lf)", cfg.alpha, r.alpha_upper,
                  cfg.alpha <= r.alpha_upper};
    r.pass = c0.satisfied && c1.satisfied && c2.satisfied && c3.satisfied;
    r.checks = {c0, c1, c2, c3};
    return r;
  }
  const double a = cfg.alpha;
  const double basic = std::min(a * smooth > 0.0 ? 1.0 / (a * smooth) : kInf,
                                m > 0.0 ? a / m : kInf);
  const double refined_denom = a * a * a * smooth + (2.0 - a) * m;
  const double refined = std::min(a * smooth > 0.0 ? 1.0 / (a * smooth) : kInf,
                                  refined_denom > 0.0 ? 2.0 * a / refined_denom : kInf);
  r.tau_limit = basic;
  r.tau_limit_refined = refined;
  const double gl = m / (1.0 - m);
  BoundCheck c1{"tau <= min(1/(alpha*lambda*Lf), alpha/M) [or refined]", cfg.tau,
                std::max(basic, refined), cfg.tau <= std::max(basic, refined)};
  BoundCheck c2{"tau*M < 1 (prox subproblem strongly convex)", cfg.tau * m, 1.0,
                cfg.tau * m < 1.0};
  BoundCheck c3{"|1-tau|*gamma*L < 1 (prox solvable)", std::abs(1.0 - cfg.tau) * gl, 1.0,
                std::abs(1.0 - cfg.tau) * gl < 1.0};
  r.pass = c1.satisfied && c2.satisfied && c3.satisfied;
  r.checks = {c1, c2, c3};
  return r;
}

double drs_cubic(double beta, double l) {
  return beta * (2.0 * l * l * l - 3.0 * l * l + 1.0) + (2.0 * l * l + l - 1.0);
}

double drs_l_max(double beta, double tol) {
  // The cubic is increasing in l on (0, 0.5) with a sign change: negative at
  // 0 (value beta - 1), positive at 0.5 (value beta/2).
  double lo = 0.0, hi = 0.5;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (drs_cubic(beta, mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double drs_decrease_delta(double beta, double l) {
  const double m = l / (1.0 + l);
  const double ratio = l / (1.0 - l);
  return 0.5 * (1.0 - l) * ((1.0 / beta) * (1.0 - ratio * ratio) - (1.0 + m));
}

BoundReport validate_drs(double beta, double l) {
  BoundReport r;
  r.scheme = Scheme::drs;
  BoundCheck c1{"beta in (0,1)", beta, 1.0, beta > 0.0 && beta < 1.0};
  BoundCheck c2{"L in [0,1)", l, 1.0, l >= 0.0 && l < 1.0};
  const double cubic = drs_cubic(beta, l);
  BoundCheck c3{"beta(2L^3-3L^2+1) + (2L^2+L-1) < 0", cubic, 0.0, cubic < 0.0};
  r.pass = c1.satisfied && c2.satisfied && c3.satisfied;
  r.checks = {c1, c2, c3};
  if (c1.satisfied) r.l_max = drs_l_max(beta);
  r.lambda_limit = kInf;  // no restriction on lambda for this scheme
  return r;
}

BoundReport validate_drsdiff(const AlgoConfig& cfg, double lf) {
  BoundReport r;
  r.scheme = Scheme::drsdiff;
  r.lambda_limit = lf > 0.0 ? 1.0 / lf : kInf;
  BoundCheck c1{"lambda*Lf <= 1", cfg.lambda * lf, 1.0, cfg.lambda * lf <= 1.0};
  BoundCheck c2{"beta in (0,1]", cfg.beta, 1.0, cfg.beta > 0.0 && cfg.beta <= 1.0};
  r.pass = c1.satisfied && c2.satisfied;
  r.checks = {c1, c2};
  return r;
}

BoundReport validate_scheme(Scheme scheme, const AlgoConfig& cfg, double lf, double effective_l) {
  const double m = effective_l / (effective_l + 1.0);
  switch (scheme) {
    case Scheme::pgd: return validate_pgd(cfg, lf, m, false);
    case Scheme::pgd_generic: return validate_pgd(cfg, lf, m, true);
    case Scheme::alpha_pgd:
    case Scheme::pd_form: {
      BoundReport r = validate_alpha_pgd(cfg, lf, m, false);
      r.scheme = scheme;
      return r;
    }
    case Scheme::alpha_pgd_generic: return validate_alpha_pgd(cfg, lf, m, true);
    case Scheme::drs: return validate_drs(cfg.beta, effective_l);
    case Scheme::drsdiff: return validate_drsdiff(cfg, lf);
  }
  throw std::invalid_argument("validate_scheme: unknown scheme");
}

namespace {

void step_dispatch(Scheme scheme, AlgoState& s, const L2Fidelity& fid, const ProxDenoiser& d,
                   const AlgoConfig& cfg) {
  switch (scheme) {
    case Scheme::pgd: pgd_step(s, fid, d, cfg); return;
    case Scheme::alpha_pgd: alpha_pgd_step(s, fid, d, cfg); return;
    case Scheme::drs: drs_step(s, fid, d, cfg); return;
    case Scheme::drsdiff: drsdiff_step(s, fid, d, cfg); return;
    case Scheme::pgd_generic: pgd_generic_step(s, fid, d, cfg); return;
    case Scheme::alpha_pgd_generic: alpha_pgd_generic_step(s, fid, d, cfg); return;
    case Scheme::pd_form: pd_form_step(s, fid, d, cfg); return;
  }
  throw std::invalid_argument("run: unknown scheme");
}

const Signal& image_estimate(Scheme scheme, const AlgoState& s) {
  switch (scheme) {
    case Scheme::alpha_pgd:
    case Scheme::alpha_pgd_generic:
      return s.y.size() ? s.y : s.x;
    case Scheme::drs:
      return s.y.size() ? s.y : s.x;
    case Scheme::drsdiff:
      return s.z.size() ? s.z : s.x;
    default:
      return s.x;
  }
}

// Lyapunov value of the current state; NaN where not (yet) defined.
double lyapunov_of_state(Scheme scheme, const AlgoState& s, const L2Fidelity& fid,
                         const ProxDenoiser& d, const AlgoConfig& cfg, double* objective) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  switch (scheme) {
    case Scheme::pgd:
    case Scheme::pgd_generic:
    case Scheme::pd_form: {
      Signal z = s.z;
      if (s.k == 0) z = d.invert(s.x);  // no pre-denoise point yet
      const double v = lyap_pgd(s.x, z, fid, d, cfg.lambda);
      if (objective) *objective = v;
      return v;
    }
    case Scheme::alpha_pgd:
    case Scheme::alpha_pgd_generic: {
      const double f_y = fid.value(s.y);
      const double phi_y = d.phi(s.y);
      if (objective) *objective = cfg.lambda * f_y + phi_y;
      if (s.k == 0) return cfg.lambda * f_y + phi_y;  // y_{-1} = y_0 convention
      const double tau = scheme == Scheme::alpha_pgd ? 1.0 : cfg.tau;
      return lyap_alpha_pgd_with_phi(s.y, s.y_prev, f_y, phi_y, cfg.lambda, cfg.alpha, tau);
    }
    case Scheme::drs: {
      if (s.k == 0) return nan;
      const double phi_y = d.phi_at_denoised(s.x_prev, s.y);
      if (objective) *objective = cfg.lambda * fid.value(s.y) + phi_y;
      return lyap_drs_with_phi(s.x_prev, s.y, s.z, fid.value(s.z), phi_y, cfg.lambda, false);
    }
    case Scheme::drsdiff: {
      if (s.k == 0) return nan;
      const Signal pre = lincomb(2.0, s.y, -1.0, s.x_prev);
      const double phi_z = d.phi_at_denoised(pre, s.z);
      if (objective) *objective = cfg.lambda * fid.value(s.z) + phi_z;
      return lyap_drs_with_phi(s.x_prev, s.y, s.z, fid.value(s.y), phi_z, cfg.lambda, true);
    }
  }
  return nan;
}

}  // namespace

RunReport run(Scheme scheme, const Problem& problem, const AlgoConfig& cfg,
              const RunOptions& opts) {
  RunReport report;
  report.scheme = scheme;
  report.config = cfg;
  report.validation = validate_scheme(scheme, cfg, problem.fid.lipschitz(),
                                      problem.denoiser.effective_lipschitz());
  if (!report.validation.pass && !cfg.unsafe)
    throw ValidationError("run: configuration rejected (" + report.validation.summary() +
                              "); set the unsafe override to force it",
                          report.validation);

  AlgoState state = init_state(scheme, problem.x0);
  const double x0_sqnorm = sqnorm(problem.x0);
  const double denom = x0_sqnorm > 0.0 ? x0_sqnorm : 1.0;

  const double nan = std::numeric_limits<double>::quiet_NaN();
  double last_lyap = nan;
  double running_min = std::numeric_limits<double>::infinity();

  auto emit_row = [&](double step_sqnorm) {
    TraceRow row;
    row.k = state.k;
    if (opts.record_lyapunov) {
      double objective = nan;
      try {
        row.lyapunov = lyapunov_of_state(scheme, state, problem.fid, problem.denoiser, cfg,
                                         &objective);
      } catch (const InvertError& e) {
        row.lyapunov = nan;  // row flagged: regularizer not evaluable here
        if (report.message.empty())
          report.message = "lyapunov evaluation failed at k=" + std::to_string(state.k) + ": " +
                           e.what();
      }
      row.objective = objective;
      if (std::isfinite(row.lyapunov) && std::isfinite(last_lyap))
        row.violation = std::max(0.0, row.lyapunov - last_lyap);
      if (std::isfinite(row.lyapunov)) last_lyap = row.lyapunov;
    }
    if (state.k > 0) {
      running_min = std::min(running_min, step_sqnorm / denom);
      row.residual = running_min;
      report.step_sqnorms.push_back(step_sqnorm);
    }
    if (opts.reference) row.psnr = psnr(image_estimate(scheme, state), *opts.reference);
    report.trace.push_back(row);
  };

  emit_row(0.0);

  report.status = RunStatus::max_iterations;
  for (int k = 1; k <= cfg.max_iter; ++k) {
    const Signal x_before = state.x;
    try {
      step_dispatch(scheme, state, problem.fid, problem.denoiser, cfg);
    } catch (const std::exception& e) {
      report.status = RunStatus::step_failure;
      report.message = "step " + std::to_string(k) + " failed: " + e.what();
      break;
    }
    if (!state.x.all_finite()) {
      report.status = RunStatus::step_failure;
      report.message = "step " + std::to_string(k) + " produced non-finite iterates";
      break;
    }
    const double step_sq = sqdist(state.x, x_before);
    emit_row(step_sq);
    if (cfg.stop_residual > 0.0 && step_sq / denom < cfg.stop_residual) {
      report.status = RunStatus::converged;
      break;
    }
  }
  report.iterations = state.k;
  report.x_final = state.x;
  report.restored = image_estimate(scheme, state);
  return report;
}

}  // namespace proxpnp
