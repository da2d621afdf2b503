#include "proxpnp/prior.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "proxpnp/fft.hpp"

namespace proxpnp {

namespace {

// Numerically stable softplus s_eps(t) = (1/eps) log(1 + exp(eps t)) and its
// derivative, the logistic sigmoid of eps*t.
double softplus(double t, double eps) {
  const double z = eps * t;
  return (std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)))) / eps;
}

double softplus_prime(double t, double eps) {
  const double z = eps * t;
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

LinearSmootherPotential::LinearSmootherPotential(CircularConvOp smoother, double scale,
                                                 Shape shape)
    : smoother_(std::move(smoother)), scale_(scale), shape_(shape) {
  if (scale_ <= 0.0 || scale_ > 1.0)
    throw std::invalid_argument("LinearSmootherPotential: scale must be in (0,1]");
  const auto& mult = smoother_.multiplier(shape_.height, shape_.width);
  smoother_mult_.reserve(mult.size());
  grad_mult_.reserve(mult.size());
  double lip = 0.0;
  for (const auto& z : mult) {
    if (std::abs(z.imag()) > 1e-9)
      throw std::invalid_argument(
          "LinearSmootherPotential: smoother multiplier must be real (symmetric kernel)");
    const double k = std::clamp(z.real(), 0.0, 1.0);
    if (z.real() < -1e-9 || z.real() > 1.0 + 1e-9)
      throw std::invalid_argument("LinearSmootherPotential: smoother multiplier outside [0,1]");
    smoother_mult_.push_back(k);
    const double g = scale_ * (1.0 - k) * (1.0 - k);
    grad_mult_.push_back(g);
    lip = std::max(lip, g);
  }
  lip_ = lip;
  if (lip_ >= 1.0)
    throw std::invalid_argument("LinearSmootherPotential: certified Lipschitz bound must be < 1");
}

double LinearSmootherPotential::value(const Signal& x) const {
  require_shape(x, shape_, "LinearSmootherPotential::value");
  Signal r = x - smoother_.apply(x);
  return 0.5 * scale_ * sqnorm(r);
}

Signal LinearSmootherPotential::grad(const Signal& x) const {
  require_shape(x, shape_, "LinearSmootherPotential::grad");
  const int h = shape_.height, w = shape_.width;
  Signal out(shape_);
  for (int ch = 0; ch < shape_.channels; ++ch) {
    auto spec = fft2(h, w, x.channel(ch));
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= grad_mult_[i];
    ifft2(h, w, spec.data(), out.channel(ch));
  }
  return out;
}

std::optional<Signal> LinearSmootherPotential::solve_grad_shift(const Signal& x,
                                                                double coeff) const {
  require_shape(x, shape_, "LinearSmootherPotential::solve_grad_shift");
  const int h = shape_.height, w = shape_.width;
  Signal out(shape_);
  for (int ch = 0; ch < shape_.channels; ++ch) {
    auto spec = fft2(h, w, x.channel(ch));
    for (std::size_t i = 0; i < spec.size(); ++i) {
      const double denom = 1.0 - coeff * grad_mult_[i];
      if (denom <= 0.0)
        throw std::invalid_argument("LinearSmootherPotential: shift coefficient too large");
      spec[i] /= denom;
    }
    ifft2(h, w, spec.data(), out.channel(ch));
  }
  return out;
}

LinearSmootherPotential gaussian_smoother_potential(Shape shape, double stddev_px,
                                                    double target_lipschitz) {
  if (target_lipschitz <= 0.0 || target_lipschitz >= 1.0)
    throw std::invalid_argument("gaussian_smoother_potential: target must be in (0,1)");
  // Squaring the unit-sum Gaussian makes the multiplier |h|^2, real and in
  // [0,1] on any grid regardless of truncation.
  CircularConvOp g = kernel_bank({KernelFamily::gaussian, stddev_px, 0, ""});
  const auto& mult = g.multiplier(shape.height, shape.width);
  double worst = 0.0;
  std::vector<double> sq(mult.size());
  for (std::size_t i = 0; i < mult.size(); ++i) {
    sq[i] = std::norm(mult[i]);
    worst = std::max(worst, (1.0 - sq[i]) * (1.0 - sq[i]));
  }
  if (worst <= 0.0)
    throw std::invalid_argument("gaussian_smoother_potential: smoother is the identity on this grid");
  // Realize K = H^T H as convolution with the autocorrelation of the kernel.
  Kernel2d k = g.kernel();
  const int n = k.rows, m = k.cols;
  Kernel2d auto_corr{2 * n - 1, 2 * m - 1,
                     std::vector<double>(static_cast<std::size_t>(2 * n - 1) * (2 * m - 1), 0.0)};
  for (int r1 = 0; r1 < n; ++r1)
    for (int c1 = 0; c1 < m; ++c1)
      for (int r2 = 0; r2 < n; ++r2)
        for (int c2 = 0; c2 < m; ++c2)
          auto_corr.v[static_cast<std::size_t>(r1 - r2 + n - 1) * (2 * m - 1) + (c1 - c2 + m - 1)] +=
              k.at(r1, c1) * k.at(r2, c2);
  // Weak smoothers cannot reach the target with scale <= 1; the certificate
  // is then simply smaller, which only loosens every parameter bound.
  const double scale = std::min(1.0, target_lipschitz / worst);
  return LinearSmootherPotential(CircularConvOp(std::move(auto_corr)), scale, shape);
}

RandomNonlinearPotential::RandomNonlinearPotential(Shape shape, int hidden, std::uint64_t seed,
                                                   double target_lipschitz, double softplus_eps,
                                                   double weight_scale)
    : shape_(shape),
      hidden_(hidden),
      seed_(seed),
      eps_(softplus_eps),
      target_lip_(target_lipschitz) {
  if (hidden_ <= 0) throw std::invalid_argument("RandomNonlinearPotential: hidden must be > 0");
  if (target_lip_ <= 0.0 || target_lip_ >= 1.0)
    throw std::invalid_argument("RandomNonlinearPotential: target Lipschitz must be in (0,1)");
  const std::size_t n = static_cast<std::size_t>(shape_.size());
  std::mt19937_64 rng(seed_);
  std::normal_distribution<double> gauss(0.0, 1.0);
  w1_.resize(static_cast<std::size_t>(hidden_) * n);
  w2_.resize(n * static_cast<std::size_t>(hidden_));
  b_.resize(static_cast<std::size_t>(hidden_));
  const double s1 = weight_scale / std::sqrt(static_cast<double>(n));
  const double s2 = weight_scale / std::sqrt(static_cast<double>(hidden_));
  for (double& v : w1_) v = s1 * gauss(rng);
  for (double& v : w2_) v = s2 * gauss(rng);
  for (double& v : b_) v = 0.2 * gauss(rng);

  // Calibrate the scale: largest |eigenvalue| of the raw Hessian over sample
  // points, by power iteration with central-difference Hessian-vector
  // products, then shrink the rescaling by a 0.9 safety factor.
  std::uniform_real_distribution<double> box(-1.0, 2.0);
  const int n_samples = 16;
  double raw_lip = 0.0;
  const double h = 1e-5;
  for (int s = 0; s < n_samples; ++s) {
    Signal x(shape_);
    for (double& v : x.data) v = box(rng);
    Signal dir(shape_);
    for (double& v : dir.data) v = gauss(rng);
    double nd = norm(dir);
    for (double& v : dir.data) v /= nd;

    double lam = 0.0;
    for (int it = 0; it < 200; ++it) {
      Signal xp = x, xm = x;
      axpy(h, dir, xp);
      axpy(-h, dir, xm);
      Signal hv = raw_grad(xp) - raw_grad(xm);
      for (double& v : hv.data) v /= 2.0 * h;
      const double lam_new = norm(hv);
      if (lam_new == 0.0) break;
      for (std::size_t i = 0; i < dir.data.size(); ++i) dir.data[i] = hv.data[i] / lam_new;
      if (it > 4 && std::abs(lam_new - lam) <= 1e-6 * std::max(1.0, lam_new)) {
        lam = lam_new;
        break;
      }
      lam = lam_new;
    }
    raw_lip = std::max(raw_lip, lam);
  }
  if (raw_lip <= 0.0)
    throw std::runtime_error("RandomNonlinearPotential: Hessian estimate degenerate");
  scale_ = 0.9 * target_lip_ / raw_lip;
}

double RandomNonlinearPotential::raw_value(const Signal& x) const {
  const std::size_t n = static_cast<std::size_t>(shape_.size());
  std::vector<double> pre(b_);
  for (std::size_t j = 0; j < b_.size(); ++j) {
    const double* row = w1_.data() + j * n;
    double acc = pre[j];
    for (std::size_t i = 0; i < n; ++i) acc += row[i] * x.data[i];
    pre[j] = acc;
  }
  double out = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double ni = 0.0;
    for (std::size_t j = 0; j < b_.size(); ++j)
      ni += w2_[i * b_.size() + j] * softplus(pre[j], eps_);
    const double r = x.data[i] - ni;
    out += r * r;
  }
  return 0.5 * out;
}

Signal RandomNonlinearPotential::raw_grad(const Signal& x) const {
  const std::size_t n = static_cast<std::size_t>(shape_.size());
  const std::size_t hdim = b_.size();
  std::vector<double> pre(b_);
  for (std::size_t j = 0; j < hdim; ++j) {
    const double* row = w1_.data() + j * n;
    double acc = pre[j];
    for (std::size_t i = 0; i < n; ++i) acc += row[i] * x.data[i];
    pre[j] = acc;
  }
  std::vector<double> act(hdim);
  for (std::size_t j = 0; j < hdim; ++j) act[j] = softplus(pre[j], eps_);

  // r = x - N(x); grad = r - W1^T ( s'(pre) .* (W2^T r) )
  Signal r = x;
  for (std::size_t i = 0; i < n; ++i) {
    double ni = 0.0;
    for (std::size_t j = 0; j < hdim; ++j) ni += w2_[i * hdim + j] * act[j];
    r.data[i] -= ni;
  }
  std::vector<double> back(hdim, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < hdim; ++j) back[j] += w2_[i * hdim + j] * r.data[i];
  for (std::size_t j = 0; j < hdim; ++j) back[j] *= softplus_prime(pre[j], eps_);

  Signal out = r;
  for (std::size_t j = 0; j < hdim; ++j) {
    const double* row = w1_.data() + j * n;
    for (std::size_t i = 0; i < n; ++i) out.data[i] -= row[i] * back[j];
  }
  return out;
}

double RandomNonlinearPotential::value(const Signal& x) const {
  require_shape(x, shape_, "RandomNonlinearPotential::value");
  return scale_ * raw_value(x);
}

Signal RandomNonlinearPotential::grad(const Signal& x) const {
  require_shape(x, shape_, "RandomNonlinearPotential::grad");
  Signal g = raw_grad(x);
  for (double& v : g.data) v *= scale_;
  return g;
}

CoerciveWrapper::CoerciveWrapper(std::shared_ptr<const GradPotential> inner, double lo, double hi,
                                 std::optional<double> target_lipschitz)
    : inner_(std::move(inner)), lo_(lo), hi_(hi) {
  if (!inner_) throw std::invalid_argument("CoerciveWrapper: null inner potential");
  if (!(lo_ < hi_)) throw std::invalid_argument("CoerciveWrapper: empty box");
  const double inner_lip = inner_->lipschitz();
  lip_ = target_lipschitz.value_or(inner_lip);
  if (lip_ <= 0.0 || lip_ >= 1.0)
    throw std::invalid_argument("CoerciveWrapper: target Lipschitz must be in (0,1)");
  // The box term's gradient is 1-Lipschitz, so the sum is scaled down to the
  // requested certificate.
  scale_ = lip_ / (inner_lip + 1.0);
}

double CoerciveWrapper::value(const Signal& x) const {
  double box = 0.0;
  for (double v : x.data) {
    const double d = v - std::clamp(v, lo_, hi_);
    box += d * d;
  }
  return scale_ * (inner_->value(x) + 0.5 * box);
}

Signal CoerciveWrapper::grad(const Signal& x) const {
  Signal g = inner_->grad(x);
  for (std::size_t i = 0; i < x.data.size(); ++i)
    g.data[i] += x.data[i] - std::clamp(x.data[i], lo_, hi_);
  for (double& v : g.data) v *= scale_;
  return g;
}

ProxDenoiser::ProxDenoiser(std::shared_ptr<const GradPotential> potential, double gamma)
    : potential_(std::move(potential)), gamma_(gamma) {
  if (!potential_) throw std::invalid_argument("ProxDenoiser: null potential");
  if (gamma_ < 0.0 || gamma_ > 1.0)
    throw std::invalid_argument("ProxDenoiser: gamma must be in [0,1]");
  if (gamma_ * potential_->lipschitz() >= 1.0)
    throw std::invalid_argument("ProxDenoiser: gamma * L must be < 1");
}

Signal ProxDenoiser::denoise(const Signal& x) const {
  if (gamma_ == 0.0) return x;
  Signal out = x;
  axpy(-gamma_, potential_->grad(x), out);
  return out;
}

Signal ProxDenoiser::solve_shift(const Signal& x, double coeff, InvertStats* stats,
                                 bool allow_closed_form) const {
  if (coeff == 0.0) return x;
  if (allow_closed_form) {
    if (auto exact = potential_->solve_grad_shift(x, coeff)) {
      if (stats) {
        stats->iterations = 0;
        stats->residual = 0.0;
      }
      return std::move(*exact);
    }
  }
  const double contraction = std::abs(coeff) * potential_->lipschitz();
  if (contraction >= 1.0)
    throw std::invalid_argument("ProxDenoiser: |coeff| * L >= 1, fixed point not contractive");

  Signal u = x;
  Signal g = potential_->grad(u);
  double res = 0.0;
  for (int k = 0; k < kInvertMaxIter; ++k) {
    Signal next = x;
    axpy(coeff, g, next);
    Signal g_next = potential_->grad(next);
    // residual of the candidate: ||next - coeff*grad(next) - x|| = |coeff| ||g - g_next||
    res = std::abs(coeff) * norm(g - g_next);
    u = std::move(next);
    g = std::move(g_next);
    if (stats) {
      stats->iterations = k + 1;
      stats->residual = res;
      if (stats->record_history) stats->residual_history.push_back(res);
    }
    if (res < kInvertTol) return u;
  }
  throw InvertError(
      "ProxDenoiser::invert: contraction did not reach tolerance (residual " +
          std::to_string(res) + "); input likely outside the denoiser image",
      res);
}

Signal ProxDenoiser::invert(const Signal& x, InvertStats* stats) const {
  return solve_shift(x, gamma_, stats, true);
}

Signal ProxDenoiser::invert_contraction(const Signal& x, InvertStats* stats) const {
  return solve_shift(x, gamma_, stats, false);
}

double ProxDenoiser::phi(const Signal& x) const {
  if (gamma_ == 0.0) return 0.0;
  Signal u = invert(x);
  return gamma_ * potential_->value(u) - 0.5 * sqdist(u, x);
}

double ProxDenoiser::phi_at_denoised(const Signal& preimage, const Signal& x) const {
  if (gamma_ == 0.0) return 0.0;
  return gamma_ * potential_->value(preimage) - 0.5 * sqdist(preimage, x);
}

Signal ProxDenoiser::phi_grad(const Signal& x) const {
  if (gamma_ == 0.0) return Signal(x.shape, 0.0);
  return invert(x) - x;
}

double ProxDenoiser::weak_convexity_constant() const {
  const double gl = gamma_ * potential_->lipschitz();
  if (gl >= 1.0) throw std::invalid_argument("weak_convexity_constant: gamma * L must be < 1");
  return gl / (gl + 1.0);
}

Signal ProxDenoiser::prox_phi(const Signal& x, double tau, Signal* preimage) const {
  if (tau <= 0.0) throw std::invalid_argument("prox_phi: tau must be positive");
  if (tau * weak_convexity_constant() >= 1.0)
    throw std::invalid_argument("prox_phi: tau*M >= 1, subproblem not strongly convex");
  Signal v = solve_shift(x, (1.0 - tau) * gamma_, nullptr, true);
  if (preimage) *preimage = v;
  return denoise(v);
}

GridArgmin brute_force_prox(const std::function<double(const std::vector<double>&)>& phi,
                            const std::vector<double>& z, const std::vector<GridSpec>& grid) {
  const std::size_t dim = z.size();
  if (dim == 0 || dim > 3)
    throw std::invalid_argument("brute_force_prox: dimension must be 1, 2, or 3");
  if (grid.size() != dim) throw std::invalid_argument("brute_force_prox: grid/point mismatch");
  std::vector<int> points(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    if (!(grid[d].lo < grid[d].hi) || grid[d].step <= 0.0)
      throw std::invalid_argument("brute_force_prox: bad grid");
    points[d] = static_cast<int>(std::floor((grid[d].hi - grid[d].lo) / grid[d].step)) + 1;
    if (points[d] < 3) throw std::invalid_argument("brute_force_prox: grid too coarse");
  }

  std::vector<int> idx(dim, 0);
  std::vector<double> u(dim);
  double best = std::numeric_limits<double>::infinity();
  double best_boundary = std::numeric_limits<double>::infinity();
  std::vector<double> argmin(dim);
  bool argmin_on_boundary = false;

  while (true) {
    bool boundary = false;
    for (std::size_t d = 0; d < dim; ++d) {
      u[d] = grid[d].lo + idx[d] * grid[d].step;
      boundary = boundary || idx[d] == 0 || idx[d] == points[d] - 1;
    }
    double obj = phi(u);
    for (std::size_t d = 0; d < dim; ++d) {
      const double e = u[d] - z[d];
      obj += 0.5 * e * e;
    }
    if (obj < best) {
      best = obj;
      argmin = u;
      argmin_on_boundary = boundary;
    }
    if (boundary) best_boundary = std::min(best_boundary, obj);

    std::size_t d = 0;
    while (d < dim && ++idx[d] == points[d]) {
      idx[d] = 0;
      ++d;
    }
    if (d == dim) break;
  }
  if (argmin_on_boundary)
    throw std::runtime_error("brute_force_prox: grid does not bracket the minimum");
  return {argmin, best, best_boundary - best};
}

GridArgmin brute_force_prox(const std::function<double(const std::vector<double>&)>& phi,
                            const std::vector<double>& z, const GridSpec& grid) {
  return brute_force_prox(phi, z, std::vector<GridSpec>(z.size(), grid));
}

}  // namespace proxpnp
