#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "proxpnp/operators.hpp"
#include "proxpnp/signal.hpp"

namespace proxpnp {

// Smooth potential g with a certified Lipschitz bound L < 1 on its gradient.
// Concrete potentials are sums of squares, hence g >= 0. Each potential is
// bound to a fixed grid shape: the certified constant depends on the grid.
class GradPotential {
 public:
  virtual ~GradPotential() = default;

  virtual double value(const Signal& x) const = 0;
  virtual Signal grad(const Signal& x) const = 0;
  virtual double lipschitz() const = 0;  // certified L < 1
  virtual Shape domain_shape() const = 0;

  // Exact solution of v - coeff * grad(v) = x when a closed form exists
  // (nullopt falls back to the contraction iteration in ProxDenoiser).
  virtual std::optional<Signal> solve_grad_shift(const Signal& x, double coeff) const {
    (void)x;
    (void)coeff;
    return std::nullopt;
  }
};

// g(x) = (c/2) ||x - K x||^2 for a linear smoother K whose Fourier multiplier
// is real in [0,1]. Gradient multiplier c(1-k)^2; everything the denoiser
// derives from g is diagonal in Fourier, giving closed forms for inversion.
class LinearSmootherPotential final : public GradPotential {
 public:
  LinearSmootherPotential(CircularConvOp smoother, double scale, Shape shape);

  double value(const Signal& x) const override;
  Signal grad(const Signal& x) const override;
  double lipschitz() const override { return lip_; }
  Shape domain_shape() const override { return shape_; }
  std::optional<Signal> solve_grad_shift(const Signal& x, double coeff) const override;

  double scale() const { return scale_; }
  // Real gradient multiplier c(1 - k)^2 per frequency, row-major h*w.
  const std::vector<double>& grad_multiplier() const { return grad_mult_; }

 private:
  CircularConvOp smoother_;
  double scale_;
  Shape shape_;
  std::vector<double> smoother_mult_;  // k, real in [0,1]
  std::vector<double> grad_mult_;      // c (1-k)^2
  double lip_;
};

// Gaussian smoothing potential bound to a grid; the smoother multiplier is
// |h|^2 of a unit-sum Gaussian (real, in [0,1] for any grid) and the scale is
// chosen so the certified constant equals target_lipschitz exactly.
LinearSmootherPotential gaussian_smoother_potential(Shape shape, double stddev_px,
                                                    double target_lipschitz);

// g(x) = (c/2) ||x - N(x)||^2 with N(x) = W2 * softplus_eps(W1 x + b), a
// fixed-seed two-layer map. The scale c is calibrated at construction so the
// certified Lipschitz bound of grad(g) equals target_lipschitz: the largest
// Hessian eigenvalue of the raw potential is estimated by power iteration
// (finite-difference Hessian-vector products) at sampled points of the box
// [-1,2]^n, and the rescaling is shrunk by a 0.9 safety factor.
class RandomNonlinearPotential final : public GradPotential {
 public:
  RandomNonlinearPotential(Shape shape, int hidden, std::uint64_t seed,
                           double target_lipschitz = 0.8, double softplus_eps = 4.0,
                           double weight_scale = 1.0);

  double value(const Signal& x) const override;
  Signal grad(const Signal& x) const override;
  double lipschitz() const override { return target_lip_; }
  Shape domain_shape() const override { return shape_; }

  std::uint64_t seed() const { return seed_; }
  int hidden() const { return hidden_; }
  double calibration_scale() const { return scale_; }

 private:
  Signal raw_grad(const Signal& x) const;  // gradient of the unscaled potential
  double raw_value(const Signal& x) const;

  Shape shape_;
  int hidden_;
  std::uint64_t seed_;
  double eps_;
  double target_lip_;
  double scale_ = 1.0;
  std::vector<double> w1_;  // hidden x n
  std::vector<double> w2_;  // n x hidden
  std::vector<double> b_;   // hidden
};

// g(x) = s * (g_inner(x) + 1/2 ||x - proj_C(x)||^2) with C = [lo,hi]^n and
// coordinatewise clamping. The box term makes g coercive; the common scale s
// keeps the certified constant at target_lipschitz (default: the inner one).
class CoerciveWrapper final : public GradPotential {
 public:
  CoerciveWrapper(std::shared_ptr<const GradPotential> inner, double lo = -1.0, double hi = 2.0,
                  std::optional<double> target_lipschitz = std::nullopt);

  double value(const Signal& x) const override;
  Signal grad(const Signal& x) const override;
  double lipschitz() const override { return lip_; }
  Shape domain_shape() const override { return inner_->domain_shape(); }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double scale() const { return scale_; }

 private:
  std::shared_ptr<const GradPotential> inner_;
  double lo_, hi_, scale_, lip_;
};

// Thrown when the contraction inversion of the denoiser fails to reach its
// tolerance; the input is then likely outside the image of the denoiser.
class InvertError : public std::runtime_error {
 public:
  InvertError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

struct InvertStats {
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> residual_history;  // filled when record_history is set
  bool record_history = false;
};

// Relaxed gradient-step denoiser D = Id - gamma * grad(g), which is the
// proximal map of an implicit gamma*L/(gamma*L+1)-weakly convex regularizer
// phi. phi and its gradient are evaluated through inversion of D.
class ProxDenoiser {
 public:
  ProxDenoiser(std::shared_ptr<const GradPotential> potential, double gamma);

  Signal denoise(const Signal& x) const;  // x - gamma * grad g(x)

  // Unique u with u - gamma*grad g(u) = x. Closed form when the potential
  // provides one, otherwise the contraction u <- x + gamma*grad g(u)
  // (factor gamma*L < 1), stopped at residual < 1e-11 or 10^4 iterations.
  Signal invert(const Signal& x, InvertStats* stats = nullptr) const;
  // Always runs the contraction, bypassing closed forms (oracle/testing path).
  Signal invert_contraction(const Signal& x, InvertStats* stats = nullptr) const;

  // phi(x) = gamma*g(u) - 1/2||u - x||^2 with u = invert(x); the free
  // additive constant is fixed to zero.
  double phi(const Signal& x) const;
  Signal phi_grad(const Signal& x) const;  // invert(x) - x

  // phi at a known denoiser output x = denoise(preimage), no inversion.
  double phi_at_denoised(const Signal& preimage, const Signal& x) const;

  // M = gamma*L / (gamma*L + 1).
  double weak_convexity_constant() const;

  // Prox of tau*phi: solves v - (1-tau)*gamma*grad g(v) = x, then applies the
  // denoiser to v. Requires |1-tau|*gamma*L < 1 and tau*M < 1 (strongly
  // convex subproblem). For tau = 1 this is exactly denoise(x). The preimage
  // v of the result under D is returned through *preimage when requested.
  Signal prox_phi(const Signal& x, double tau, Signal* preimage = nullptr) const;

  double gamma() const { return gamma_; }
  double effective_lipschitz() const { return gamma_ * potential_->lipschitz(); }
  const GradPotential& potential() const { return *potential_; }

  static constexpr double kInvertTol = 1e-11;
  static constexpr int kInvertMaxIter = 10000;

 private:
  Signal solve_shift(const Signal& x, double coeff, InvertStats* stats,
                     bool allow_closed_form) const;

  std::shared_ptr<const GradPotential> potential_;
  double gamma_;
};

// Exhaustive grid search oracle for prox characterization on tiny problems
// (dimension <= 3): argmin over the grid of 1/2||u - z||^2 + phi(u).
struct GridSpec {
  double lo = 0.0;
  double hi = 1.0;
  double step = 1e-3;
};

struct GridArgmin {
  std::vector<double> point;
  double value = 0.0;
  // min objective over boundary grid points minus the overall min; the grid
  // brackets the minimizer only if this is positive.
  double boundary_margin = 0.0;
};

GridArgmin brute_force_prox(const std::function<double(const std::vector<double>&)>& phi,
                            const std::vector<double>& z, const GridSpec& grid);
// Per-dimension grid variant (tighter bracketing boxes).
GridArgmin brute_force_prox(const std::function<double(const std::vector<double>&)>& phi,
                            const std::vector<double>& z, const std::vector<GridSpec>& grid);

}  // namespace proxpnp
