#pragma once

#include <memory>

#include "proxpnp/operators.hpp"
#include "proxpnp/signal.hpp"

namespace proxpnp {

// Thrown when an inner linear solve does not reach its tolerance.
class SolveError : public std::runtime_error {
 public:
  SolveError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Quadratic data term f(x) = 1/2 ||A x - y||^2. The regularization weight
// lambda is owned by the algorithm configuration; the fidelity exposes the
// unweighted f and a weighted prox. Immutable after construction.
class L2Fidelity {
 public:
  L2Fidelity(std::shared_ptr<const LinearOperator> op, Signal observation, Shape input_shape);

  double value(const Signal& x) const;
  Signal gradient(const Signal& x) const;  // A^T (A x - y)

  // argmin_p 1/2||p - x||^2 + weight * f(p), i.e. (I + w A^T A) p = x + w A^T y.
  // Exact per Fourier mode for circular convolution, conjugate gradient
  // otherwise.
  Signal prox(const Signal& x, double weight, double cg_tol = 1e-10,
              int cg_max_iter = 500) const;

  double lipschitz() const { return lf_; }  // L_f = ||A||^2
  const Shape& input_shape() const { return in_shape_; }
  const Signal& observation() const { return y_; }
  const LinearOperator& op() const { return *op_; }

 private:
  std::shared_ptr<const LinearOperator> op_;
  Signal y_;
  Shape in_shape_;
  double lf_;
  const CircularConvOp* conv_ = nullptr;  // Fourier prox fast path when A is a convolution
};

}  // namespace proxpnp
