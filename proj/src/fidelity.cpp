#include "proxpnp/fidelity.hpp"

#include <cmath>

#include "proxpnp/fft.hpp"

namespace proxpnp {

L2Fidelity::L2Fidelity(std::shared_ptr<const LinearOperator> op, Signal observation,
                       Shape input_shape)
    : op_(std::move(op)), y_(std::move(observation)), in_shape_(input_shape) {
  if (!op_) throw std::invalid_argument("L2Fidelity: null operator");
  const Shape expected = op_->output_shape(in_shape_);
  require_shape(y_, expected, "L2Fidelity observation");
  const double nrm = op_->spectral_norm(in_shape_).value;
  lf_ = nrm * nrm;
  conv_ = dynamic_cast<const CircularConvOp*>(op_.get());
}

double L2Fidelity::value(const Signal& x) const {
  require_shape(x, in_shape_, "L2Fidelity::value");
  return 0.5 * sqdist(op_->apply(x), y_);
}

Signal L2Fidelity::gradient(const Signal& x) const {
  require_shape(x, in_shape_, "L2Fidelity::gradient");
  return op_->adjoint(op_->apply(x) - y_);
}

Signal L2Fidelity::prox(const Signal& x, double weight, double cg_tol, int cg_max_iter) const {
  require_shape(x, in_shape_, "L2Fidelity::prox");
  if (weight < 0.0) throw std::invalid_argument("L2Fidelity::prox: negative weight");
  if (weight == 0.0) return x;

  if (conv_) {
    const int h = in_shape_.height, w = in_shape_.width;
    const auto& mult = conv_->multiplier(h, w);
    Signal p(in_shape_);
    for (int ch = 0; ch < in_shape_.channels; ++ch) {
      auto xs = fft2(h, w, x.channel(ch));
      auto ys = fft2(h, w, y_.channel(ch));
      for (std::size_t i = 0; i < xs.size(); ++i)
        xs[i] = (xs[i] + weight * std::conj(mult[i]) * ys[i]) /
                (1.0 + weight * std::norm(mult[i]));
      ifft2(h, w, xs.data(), p.channel(ch));
    }
    return p;
  }

  // Conjugate gradient on the SPD system (I + w A^T A) p = x + w A^T y.
  Signal b = x;
  axpy(weight, op_->adjoint(y_), b);
  auto normal_op = [&](const Signal& p) {
    Signal q = p;
    axpy(weight, op_->adjoint(op_->apply(p)), q);
    return q;
  };
  const double tol = cg_tol * std::max(1.0, norm(b));
  const int max_iter = cg_max_iter;

  Signal p = x;
  Signal r = b - normal_op(p);
  Signal d = r;
  double rs = sqnorm(r);
  for (int k = 0; k < max_iter; ++k) {
    if (std::sqrt(rs) <= tol) return p;
    Signal q = normal_op(d);
    const double alpha = rs / dot(d, q);
    axpy(alpha, d, p);
    axpy(-alpha, q, r);
    const double rs_new = sqnorm(r);
    const double beta = rs_new / rs;
    rs = rs_new;
    for (std::size_t i = 0; i < d.data.size(); ++i) d.data[i] = r.data[i] + beta * d.data[i];
  }
  if (std::sqrt(rs) <= tol) return p;
  throw SolveError("L2Fidelity::prox: conjugate gradient did not converge, residual " +
                       std::to_string(std::sqrt(rs)),
                   std::sqrt(rs));
}

}  // namespace proxpnp
