#pragma once

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "proxpnp/signal.hpp"

namespace proxpnp {

// Abstraction of the forward model A. Operators are immutable after
// construction and safe to share across threads.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;

  virtual Signal apply(const Signal& x) const = 0;
  virtual Signal adjoint(const Signal& y) const = 0;
  virtual Shape output_shape(const Shape& in) const = 0;

  struct NormEstimate {
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
  };

  // ||A|| for signals of the given shape. Default implementation runs a
  // deterministically seeded power iteration on A^T A; non-convergence is
  // reported with the last estimate rather than discarded.
  virtual NormEstimate spectral_norm(const Shape& in, double tol = 1e-8,
                                     int max_iter = 500) const;
};

// 2D convolution kernel, centered, odd side lengths.
struct Kernel2d {
  int rows = 1;
  int cols = 1;
  std::vector<double> v;  // row-major, size rows*cols

  double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
  double sum() const;
  void normalize_unit_sum();
};

// Circular convolution with a centered kernel: forward/adjoint are pointwise
// Fourier multiplications by k-hat and conj(k-hat). The multiplier is cached
// per grid size.
class CircularConvOp final : public LinearOperator {
 public:
  explicit CircularConvOp(Kernel2d kernel);

  Signal apply(const Signal& x) const override;
  Signal adjoint(const Signal& y) const override;
  Shape output_shape(const Shape& in) const override { return in; }
  NormEstimate spectral_norm(const Shape& in, double tol = 1e-8,
                             int max_iter = 500) const override;

  const Kernel2d& kernel() const { return kernel_; }
  // Fourier multiplier of the kernel on an h x w grid (kernel circularly
  // shifted so its center sits at the origin).
  const std::vector<std::complex<double>>& multiplier(int h, int w) const;

 private:
  Signal apply_multiplier(const Signal& x, bool conjugate) const;

  Kernel2d kernel_;
  struct Cache {
    std::mutex mutex;
    std::map<std::pair<int, int>, std::vector<std::complex<double>>> by_shape;
  };
  std::shared_ptr<Cache> cache_;
};

// y = S H x: anti-alias convolution followed by s-fold decimation per axis,
// phase anchored at index 0. The adjoint of S is zero-insertion upsampling.
class DownsampleOp final : public LinearOperator {
 public:
  DownsampleOp(int factor, CircularConvOp anti_alias);

  Signal apply(const Signal& x) const override;
  Signal adjoint(const Signal& y) const override;
  Shape output_shape(const Shape& in) const override;

  int factor() const { return factor_; }
  const CircularConvOp& anti_alias() const { return blur_; }

 private:
  int factor_;
  CircularConvOp blur_;
};

// Kernel constructors; all kernels are normalized to unit sum so that the
// composed fidelity has Lipschitz constant 1 for plain deblurring.
Kernel2d gaussian_kernel(double stddev, int size = 0);  // size 0: ceil(6*std), odd
Kernel2d uniform_kernel(int size);
Kernel2d delta_kernel();
// Plain-text kernel file: whitespace-separated floats, one row per line.
Kernel2d load_kernel_file(const std::string& path);

enum class KernelFamily { gaussian, uniform, file };

struct KernelSpec {
  KernelFamily family = KernelFamily::gaussian;
  double stddev = 1.6;
  int size = 0;
  std::string path;
};

CircularConvOp kernel_bank(const KernelSpec& spec);

}  // namespace proxpnp
