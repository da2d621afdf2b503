#include "proxpnp/operators.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "proxpnp/fft.hpp"

namespace proxpnp {

LinearOperator::NormEstimate LinearOperator::spectral_norm(const Shape& in, double tol,
                                                           int max_iter) const {
  // Power iteration on A^T A with a fixed seed for reproducible norms.
  std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Signal v(in);
  for (double& e : v.data) e = unif(rng);
  double nv = norm(v);
  if (nv == 0.0) {
    v.data[0] = 1.0;
    nv = 1.0;
  }
  for (double& e : v.data) e /= nv;

  NormEstimate est;
  double lambda = 0.0;
  for (int k = 0; k < max_iter; ++k) {
    Signal w = adjoint(apply(v));
    const double lambda_new = dot(v, w);  // Rayleigh quotient for A^T A
    const double nw = norm(w);
    est.iterations = k + 1;
    if (nw == 0.0) {
      est.value = 0.0;
      est.converged = true;
      return est;
    }
    for (std::size_t i = 0; i < w.data.size(); ++i) w.data[i] /= nw;
    if (k > 0 && std::abs(lambda_new - lambda) <= tol * std::max(1.0, std::abs(lambda_new))) {
      est.value = std::sqrt(std::max(0.0, lambda_new));
      est.converged = true;
      return est;
    }
    lambda = lambda_new;
    v = std::move(w);
  }
  est.value = std::sqrt(std::max(0.0, lambda));
  est.converged = false;
  return est;
}

double Kernel2d::sum() const {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

void Kernel2d::normalize_unit_sum() {
  const double s = sum();
  if (s == 0.0 || !std::isfinite(s))
    throw std::invalid_argument("Kernel2d: cannot normalize, sum is zero or non-finite");
  for (double& x : v) x /= s;
}

CircularConvOp::CircularConvOp(Kernel2d kernel)
    : kernel_(std::move(kernel)), cache_(std::make_shared<Cache>()) {
  if (kernel_.rows <= 0 || kernel_.cols <= 0 || kernel_.rows % 2 == 0 || kernel_.cols % 2 == 0)
    throw std::invalid_argument("CircularConvOp: kernel side lengths must be positive and odd");
  if (static_cast<std::size_t>(kernel_.rows) * kernel_.cols != kernel_.v.size())
    throw std::invalid_argument("CircularConvOp: kernel data does not match its dimensions");
}

const std::vector<std::complex<double>>& CircularConvOp::multiplier(int h, int w) const {
  std::lock_guard<std::mutex> lock(cache_->mutex);
  auto key = std::make_pair(h, w);
  auto it = cache_->by_shape.find(key);
  if (it != cache_->by_shape.end()) return it->second;

  // Wrap the centered kernel onto the grid; kernels larger than the grid
  // accumulate modulo the grid size.
  std::vector<double> padded(static_cast<std::size_t>(h) * w, 0.0);
  const int cy = kernel_.rows / 2;
  const int cx = kernel_.cols / 2;
  for (int r = 0; r < kernel_.rows; ++r) {
    for (int c = 0; c < kernel_.cols; ++c) {
      const int i = ((r - cy) % h + h) % h;
      const int j = ((c - cx) % w + w) % w;
      padded[static_cast<std::size_t>(i) * w + j] += kernel_.at(r, c);
    }
  }
  auto mult = fft2(h, w, padded.data());
  return cache_->by_shape.emplace(key, std::move(mult)).first->second;
}

Signal CircularConvOp::apply_multiplier(const Signal& x, bool conjugate) const {
  const int h = x.shape.height, w = x.shape.width;
  const auto& mult = multiplier(h, w);
  Signal out(x.shape);
  for (int ch = 0; ch < x.shape.channels; ++ch) {
    auto spec = fft2(h, w, x.channel(ch));
    for (std::size_t i = 0; i < spec.size(); ++i)
      spec[i] *= conjugate ? std::conj(mult[i]) : mult[i];
    ifft2(h, w, spec.data(), out.channel(ch));
  }
  return out;
}

Signal CircularConvOp::apply(const Signal& x) const { return apply_multiplier(x, false); }
Signal CircularConvOp::adjoint(const Signal& y) const { return apply_multiplier(y, true); }

LinearOperator::NormEstimate CircularConvOp::spectral_norm(const Shape& in, double, int) const {
  const auto& mult = multiplier(in.height, in.width);
  double m = 0.0;
  for (const auto& z : mult) m = std::max(m, std::abs(z));
  return {m, true, 0};
}

DownsampleOp::DownsampleOp(int factor, CircularConvOp anti_alias)
    : factor_(factor), blur_(std::move(anti_alias)) {
  if (factor_ < 1) throw std::invalid_argument("DownsampleOp: factor must be >= 1");
}

Shape DownsampleOp::output_shape(const Shape& in) const {
  if (in.height % factor_ != 0 || in.width % factor_ != 0)
    throw std::invalid_argument("DownsampleOp: grid " + in.to_string() +
                                " is not divisible by factor " + std::to_string(factor_));
  return {in.height / factor_, in.width / factor_, in.channels};
}

Signal DownsampleOp::apply(const Signal& x) const {
  const Shape out_shape = output_shape(x.shape);
  Signal blurred = blur_.apply(x);
  Signal out(out_shape);
  for (int ch = 0; ch < x.shape.channels; ++ch) {
    const double* src = blurred.channel(ch);
    double* dst = out.channel(ch);
    for (int i = 0; i < out_shape.height; ++i)
      for (int j = 0; j < out_shape.width; ++j)
        dst[static_cast<std::size_t>(i) * out_shape.width + j] =
            src[static_cast<std::size_t>(i) * factor_ * x.shape.width + j * factor_];
  }
  return out;
}

Signal DownsampleOp::adjoint(const Signal& y) const {
  const Shape up{y.shape.height * factor_, y.shape.width * factor_, y.shape.channels};
  Signal zero_filled(up);
  for (int ch = 0; ch < y.shape.channels; ++ch) {
    const double* src = y.channel(ch);
    double* dst = zero_filled.channel(ch);
    for (int i = 0; i < y.shape.height; ++i)
      for (int j = 0; j < y.shape.width; ++j)
        dst[static_cast<std::size_t>(i) * factor_ * up.width + j * factor_] =
            src[static_cast<std::size_t>(i) * y.shape.width + j];
  }
  return blur_.adjoint(zero_filled);
}

Kernel2d gaussian_kernel(double stddev, int size) {
  if (stddev <= 0.0) throw std::invalid_argument("gaussian_kernel: stddev must be positive");
  if (size == 0) {
    size = static_cast<int>(std::ceil(6.0 * stddev));
    if (size % 2 == 0) size += 1;
    size = std::max(size, 3);
  }
  if (size % 2 == 0) throw std::invalid_argument("gaussian_kernel: size must be odd");
  Kernel2d k{size, size, std::vector<double>(static_cast<std::size_t>(size) * size)};
  const int c = size / 2;
  const double inv2s2 = 1.0 / (2.0 * stddev * stddev);
  for (int r = 0; r < size; ++r)
    for (int j = 0; j < size; ++j)
      k.v[static_cast<std::size_t>(r) * size + j] =
          std::exp(-((r - c) * (r - c) + (j - c) * (j - c)) * inv2s2);
  k.normalize_unit_sum();
  return k;
}

Kernel2d uniform_kernel(int size) {
  if (size <= 0 || size % 2 == 0)
    throw std::invalid_argument("uniform_kernel: size must be positive and odd");
  return {size, size,
          std::vector<double>(static_cast<std::size_t>(size) * size,
                              1.0 / (static_cast<double>(size) * size))};
}

Kernel2d delta_kernel() { return {1, 1, {1.0}}; }

Kernel2d load_kernel_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_kernel_file: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<double> row;
    double x;
    while (ls >> x) row.push_back(x);
    if (!ls.eof() && ls.fail())
      throw std::runtime_error("load_kernel_file: malformed number in " + path);
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("load_kernel_file: no data in " + path);
  const std::size_t cols = rows.front().size();
  for (const auto& r : rows)
    if (r.size() != cols)
      throw std::runtime_error("load_kernel_file: ragged rows in " + path);
  Kernel2d k{static_cast<int>(rows.size()), static_cast<int>(cols), {}};
  if (k.rows % 2 == 0 || k.cols % 2 == 0)
    throw std::runtime_error("load_kernel_file: kernel side lengths must be odd in " + path);
  k.v.reserve(rows.size() * cols);
  for (const auto& r : rows) k.v.insert(k.v.end(), r.begin(), r.end());
  k.normalize_unit_sum();
  return k;
}

CircularConvOp kernel_bank(const KernelSpec& spec) {
  switch (spec.family) {
    case KernelFamily::gaussian:
      return CircularConvOp(gaussian_kernel(spec.stddev, spec.size));
    case KernelFamily::uniform:
      return CircularConvOp(uniform_kernel(spec.size));
    case KernelFamily::file:
      return CircularConvOp(load_kernel_file(spec.path));
  }
  throw std::invalid_argument("kernel_bank: unknown kernel family");
}

}  // namespace proxpnp
