#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace proxpnp {

// Grid geometry of a signal: height x width spatial grid, 1D signals use
// height == 1. Channels are stored planar, one full grid per channel.
struct Shape {
  int height = 1;
  int width = 1;
  int channels = 1;

  std::int64_t pixels() const { return static_cast<std::int64_t>(height) * width; }
  std::int64_t size() const { return pixels() * channels; }
  bool operator==(const Shape&) const = default;
  std::string to_string() const {
    return std::to_string(height) + "x" + std::to_string(width) + "x" + std::to_string(channels);
  }
};

// Flat real-valued signal over a grid; values are unitless intensities,
// nominally in [0,1]. data[ch * height*width + row * width + col].
struct Signal {
  Shape shape;
  std::vector<double> data;

  Signal() = default;
  explicit Signal(Shape s, double fill = 0.0)
      : shape(s), data(static_cast<std::size_t>(s.size()), fill) {}
  Signal(Shape s, std::vector<double> values) : shape(s), data(std::move(values)) {
    if (static_cast<std::int64_t>(data.size()) != s.size())
      throw std::invalid_argument("Signal: data length " + std::to_string(data.size()) +
                                  " does not match shape " + s.to_string());
  }

  std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }
  double* channel(int c) { return data.data() + static_cast<std::size_t>(c) * shape.pixels(); }
  const double* channel(int c) const {
    return data.data() + static_cast<std::size_t>(c) * shape.pixels();
  }
  double& operator[](std::int64_t i) { return data[static_cast<std::size_t>(i)]; }
  double operator[](std::int64_t i) const { return data[static_cast<std::size_t>(i)]; }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

inline void require_shape(const Signal& x, const Shape& s, const char* where) {
  if (!(x.shape == s))
    throw std::invalid_argument(std::string(where) + ": shape mismatch, got " +
                                x.shape.to_string() + ", expected " + s.to_string());
}

inline void require_finite(const Signal& x, const char* where) {
  if (!x.all_finite())
    throw std::runtime_error(std::string(where) + ": signal contains NaN/Inf entries");
}

inline double dot(const Signal& a, const Signal& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
  return s;
}

inline double sqnorm(const Signal& a) { return dot(a, a); }
inline double norm(const Signal& a) { return std::sqrt(sqnorm(a)); }

inline double sqdist(const Signal& a, const Signal& b) {
  if (a.size() != b.size()) throw std::invalid_argument("sqdist: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    s += d * d;
  }
  return s;
}

inline double max_abs_diff(const Signal& a, const Signal& b) {
  if (a.size() != b.size()) throw std::invalid_argument("max_abs_diff: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

// y += a * x
inline void axpy(double a, const Signal& x, Signal& y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: size mismatch");
  for (std::size_t i = 0; i < x.data.size(); ++i) y.data[i] += a * x.data[i];
}

inline Signal operator+(const Signal& a, const Signal& b) {
  Signal r = a;
  axpy(1.0, b, r);
  return r;
}

inline Signal operator-(const Signal& a, const Signal& b) {
  Signal r = a;
  axpy(-1.0, b, r);
  return r;
}

inline Signal operator*(double a, const Signal& x) {
  Signal r = x;
  for (double& v : r.data) v *= a;
  return r;
}

// a*x + b*y, elementwise
inline Signal lincomb(double a, const Signal& x, double b, const Signal& y) {
  if (x.size() != y.size()) throw std::invalid_argument("lincomb: size mismatch");
  Signal r(x.shape);
  for (std::size_t i = 0; i < x.data.size(); ++i) r.data[i] = a * x.data[i] + b * y.data[i];
  return r;
}

inline double mean_squared_error(const Signal& a, const Signal& b) {
  if (a.size() != b.size()) throw std::invalid_argument("mean_squared_error: size mismatch");
  return a.size() == 0 ? 0.0 : sqdist(a, b) / static_cast<double>(a.size());
}

}  // namespace proxpnp
