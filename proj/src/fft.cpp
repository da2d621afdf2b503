#include "proxpnp/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>

namespace proxpnp {
namespace {

// FFTW's planner is not thread-safe; execution with the new-array interface
// is. Plans are created once per grid size on fftw_malloc'd scratch (so any
// later fftw_malloc'd array satisfies the alignment the plan assumes) and
// kept for the lifetime of the process.
struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

std::mutex planner_mutex;

PlanPair& plans_for(int h, int w) {
  static std::map<std::pair<int, int>, PlanPair> cache;
  std::lock_guard<std::mutex> lock(planner_mutex);
  auto key = std::make_pair(h, w);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  const std::size_t n = static_cast<std::size_t>(h) * w;
  fftw_complex* a = fftw_alloc_complex(n);
  fftw_complex* b = fftw_alloc_complex(n);
  if (!a || !b) throw std::runtime_error("fft2: allocation failure");
  PlanPair p;
  p.fwd = fftw_plan_dft_2d(h, w, a, b, FFTW_FORWARD, FFTW_ESTIMATE);
  p.bwd = fftw_plan_dft_2d(h, w, a, b, FFTW_BACKWARD, FFTW_ESTIMATE);
  fftw_free(a);
  fftw_free(b);
  if (!p.fwd || !p.bwd) throw std::runtime_error("fft2: planning failure");
  return cache.emplace(key, p).first->second;
}

struct ComplexBuffer {
  fftw_complex* ptr;
  explicit ComplexBuffer(std::size_t n) : ptr(fftw_alloc_complex(n)) {
    if (!ptr) throw std::runtime_error("fft2: allocation failure");
  }
  ~ComplexBuffer() { fftw_free(ptr); }
  ComplexBuffer(const ComplexBuffer&) = delete;
  ComplexBuffer& operator=(const ComplexBuffer&) = delete;
};

}  // namespace

std::vector<std::complex<double>> fft2(int h, int w, const double* in) {
  const std::size_t n = static_cast<std::size_t>(h) * w;
  PlanPair& p = plans_for(h, w);
  ComplexBuffer a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a.ptr[i][0] = in[i];
    a.ptr[i][1] = 0.0;
  }
  fftw_execute_dft(p.fwd, a.ptr, b.ptr);
  std::vector<std::complex<double>> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = {b.ptr[i][0], b.ptr[i][1]};
  return out;
}

void ifft2(int h, int w, const std::complex<double>* in, double* out) {
  const std::size_t n = static_cast<std::size_t>(h) * w;
  PlanPair& p = plans_for(h, w);
  ComplexBuffer a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a.ptr[i][0] = in[i].real();
    a.ptr[i][1] = in[i].imag();
  }
  fftw_execute_dft(p.bwd, a.ptr, b.ptr);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = b.ptr[i][0] * scale;
}

}  // namespace proxpnp
