#pragma once

#include <complex>
#include <vector>

namespace proxpnp {

// Unnormalized forward 2D DFT of one real channel (h x w, row-major).
std::vector<std::complex<double>> fft2(int h, int w, const double* in);

// Inverse 2D DFT, normalized by 1/(h*w); imaginary parts are discarded.
void ifft2(int h, int w, const std::complex<double>* in, double* out);

}  // namespace proxpnp
