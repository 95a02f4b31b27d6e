#pragma once

#include <complex>
#include <vector>

#include "freqcross/image.hpp"

namespace freqcross {

using Complex = std::complex<double>;

enum class FftDirection { kForward, kInverse };

struct ComplexGrid {
  int height = 0;
  int width = 0;
  std::vector<Complex> data;  // row-major

  ComplexGrid() = default;
  ComplexGrid(int h, int w) : height(h), width(w), data(static_cast<size_t>(h) * w) {}

  Complex& at(int u, int v) { return data[static_cast<size_t>(u) * width + v]; }
  Complex at(int u, int v) const { return data[static_cast<size_t>(u) * width + v]; }
};

// Discrete Fourier transform of arbitrary length. Forward is unscaled,
// X[k] = sum_n x[n] exp(-2*pi*i*k*n/N); inverse divides by N. Power-of-two
// lengths run iterative Cooley-Tukey; all other lengths go through
// Bluestein's chirp-z algorithm on a padded power-of-two convolution.
std::vector<Complex> fft1d(std::vector<Complex> x, FftDirection direction);

// 2D transform: all rows, then all columns (separable form of the double
// sum). The inverse scales by 1/(H*W). Row/column passes may run on several
// threads; each 1D line is computed whole by one worker, so the result is
// bitwise identical for any thread count.
ComplexGrid fft2d(const ComplexGrid& grid, FftDirection direction);

// Forward transform of a real luma image.
ComplexGrid fft2d(const ImageGray& img);

}  // namespace freqcross
