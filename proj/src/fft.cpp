#include "freqcross/fft.hpp"

#include <cmath>
#include <cstdint>

#include "freqcross/error.hpp"
#include "freqcross/parallel.hpp"

namespace freqcross {
namespace {

bool is_pow2(size_t n) { return (n & (n - 1)) == 0; }

// In-place iterative Cooley-Tukey for power-of-two n. sign -1 = forward.
// Unscaled in both directions.
void fft_pow2(std::vector<Complex>& x, int sign) {
  const size_t n = x.size();
  if (n <= 1) return;

  for (size_t i = 1, j = 0; i < n; ++i) {  // bit-reversal permutation
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }

  std::vector<Complex> root(n / 2);
  for (size_t j = 0; j < n / 2; ++j) {
    const double ang = sign * 2.0 * M_PI * static_cast<double>(j) / static_cast<double>(n);
    root[j] = Complex(std::cos(ang), std::sin(ang));
  }

  for (size_t len = 2; len <= n; len <<= 1) {
    const size_t stride = n / len;
    for (size_t i = 0; i < n; i += len) {
      for (size_t j = 0; j < len / 2; ++j) {
        const Complex u = x[i + j];
        const Complex v = x[i + j + len / 2] * root[j * stride];
        x[i + j] = u + v;
        x[i + j + len / 2] = u - v;
      }
    }
  }
}

// One 1D transform of fixed length and direction, reusable across many
// lines. Non-power-of-two lengths carry a precomputed Bluestein chirp and
// kernel spectrum.
class LineTransform {
 public:
  LineTransform(size_t n, int sign) : n_(n), sign_(sign), pow2_(is_pow2(n)) {
    if (pow2_) return;
    m_ = 1;
    while (m_ < 2 * n_ - 1) m_ <<= 1;

    // chirp[k] = exp(sign*pi*i*k^2/n). k^2 is reduced mod 2n first: the
    // exponential has period 2n in k^2, and the reduction keeps the angle
    // small so large k loses no precision.
    chirp_.resize(n_);
    for (size_t k = 0; k < n_; ++k) {
      const uint64_t sq = (static_cast<uint64_t>(k) * k) % (2 * n_);
      const double ang = sign * M_PI * static_cast<double>(sq) / static_cast<double>(n_);
      chirp_[k] = Complex(std::cos(ang), std::sin(ang));
    }

    // Kernel b[d] = conj(chirp[|d|]) placed circularly for lags -(n-1)..n-1.
    kernel_fft_.assign(m_, Complex(0.0, 0.0));
    kernel_fft_[0] = std::conj(chirp_[0]);
    for (size_t k = 1; k < n_; ++k) {
      kernel_fft_[k] = std::conj(chirp_[k]);
      kernel_fft_[m_ - k] = std::conj(chirp_[k]);
    }
    fft_pow2(kernel_fft_, -1);
  }

  // Unscaled transform in place.
  void apply(std::vector<Complex>& x) const {
    if (pow2_) {
      fft_pow2(x, sign_);
      return;
    }
    std::vector<Complex> a(m_, Complex(0.0, 0.0));
    for (size_t k = 0; k < n_; ++k) a[k] = x[k] * chirp_[k];
    fft_pow2(a, -1);
    for (size_t k = 0; k < m_; ++k) a[k] *= kernel_fft_[k];
    fft_pow2(a, +1);
    const double inv_m = 1.0 / static_cast<double>(m_);
    for (size_t k = 0; k < n_; ++k) x[k] = a[k] * inv_m * chirp_[k];
  }

 private:
  size_t n_;
  int sign_;
  bool pow2_;
  size_t m_ = 0;
  std::vector<Complex> chirp_;
  std::vector<Complex> kernel_fft_;
};

}  // namespace

std::vector<Complex> fft1d(std::vector<Complex> x, FftDirection direction) {
  if (x.empty()) fail(ErrorKind::EmptyInput, "fft1d of an empty vector");
  const int sign = direction == FftDirection::kForward ? -1 : +1;
  LineTransform t(x.size(), sign);
  t.apply(x);
  if (direction == FftDirection::kInverse) {
    const double inv_n = 1.0 / static_cast<double>(x.size());
    for (Complex& v : x) v *= inv_n;
  }
  return x;
}

ComplexGrid fft2d(const ComplexGrid& grid, FftDirection direction) {
  if (grid.height < 1 || grid.width < 1) fail(ErrorKind::EmptyInput, "fft2d of an empty grid");
  const int sign = direction == FftDirection::kForward ? -1 : +1;
  const int h = grid.height;
  const int w = grid.width;
  ComplexGrid out = grid;

  const LineTransform row_t(static_cast<size_t>(w), sign);
  parallel_for(h, [&](int64_t u) {
    std::vector<Complex> line(out.data.begin() + u * w, out.data.begin() + (u + 1) * w);
    row_t.apply(line);
    std::copy(line.begin(), line.end(), out.data.begin() + u * w);
  });

  const LineTransform col_t(static_cast<size_t>(h), sign);
  parallel_for(w, [&](int64_t v) {
    std::vector<Complex> line(static_cast<size_t>(h));
    for (int u = 0; u < h; ++u) line[u] = out.at(u, static_cast<int>(v));
    col_t.apply(line);
    for (int u = 0; u < h; ++u) out.at(u, static_cast<int>(v)) = line[u];
  });

  if (direction == FftDirection::kInverse) {
    const double scale = 1.0 / (static_cast<double>(h) * w);
    for (Complex& v : out.data) v *= scale;
  }
  return out;
}

ComplexGrid fft2d(const ImageGray& img) {
  ComplexGrid grid(img.height, img.width);
  for (size_t i = 0; i < img.data.size(); ++i) grid.data[i] = Complex(img.data[i], 0.0);
  return fft2d(grid, FftDirection::kForward);
}

}  // namespace freqcross
