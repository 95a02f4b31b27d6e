#pragma once

// Slow reference implementations used only to check the fast library paths.
// Everything here favors the most literal transcription of the definitions
// over speed.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "freqcross/fft.hpp"
#include "freqcross/image.hpp"
#include "freqcross/spectrum.hpp"

namespace oracle {

// O(N^2) DFT straight from the exponential sum.
inline std::vector<freqcross::Complex> naive_dft(const std::vector<freqcross::Complex>& x,
                                                 bool inverse) {
  const size_t n = x.size();
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<freqcross::Complex> out(n);
  for (size_t k = 0; k < n; ++k) {
    freqcross::Complex acc(0.0, 0.0);
    for (size_t m = 0; m < n; ++m) {
      const double ang = sign * 2.0 * M_PI * static_cast<double>(k * m) / static_cast<double>(n);
      acc += x[m] * freqcross::Complex(std::cos(ang), std::sin(ang));
    }
    out[k] = inverse ? acc / static_cast<double>(n) : acc;
  }
  return out;
}

// Direct double-sum 2D DFT of a luma image.
inline freqcross::ComplexGrid naive_dft2d(const freqcross::ImageGray& img) {
  freqcross::ComplexGrid out(img.height, img.width);
  for (int u = 0; u < img.height; ++u) {
    for (int v = 0; v < img.width; ++v) {
      freqcross::Complex acc(0.0, 0.0);
      for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
          const double ang = -2.0 * M_PI * (static_cast<double>(u) * y / img.height +
                                            static_cast<double>(v) * x / img.width);
          acc += img.at(y, x) * freqcross::Complex(std::cos(ang), std::sin(ang));
        }
      }
      out.at(u, v) = acc;
    }
  }
  return out;
}

// Per-pixel radial binning by the book: distance from the center pixel,
// normalized by the corner distance, floor into n_bins, average.
struct RadialBrute {
  std::vector<double> energy;
  std::vector<long long> counts;
};

inline RadialBrute radial_brute(const freqcross::MagnitudeSpectrum& m, int n_bins) {
  RadialBrute out;
  out.energy.assign(n_bins, 0.0);
  out.counts.assign(n_bins, 0);
  const int uc = m.height / 2;
  const int vc = m.width / 2;
  const double r_max = std::sqrt(static_cast<double>(uc) * uc + static_cast<double>(vc) * vc);
  for (int u = 0; u < m.height; ++u) {
    for (int v = 0; v < m.width; ++v) {
      const double r = std::sqrt(static_cast<double>(u - uc) * (u - uc) +
                                 static_cast<double>(v - vc) * (v - vc));
      const double rho = r_max > 0.0 ? r / r_max : 0.0;
      int k = static_cast<int>(std::floor(rho * n_bins));
      if (k > n_bins - 1) k = n_bins - 1;
      out.energy[k] += m.at(u, v);
      out.counts[k] += 1;
    }
  }
  for (int k = 0; k < n_bins; ++k) {
    if (out.counts[k] > 0) out.energy[k] /= static_cast<double>(out.counts[k]);
  }
  return out;
}

// Direct sliding-window convolution (cross-correlation, zero padding), the
// reference for the im2col/GEMM path.
template <typename T>
std::vector<T> conv2d_brute(const std::vector<T>& x, int b, int c_in, int h, int w,
                            const std::vector<T>& weight, int c_out, int kh, int kw,
                            const std::vector<T>& bias, int stride, int pad) {
  const int oh = (h + 2 * pad - kh) / stride + 1;
  const int ow = (w + 2 * pad - kw) / stride + 1;
  std::vector<T> out(static_cast<size_t>(b) * c_out * oh * ow, T(0));
  for (int n = 0; n < b; ++n) {
    for (int oc = 0; oc < c_out; ++oc) {
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          T acc = bias[static_cast<size_t>(oc)];
          for (int c = 0; c < c_in; ++c) {
            for (int ky = 0; ky < kh; ++ky) {
              const int iy = oy * stride - pad + ky;
              if (iy < 0 || iy >= h) continue;
              for (int kx = 0; kx < kw; ++kx) {
                const int ix = ox * stride - pad + kx;
                if (ix < 0 || ix >= w) continue;
                acc += x[((static_cast<size_t>(n) * c_in + c) * h + iy) * w + ix] *
                       weight[((static_cast<size_t>(oc) * c_in + c) * kh + ky) * kw + kx];
              }
            }
          }
          out[((static_cast<size_t>(n) * c_out + oc) * oh + oy) * ow + ox] = acc;
        }
      }
    }
  }
  return out;
}

// AUC as the Mann-Whitney statistic: fraction of (positive, negative) pairs
// ranked correctly, ties worth half.
inline double auc_concordance(const std::vector<double>& scores, const std::vector<int>& labels) {
  double credit = 0.0;
  int64_t pairs = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) credit += 1.0;
      if (scores[i] == scores[j]) credit += 0.5;
    }
  }
  return credit / static_cast<double>(pairs);
}

// Cyclic Jacobi eigendecomposition of a symmetric matrix (row-major d x d).
// Returns eigenvalues descending with matching unit eigenvectors as rows.
struct JacobiEigen {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;
};

inline JacobiEigen jacobi_eigen(std::vector<double> a, size_t d) {
  std::vector<double> v(d * d, 0.0);
  for (size_t i = 0; i < d; ++i) v[i * d + i] = 1.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (size_t p = 0; p < d; ++p) {
      for (size_t q = p + 1; q < d; ++q) off += a[p * d + q] * a[p * d + q];
    }
    if (off < 1e-24) break;
    for (size_t p = 0; p < d; ++p) {
      for (size_t q = p + 1; q < d; ++q) {
        if (a[p * d + q] == 0.0) continue;
        const double theta = (a[q * d + q] - a[p * d + p]) / (2.0 * a[p * d + q]);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (size_t k = 0; k < d; ++k) {
          const double akp = a[k * d + p];
          const double akq = a[k * d + q];
          a[k * d + p] = c * akp - s * akq;
          a[k * d + q] = s * akp + c * akq;
        }
        for (size_t k = 0; k < d; ++k) {
          const double apk = a[p * d + k];
          const double aqk = a[q * d + k];
          a[p * d + k] = c * apk - s * aqk;
          a[q * d + k] = s * apk + c * aqk;
        }
        for (size_t k = 0; k < d; ++k) {
          const double vkp = v[k * d + p];
          const double vkq = v[k * d + q];
          v[k * d + p] = c * vkp - s * vkq;
          v[k * d + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<size_t> order(d);
  for (size_t i = 0; i < d; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t x, size_t y) { return a[x * d + x] > a[y * d + y]; });

  JacobiEigen out;
  for (const size_t col : order) {
    out.values.push_back(a[col * d + col]);
    std::vector<double> vec(d);
    for (size_t k = 0; k < d; ++k) vec[k] = v[k * d + col];
    out.vectors.push_back(std::move(vec));
  }
  return out;
}

}  // namespace oracle
