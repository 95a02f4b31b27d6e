#include "freqcross/perturb.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "freqcross/error.hpp"

namespace freqcross {
namespace {

// JPEG Annex K.1 / K.2 base quantization tables.
constexpr int kLumaBase[64] = {
    16, 11, 10, 16, 24,  40,  51,  61,   //
    12, 12, 14, 19, 26,  58,  60,  55,   //
    14, 13, 16, 24, 40,  57,  69,  56,   //
    14, 17, 22, 29, 51,  87,  80,  62,   //
    18, 22, 37, 56, 68,  109, 103, 77,   //
    24, 35, 55, 64, 81,  104, 113, 92,   //
    49, 64, 78, 87, 103, 121, 120, 101,  //
    72, 92, 95, 98, 112, 100, 103, 99};

constexpr int kChromaBase[64] = {
    17, 18, 24, 47, 99, 99, 99, 99,  //
    18, 21, 26, 66, 99, 99, 99, 99,  //
    24, 26, 56, 99, 99, 99, 99, 99,  //
    47, 66, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99};

// Orthonormal 8-point DCT-II basis, C[u][x].
struct DctBasis {
  double c[8][8];
  DctBasis() {
    for (int u = 0; u < 8; ++u) {
      const double scale = (u == 0) ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int x = 0; x < 8; ++x) {
        c[u][x] = scale * std::cos((2 * x + 1) * u * M_PI / 16.0);
      }
    }
  }
};
const DctBasis kDct;

// F = C * f * C^T
void dct8x8(const double in[64], double out[64]) {
  double tmp[64];
  for (int u = 0; u < 8; ++u) {
    for (int x = 0; x < 8; ++x) {
      double s = 0.0;
      for (int k = 0; k < 8; ++k) s += kDct.c[u][k] * in[k * 8 + x];
      tmp[u * 8 + x] = s;
    }
  }
  for (int u = 0; u < 8; ++u) {
    for (int v = 0; v < 8; ++v) {
      double s = 0.0;
      for (int k = 0; k < 8; ++k) s += tmp[u * 8 + k] * kDct.c[v][k];
      out[u * 8 + v] = s;
    }
  }
}

// f = C^T * F * C
void idct8x8(const double in[64], double out[64]) {
  double tmp[64];
  for (int x = 0; x < 8; ++x) {
    for (int v = 0; v < 8; ++v) {
      double s = 0.0;
      for (int k = 0; k < 8; ++k) s += kDct.c[k][x] * in[k * 8 + v];
      tmp[x * 8 + v] = s;
    }
  }
  for (int x = 0; x < 8; ++x) {
    for (int y = 0; y < 8; ++y) {
      double s = 0.0;
      for (int k = 0; k < 8; ++k) s += tmp[x * 8 + k] * kDct.c[k][y];
      out[x * 8 + y] = s;
    }
  }
}

// One padded channel plane through quantized DCT blocks, values in 0..255.
void jpeg_channel(std::vector<double>& plane, int h, int w, const int table[64]) {
  double block[64];
  double coeff[64];
  for (int by = 0; by < h; by += 8) {
    for (int bx = 0; bx < w; bx += 8) {
      for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
          block[i * 8 + j] = plane[static_cast<size_t>(by + i) * w + (bx + j)] - 128.0;
        }
      }
      dct8x8(block, coeff);
      for (int i = 0; i < 64; ++i) {
        coeff[i] = std::round(coeff[i] / table[i]) * table[i];
      }
      idct8x8(coeff, block);
      for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
          plane[static_cast<size_t>(by + i) * w + (bx + j)] = block[i * 8 + j] + 128.0;
        }
      }
    }
  }
}

std::string format_sigma(double sigma) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", sigma);
  return buf;
}

}  // namespace

void jpeg_quant_table(int quality, bool chroma, int out[64]) {
  const int* base = chroma ? kChromaBase : kLumaBase;
  const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  for (int i = 0; i < 64; ++i) {
    out[i] = std::clamp((base[i] * scale + 50) / 100, 1, 255);
  }
}

PerturbSpec PerturbSpec::jpeg_sim(int quality) {
  PerturbSpec s;
  s.kind = PerturbKind::kJpegSim;
  s.quality = quality;
  return s;
}
PerturbSpec PerturbSpec::gaussian_noise(double sigma) {
  PerturbSpec s;
  s.kind = PerturbKind::kGaussianNoise;
  s.sigma = sigma;
  return s;
}
PerturbSpec PerturbSpec::gaussian_blur(double sigma) {
  PerturbSpec s;
  s.kind = PerturbKind::kGaussianBlur;
  s.sigma = sigma;
  return s;
}
PerturbSpec PerturbSpec::resize_roundtrip(int target_side) {
  PerturbSpec s;
  s.kind = PerturbKind::kResizeRoundtrip;
  s.target_side = target_side;
  return s;
}

void PerturbSpec::validate() const {
  switch (kind) {
    case PerturbKind::kJpegSim:
      if (quality < 1 || quality > 100) fail(ErrorKind::InvalidSpec, "jpeg quality must be in [1,100]");
      if (sigma != 0.0 || target_side != 0) fail(ErrorKind::InvalidSpec, "jpeg_sim takes only quality");
      return;
    case PerturbKind::kGaussianNoise:
    case PerturbKind::kGaussianBlur:
      if (!(sigma > 0.0)) fail(ErrorKind::InvalidSpec, "sigma must be > 0");
      if (quality != 0 || target_side != 0) fail(ErrorKind::InvalidSpec, "noise/blur take only sigma");
      return;
    case PerturbKind::kResizeRoundtrip:
      if (target_side < kMinImageSide) fail(ErrorKind::InvalidSpec, "target_side must be >= 8");
      if (quality != 0 || sigma != 0.0) fail(ErrorKind::InvalidSpec, "resize takes only target_side");
      return;
  }
  fail(ErrorKind::InvalidSpec, "unknown perturbation kind");
}

std::string PerturbSpec::name() const {
  switch (kind) {
    case PerturbKind::kJpegSim: return "jpeg_q" + std::to_string(quality);
    case PerturbKind::kGaussianNoise: return "noise_s" + format_sigma(sigma);
    case PerturbKind::kGaussianBlur: return "blur_s" + format_sigma(sigma);
    case PerturbKind::kResizeRoundtrip: return "resize_" + std::to_string(target_side);
  }
  return "unknown";
}

ImageRGB jpeg_roundtrip(const ImageRGB& img, int quality) {
  const int pad_h = (img.height + 7) / 8 * 8;
  const int pad_w = (img.width + 7) / 8 * 8;

  // Padded full-range YCbCr planes in 0..255.
  std::vector<double> y_plane(static_cast<size_t>(pad_h) * pad_w);
  std::vector<double> cb_plane(y_plane.size());
  std::vector<double> cr_plane(y_plane.size());
  for (int y = 0; y < pad_h; ++y) {
    const int sy = std::min(y, img.height - 1);  // edge replication
    for (int x = 0; x < pad_w; ++x) {
      const int sx = std::min(x, img.width - 1);
      const double r = img.at(sy, sx, 0) * 255.0;
      const double g = img.at(sy, sx, 1) * 255.0;
      const double b = img.at(sy, sx, 2) * 255.0;
      const size_t i = static_cast<size_t>(y) * pad_w + x;
      y_plane[i] = 0.299 * r + 0.587 * g + 0.114 * b;
      cb_plane[i] = -0.168736 * r - 0.331264 * g + 0.5 * b + 128.0;
      cr_plane[i] = 0.5 * r - 0.418688 * g - 0.081312 * b + 128.0;
    }
  }

  int luma_table[64];
  int chroma_table[64];
  jpeg_quant_table(quality, false, luma_table);
  jpeg_quant_table(quality, true, chroma_table);
  jpeg_channel(y_plane, pad_h, pad_w, luma_table);
  jpeg_channel(cb_plane, pad_h, pad_w, chroma_table);
  jpeg_channel(cr_plane, pad_h, pad_w, chroma_table);

  ImageRGB out(img.height, img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const size_t i = static_cast<size_t>(y) * pad_w + x;
      const double yy = y_plane[i];
      const double cb = cb_plane[i] - 128.0;
      const double cr = cr_plane[i] - 128.0;
      out.at(y, x, 0) = std::clamp((yy + 1.402 * cr) / 255.0, 0.0, 1.0);
      out.at(y, x, 1) = std::clamp((yy - 0.344136 * cb - 0.714136 * cr) / 255.0, 0.0, 1.0);
      out.at(y, x, 2) = std::clamp((yy + 1.772 * cb) / 255.0, 0.0, 1.0);
    }
  }
  return out;
}

ImageRGB gaussian_blur(const ImageRGB& img, double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
    sum += kernel[i + radius];
  }
  for (double& k : kernel) k /= sum;

  ImageRGB mid(img.height, img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          const int sx = std::clamp(x + i, 0, img.width - 1);
          acc += kernel[i + radius] * img.at(y, sx, c);
        }
        mid.at(y, x, c) = acc;
      }
    }
  }
  ImageRGB out(img.height, img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          const int sy = std::clamp(y + i, 0, img.height - 1);
          acc += kernel[i + radius] * mid.at(sy, x, c);
        }
        out.at(y, x, c) = std::clamp(acc, 0.0, 1.0);
      }
    }
  }
  return out;
}

ImageRGB perturb(const ImageRGB& img, const PerturbSpec& spec, Rng& rng) {
  spec.validate();
  switch (spec.kind) {
    case PerturbKind::kJpegSim:
      return jpeg_roundtrip(img, spec.quality);
    case PerturbKind::kGaussianNoise: {
      ImageRGB out = img;
      for (double& v : out.data) {
        v = std::clamp(v + spec.sigma * rng.normal(), 0.0, 1.0);
      }
      return out;
    }
    case PerturbKind::kGaussianBlur:
      return gaussian_blur(img, spec.sigma);
    case PerturbKind::kResizeRoundtrip: {
      if (spec.target_side == img.height && spec.target_side == img.width) return img;
      const ImageRGB small = resize_bilinear(img, spec.target_side, spec.target_side);
      return resize_bilinear(small, img.height, img.width);
    }
  }
  fail(ErrorKind::InvalidSpec, "unknown perturbation kind");
}

}  // namespace freqcross
