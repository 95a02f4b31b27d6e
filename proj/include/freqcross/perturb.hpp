#pragma once

#include <string>

#include "freqcross/image.hpp"
#include "freqcross/rng.hpp"

namespace freqcross {

enum class PerturbKind { kJpegSim, kGaussianNoise, kGaussianBlur, kResizeRoundtrip };

// One robustness perturbation. Only the fields for `kind` may be set.
struct PerturbSpec {
  PerturbKind kind = PerturbKind::kGaussianNoise;
  int quality = 0;         // jpeg_sim: 1..100
  double sigma = 0.0;      // noise / blur: > 0
  int target_side = 0;     // resize_roundtrip: >= 8

  static PerturbSpec jpeg_sim(int quality);
  static PerturbSpec gaussian_noise(double sigma);
  static PerturbSpec gaussian_blur(double sigma);
  static PerturbSpec resize_roundtrip(int target_side);

  void validate() const;
  // Canonical row name, e.g. "jpeg_q90", "noise_s0.01", "blur_s1", "resize_128".
  std::string name() const;
};

// Apply a perturbation. Only gaussian_noise consumes the random stream; the
// other kinds are deterministic functions of the image and spec.
ImageRGB perturb(const ImageRGB& img, const PerturbSpec& spec, Rng& rng);

// JPEG-style degradation: BT.601 full-range YCbCr, per-channel 8x8 DCT-II,
// Annex-K tables scaled by the libjpeg quality rule, dequantize, inverse
// DCT. No chroma subsampling and no entropy coding; edge-replication padding
// to multiples of 8 is cropped away at the end.
ImageRGB jpeg_roundtrip(const ImageRGB& img, int quality);

// Separable Gaussian blur, radius ceil(3*sigma), kernel normalized to sum 1,
// edge-replicate boundary.
ImageRGB gaussian_blur(const ImageRGB& img, double sigma);

// The scaled 8x8 quantization table for a quality in [1,100].
// `chroma` selects the chrominance base table. Exposed for tests.
void jpeg_quant_table(int quality, bool chroma, int out[64]);

}  // namespace freqcross
