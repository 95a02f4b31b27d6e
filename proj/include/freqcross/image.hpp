#pragma once

#include <string>
#include <vector>

namespace freqcross {

// Minimum image side. Keeps 8x8 block processing well defined.
inline constexpr int kMinImageSide = 8;

// RGB image, channels in [0,1], row-major (y, x, c).
struct ImageRGB {
  int height = 0;
  int width = 0;
  std::vector<double> data;

  ImageRGB() = default;
  ImageRGB(int h, int w) : height(h), width(w), data(static_cast<size_t>(h) * w * 3, 0.0) {}

  double& at(int y, int x, int c) { return data[(static_cast<size_t>(y) * width + x) * 3 + c]; }
  double at(int y, int x, int c) const { return data[(static_cast<size_t>(y) * width + x) * 3 + c]; }
};

// Single-channel luma image in [0,1].
struct ImageGray {
  int height = 0;
  int width = 0;
  std::vector<double> data;

  ImageGray() = default;
  ImageGray(int h, int w) : height(h), width(w), data(static_cast<size_t>(h) * w, 0.0) {}

  double& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
  double at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }
};

enum class ImageFormat { kPng, kJpeg, kPpm };

// Decode 8-bit PNG / baseline JPEG / binary PPM (P6) bytes. Channels are
// mapped to [0,1] by dividing by 255; grayscale sources are replicated to
// three channels. Images smaller than 8x8 are rejected.
ImageRGB decode_image(const std::string& bytes, ImageFormat format);

// Decode a file, detecting the format from its magic bytes.
ImageRGB decode_image_file(const std::string& path);

// Binary PPM (P6) with maxval 255: "P6 <w> <h> 255\n" + RGB bytes.
std::string encode_ppm(const ImageRGB& img);
void write_ppm_file(const std::string& path, const ImageRGB& img);

// Bilinear resize with half-pixel-centered sampling; output clamped to [0,1].
// Accepts any target of at least 1x1; the 8x8 floor applies only where images
// enter the pipeline (decoding).
ImageRGB resize_bilinear(const ImageRGB& img, int out_h, int out_w);

// BT.601 luma: 0.299 R + 0.587 G + 0.114 B.
ImageGray to_grayscale(const ImageRGB& img);

ImageRGB hflip(const ImageRGB& img);

}  // namespace freqcross
