#include "freqcross/augment.hpp"

#include <algorithm>
#include <cmath>

#include "freqcross/error.hpp"

namespace freqcross {

void AugmentConfig::validate() const {
  if (hflip_prob < 0.0 || hflip_prob > 1.0) {
    fail(ErrorKind::InvalidSpec, "hflip_prob must be in [0,1]");
  }
  if (max_rotation_deg < 0.0) fail(ErrorKind::InvalidSpec, "max_rotation must be >= 0");
  if (jitter_range < 0.0 || jitter_range >= 1.0) {
    fail(ErrorKind::InvalidSpec, "jitter_range must be in [0,1)");
  }
}

ImageRGB rotate_bilinear(const ImageRGB& img, double angle_deg) {
  if (angle_deg == 0.0) return img;
  const double angle = angle_deg * M_PI / 180.0;
  const double cos_a = std::cos(angle);
  const double sin_a = std::sin(angle);
  const double cy = (img.height - 1) / 2.0;
  const double cx = (img.width - 1) / 2.0;
  ImageRGB out(img.height, img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      // inverse map: rotate the destination pixel back into the source
      const double dy = y - cy;
      const double dx = x - cx;
      const double sy = cy + dy * cos_a - dx * sin_a;
      const double sx = cx + dy * sin_a + dx * cos_a;
      if (sy < 0.0 || sy > img.height - 1 || sx < 0.0 || sx > img.width - 1) {
        continue;  // black fill
      }
      const int y0 = static_cast<int>(sy);
      const int x0 = static_cast<int>(sx);
      const int y1 = std::min(y0 + 1, img.height - 1);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double fy = sy - y0;
      const double fx = sx - x0;
      for (int c = 0; c < 3; ++c) {
        const double top = img.at(y0, x0, c) * (1 - fx) + img.at(y0, x1, c) * fx;
        const double bot = img.at(y1, x0, c) * (1 - fx) + img.at(y1, x1, c) * fx;
        out.at(y, x, c) = top * (1 - fy) + bot * fy;
      }
    }
  }
  return out;
}

ImageRGB augment(const ImageRGB& img, const AugmentConfig& cfg, Rng& rng) {
  cfg.validate();
  const double u_flip = rng.uniform();
  const double angle = rng.uniform(-cfg.max_rotation_deg, cfg.max_rotation_deg);
  const double f_brightness = rng.uniform(1.0 - cfg.jitter_range, 1.0 + cfg.jitter_range);
  const double f_contrast = rng.uniform(1.0 - cfg.jitter_range, 1.0 + cfg.jitter_range);
  const double f_saturation = rng.uniform(1.0 - cfg.jitter_range, 1.0 + cfg.jitter_range);

  ImageRGB out = (u_flip < cfg.hflip_prob) ? hflip(img) : img;
  out = rotate_bilinear(out, angle);

  // brightness: scale; contrast: blend with the mean luma; saturation: blend
  // with per-pixel luma. Clamped once at the end.
  if (f_brightness != 1.0 || f_contrast != 1.0 || f_saturation != 1.0) {
    const ImageGray luma = to_grayscale(out);
    double mean_luma = 0.0;
    for (double v : luma.data) mean_luma += v;
    mean_luma /= luma.data.size();
    const double mean_bright = mean_luma * f_brightness;
    for (int y = 0; y < out.height; ++y) {
      for (int x = 0; x < out.width; ++x) {
        const double l = luma.at(y, x) * f_brightness;
        // luma transforms like the channels under contrast
        const double l_contrast = mean_bright + (l - mean_bright) * f_contrast;
        for (int c = 0; c < 3; ++c) {
          double v = out.at(y, x, c) * f_brightness;
          v = mean_bright + (v - mean_bright) * f_contrast;
          v = l_contrast + (v - l_contrast) * f_saturation;
          out.at(y, x, c) = v;
        }
      }
    }
  }
  for (double& v : out.data) v = std::clamp(v, 0.0, 1.0);
  return out;
}

}  // namespace freqcross
