#pragma once

#include "freqcross/image.hpp"
#include "freqcross/rng.hpp"

namespace freqcross {

struct AugmentConfig {
  bool enabled = true;
  double hflip_prob = 0.5;
  double max_rotation_deg = 15.0;
  double jitter_range = 0.1;  // fractional; factors drawn in [1-j, 1+j]

  void validate() const;
  bool operator==(const AugmentConfig&) const = default;
};

// Training-time augmentation: horizontal flip, rotation about the image
// center (bilinear, black fill), then brightness/contrast/saturation jitter.
// Five random values are always drawn in a fixed order (flip, angle,
// brightness, contrast, saturation) so the stream layout does not depend on
// the config. Output is clamped to [0,1].
ImageRGB augment(const ImageRGB& img, const AugmentConfig& cfg, Rng& rng);

// Rotation about the image center, bilinear sampling, zero fill outside the
// source footprint. Exposed separately for tests.
ImageRGB rotate_bilinear(const ImageRGB& img, double angle_deg);

}  // namespace freqcross
