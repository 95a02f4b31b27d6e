#include "freqcross/datapipe.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <utility>

#include "freqcross/fft.hpp"
#include "freqcross/spectrum.hpp"

namespace freqcross {

Sample prepare_from_image(const ImageRGB& img, int side, const AugmentConfig& augment_cfg,
                          Rng& rng, int radial_bins) {
  ImageRGB sized = resize_bilinear(img, side, side);
  if (augment_cfg.enabled) sized = augment(sized, augment_cfg, rng);

  Sample sample;
  sample.side = side;

  // Interleaved (y, x, c) -> planar (c, y, x) for the conv stack.
  const int64_t plane = static_cast<int64_t>(side) * side;
  sample.rgb.resize(static_cast<size_t>(3 * plane));
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      for (int c = 0; c < 3; ++c) {
        sample.rgb[static_cast<size_t>(c * plane + y * side + x)] = sized.at(y, x, c);
      }
    }
  }

  const MagnitudeSpectrum mag = magnitude(fft2d(to_grayscale(sized)), /*centered=*/true);
  sample.m_log = log_normalize(mag).data;
  sample.e = radial_profile(mag, radial_bins, /*log_energy=*/true).energy;
  return sample;
}

Sample prepare_sample(const ManifestEntry& entry, int side, const AugmentConfig& augment_cfg,
                      Rng& rng, int radial_bins) {
  try {
    Sample sample = prepare_from_image(decode_image_file(entry.path), side, augment_cfg, rng,
                                       radial_bins);
    sample.label = entry.label;
    return sample;
  } catch (const Error& e) {
    // Some imaging errors already carry the path; don't stutter it.
    if (e.message().rfind(entry.path, 0) == 0) throw;
    fail(e.kind(), entry.path + ": " + e.message());
  }
}

void FixtureSpec::validate() const {
  if (count_per_class < 1) fail(ErrorKind::InvalidSpec, "count_per_class must be at least 1");
  if (side < kMinImageSide) {
    fail(ErrorKind::InvalidSpec,
         "fixture side must be at least " + std::to_string(kMinImageSide));
  }
  if (spectral_slope < 0.0) fail(ErrorKind::InvalidSpec, "spectral_slope must be nonnegative");
  if (!(band_lo >= 0.0 && band_lo < band_hi && band_hi <= 1.0)) {
    fail(ErrorKind::InvalidSpec, "band must satisfy 0 <= lo < hi <= 1");
  }
  if (band_gain < 1.0) fail(ErrorKind::InvalidSpec, "band_gain must be at least 1");
}

namespace {

// Pixel contrast of the real class; fixed so the two classes share one
// affine rendering and keep their spectral difference.
constexpr double kFixtureStd = 0.07;

// Amplitude table for one class, indexed like the unshifted FFT grid.
std::vector<double> amplitude_table(const FixtureSpec& spec, bool boosted) {
  const int n = spec.side;
  const int uc = n / 2;
  const double r_max = std::sqrt(static_cast<double>(uc) * uc + static_cast<double>(uc) * uc);
  std::vector<double> amp(static_cast<size_t>(n) * n);
  for (int u = 0; u < n; ++u) {
    const int fu = u <= (n - 1) / 2 ? u : u - n;  // signed frequency
    for (int v = 0; v < n; ++v) {
      const int fv = v <= (n - 1) / 2 ? v : v - n;
      const double rho_pix = std::sqrt(static_cast<double>(fu) * fu + static_cast<double>(fv) * fv);
      double a = rho_pix == 0.0 ? 0.0 : std::pow(rho_pix, -spec.spectral_slope);
      if (boosted) {
        const double rho = rho_pix / r_max;  // matches the radial-profile geometry
        if (rho >= spec.band_lo && rho <= spec.band_hi) a *= spec.band_gain;
      }
      amp[static_cast<size_t>(u) * n + v] = a;
    }
  }
  return amp;
}

ImageRGB render_fixture(const FixtureSpec& spec, const std::vector<double>& amp, double scale,
                        Rng& rng) {
  const int n = spec.side;
  ComplexGrid grid(n, n);

  // Random phases with Hermitian symmetry so the inverse transform is real.
  // Raster order, one draw per asymmetric pair, keeps this deterministic.
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      const int mu = (n - u) % n;
      const int mv = (n - v) % n;
      if (std::pair(u, v) > std::pair(mu, mv)) continue;  // partner already set
      const double a = amp[static_cast<size_t>(u) * n + v];
      if (u == mu && v == mv) {
        grid.at(u, v) = Complex(a, 0.0);  // self-conjugate bins must be real
        continue;
      }
      const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
      grid.at(u, v) = std::polar(a, phi);
      grid.at(mu, mv) = std::polar(a, -phi);
    }
  }

  const ComplexGrid field = fft2d(grid, FftDirection::kInverse);
  ImageRGB img(n, n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double value =
          std::clamp(0.5 + scale * field.at(y, x).real(), 0.0, 1.0);
      img.at(y, x, 0) = value;
      img.at(y, x, 1) = value;
      img.at(y, x, 2) = value;
    }
  }
  return img;
}

}  // namespace

DatasetManifest make_fixtures(const FixtureSpec& spec, const std::string& out_dir) {
  spec.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    fail(ErrorKind::IoFailure, "cannot create directory " + out_dir + ": " + ec.message());
  }

  const std::vector<double> real_amp = amplitude_table(spec, false);
  const std::vector<double> syn_amp = amplitude_table(spec, true);

  // Fixed rendering scale from the real-class spectrum: the field's variance
  // is sum(|F|^2) / (H*W)^2, so one scale hits the target contrast and the
  // band boost stays visible in the synthetic class.
  double energy = 0.0;
  for (const double a : real_amp) energy += a * a;
  const double field_std = std::sqrt(energy) / (static_cast<double>(spec.side) * spec.side);
  const double scale = field_std > 0.0 ? kFixtureStd / field_std : 0.0;

  std::vector<ManifestEntry> entries;
  for (int label = 0; label < 2; ++label) {
    const std::vector<double>& amp = label == 0 ? real_amp : syn_amp;
    for (int i = 0; i < spec.count_per_class; ++i) {
      Rng rng = Rng::derive(spec.seed, static_cast<uint64_t>(label), static_cast<uint64_t>(i),
                            detail::kFixtureStream);
      const ImageRGB img = render_fixture(spec, amp, scale, rng);
      const std::string name = std::string(label_name(label)) + "_" + std::to_string(i) + ".ppm";
      const std::string path = (std::filesystem::path(out_dir) / name).string();
      write_ppm_file(path, img);
      entries.push_back({path, label, Split::kTrain});
    }
  }

  DatasetManifest manifest = make_split(std::move(entries), SplitRatios{}, spec.seed);
  save_manifest_csv(manifest, (std::filesystem::path(out_dir) / "manifest.csv").string());
  return manifest;
}

}  // namespace freqcross
