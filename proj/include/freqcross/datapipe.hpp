#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "freqcross/augment.hpp"
#include "freqcross/image.hpp"
#include "freqcross/manifest.hpp"
#include "freqcross/parallel.hpp"
#include "freqcross/rng.hpp"
#include "freqcross/tensor.hpp"

namespace freqcross {

// One prepared training example: the three views the model's branches
// consume, all derived from the same decoded (and possibly augmented) image.
struct Sample {
  int side = 0;
  int label = 0;
  std::vector<double> rgb;    // planar (3, side, side), values in [0,1]
  std::vector<double> m_log;  // z-scored log magnitude spectrum, (side, side)
  std::vector<double> e;      // log1p radial energies, one per bin
};

// Resize to side x side, optionally augment (when cfg.enabled), then derive
// the spectrum views from the grayscale of the exact image the spatial
// branch will see.
Sample prepare_from_image(const ImageRGB& img, int side, const AugmentConfig& augment_cfg,
                          Rng& rng, int radial_bins);

// Same, starting from a manifest entry; imaging errors are rethrown with the
// path prefixed.
Sample prepare_sample(const ManifestEntry& entry, int side, const AugmentConfig& augment_cfg,
                      Rng& rng, int radial_bins);

// A packed batch, shaped for Model::forward.
template <typename T>
struct SampleBatch {
  Tensor<T> rgb;       // (B, 3, S, S)
  Tensor<T> spectrum;  // (B, 1, S, S)
  Tensor<T> profile;   // (B, bins)
  std::vector<T> labels;
};

template <typename T>
SampleBatch<T> pack_batch(const std::vector<Sample>& samples) {
  if (samples.empty()) fail(ErrorKind::EmptyInput, "cannot pack an empty batch");
  const int side = samples.front().side;
  const int bins = static_cast<int>(samples.front().e.size());
  const int batch = static_cast<int>(samples.size());

  SampleBatch<T> out;
  out.rgb = Tensor<T>({batch, 3, side, side});
  out.spectrum = Tensor<T>({batch, 1, side, side});
  out.profile = Tensor<T>({batch, bins});
  out.labels.resize(static_cast<size_t>(batch));
  const int64_t plane = static_cast<int64_t>(side) * side;
  for (int n = 0; n < batch; ++n) {
    const Sample& s = samples[static_cast<size_t>(n)];
    if (s.side != side || static_cast<int>(s.e.size()) != bins) {
      fail(ErrorKind::ShapeMismatch, "batch mixes differently prepared samples");
    }
    T* rgb_dst = out.rgb.data() + static_cast<int64_t>(n) * 3 * plane;
    for (size_t i = 0; i < s.rgb.size(); ++i) rgb_dst[i] = T(s.rgb[i]);
    T* spec_dst = out.spectrum.data() + static_cast<int64_t>(n) * plane;
    for (size_t i = 0; i < s.m_log.size(); ++i) spec_dst[i] = T(s.m_log[i]);
    T* prof_dst = out.profile.data() + static_cast<int64_t>(n) * bins;
    for (size_t i = 0; i < s.e.size(); ++i) prof_dst[i] = T(s.e[i]);
    out.labels[static_cast<size_t>(n)] = T(s.label);
  }
  return out;
}

struct PrepareOptions {
  int side = 224;
  int radial_bins = 30;
  AugmentConfig augment{};  // applied to the train split only
};

// Materializes one epoch of batches for a split. Train batches follow the
// (seed, epoch) shuffle and are augmented; val/test keep manifest order and
// are never augmented. Each sample draws from its own stream derived from
// (seed, epoch, manifest index), so worker scheduling cannot change results.
template <typename T>
std::vector<SampleBatch<T>> make_batches(const DatasetManifest& manifest, Split split,
                                         int batch_size, uint64_t seed, int64_t epoch,
                                         const PrepareOptions& options) {
  const std::vector<std::vector<int64_t>> plan =
      batch_plan(manifest, split, batch_size, seed, epoch);
  AugmentConfig aug = options.augment;
  if (split != Split::kTrain) aug.enabled = false;

  std::vector<SampleBatch<T>> out;
  out.reserve(plan.size());
  for (const std::vector<int64_t>& indices : plan) {
    std::vector<Sample> samples(indices.size());
    parallel_for(static_cast<int64_t>(indices.size()), [&](int64_t i) {
      const int64_t entry = indices[static_cast<size_t>(i)];
      Rng rng = Rng::derive(seed, static_cast<uint64_t>(epoch), static_cast<uint64_t>(entry),
                            detail::kSampleStream);
      samples[static_cast<size_t>(i)] = prepare_sample(
          manifest.entries[static_cast<size_t>(entry)], options.side, aug, rng,
          options.radial_bins);
    });
    out.push_back(pack_batch<T>(samples));
  }
  return out;
}

// --- fixture corpus --------------------------------------------------------

// Deterministic desk-scale corpus: both classes are random-phase fields with
// a 1/rho^slope amplitude spectrum; the synthetic class additionally boosts
// amplitudes whose normalized radius falls in [band_lo, band_hi] by
// band_gain before the inverse transform.
struct FixtureSpec {
  int count_per_class = 50;
  int side = 64;
  double spectral_slope = 1.0;
  double band_lo = 0.1;
  double band_hi = 0.4;
  double band_gain = 3.0;  // 1.0 makes the classes statistically identical
  uint64_t seed = 0;

  void validate() const;  // InvalidSpec
};

// Writes `<class>_<index>.ppm` files plus `manifest.csv` into out_dir and
// returns the manifest (stratified 70/15/15 via make_split on the same
// seed). Regeneration with a fixed spec is byte-identical.
DatasetManifest make_fixtures(const FixtureSpec& spec, const std::string& out_dir);

}  // namespace freqcross
