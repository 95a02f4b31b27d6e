#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "freqcross/datapipe.hpp"
#include "freqcross/error.hpp"
#include "freqcross/model.hpp"
#include "freqcross/perturb.hpp"

namespace freqcross {

// Scores with ground truth, the input to every metric here.
struct ScoredSet {
  std::vector<double> scores;  // probabilities in [0, 1]
  std::vector<int> labels;     // 0 = real, 1 = synthetic

  void validate() const;  // EmptySet / LengthMismatch / InvalidSpec
  int64_t size() const { return static_cast<int64_t>(scores.size()); }
  int64_t positives() const;
  int64_t negatives() const;
};

struct ConfusionMatrix {
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t tn = 0;
  int64_t fn = 0;

  int64_t total() const { return tp + fp + tn + fn; }
};

// Predict synthetic iff score >= threshold.
ConfusionMatrix confusion_at(const ScoredSet& set, double threshold);

// Ratios with 0/0 cases reported as value 0 and flagged, never thrown.
struct BasicMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_defined = true;
  bool recall_defined = true;
  bool f1_defined = true;
};

BasicMetrics basic_metrics(const ConfusionMatrix& cm);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // (0,0) anchor first, (1,1) last
  double auc = 0.0;
};

// Threshold sweep over the distinct scores, ties grouped; trapezoid area,
// which matches the Mann-Whitney statistic with half credit for ties. The
// (0,0) anchor carries an infinite threshold (nothing predicted positive).
RocCurve roc_auc(const ScoredSet& set);  // SingleClass

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
  double threshold = 0.0;
};

struct PrCurve {
  std::vector<PrPoint> points;
  double auc = 0.0;
};

// Same threshold sweep; area by the step rule (a rectangle per recall
// increment), with the recall-0 point taking the top score group's
// precision. Steps avoid the optimistic linear interpolation.
PrCurve pr_auc(const ScoredSet& set);  // NoPositives

// Uniform score bins over [0, 1], split by correctness at threshold 0.5;
// a score of exactly 1.0 lands in the last bin.
struct ConfidenceHistogram {
  int bins = 0;
  std::vector<int64_t> correct;
  std::vector<int64_t> incorrect;
};

ConfidenceHistogram confidence_histogram(const ScoredSet& set, int bins);

// Top-2 PCA of feature vectors (one per row), for the fusion-layer scatter
// plot. Deterministic power iteration with deflation: fixed all-ones unit
// start, 1000 iterations or 1e-10 convergence, and each component's
// largest-magnitude coordinate made positive.
struct Pca2Result {
  std::vector<std::array<double, 2>> coords;
  std::array<double, 2> explained{0.0, 0.0};  // variance fractions
};

Pca2Result pca2(const std::vector<std::vector<double>>& features);

// Everything scalar about one scored set at one threshold.
struct MetricsReport {
  double threshold = 0.5;
  ConfusionMatrix confusion;
  BasicMetrics basics;
  RocCurve roc;
  PrCurve pr;
};

MetricsReport evaluate_scores(const ScoredSet& set, double threshold = 0.5);

// --- artifacts -------------------------------------------------------------

void write_roc_csv(const std::string& path, const RocCurve& curve);
void write_pr_csv(const std::string& path, const PrCurve& curve);
void write_confusion_csv(const std::string& path, const ConfusionMatrix& cm);
void write_confidence_hist_csv(const std::string& path, const ConfidenceHistogram& hist);
void write_pca_csv(const std::string& path, const Pca2Result& pca, const std::vector<int>& labels);
void write_metrics_json(const std::string& path, const MetricsReport& report);

// --- robustness sweep ------------------------------------------------------

struct RobustnessRow {
  std::string name;
  double accuracy = 0.0;
  double drop = 0.0;  // clean accuracy minus this row's accuracy
};

void write_robustness_csv(const std::string& path, const std::vector<RobustnessRow>& rows);

namespace detail {
inline constexpr uint64_t kPerturbStream = 105;

template <typename T>
double accuracy_over_entries(Model<T>& model, const DatasetManifest& manifest,
                             const std::vector<int64_t>& indices,
                             const std::vector<ImageRGB>& decoded, const PerturbSpec* spec,
                             uint64_t seed, uint64_t spec_index) {
  AugmentConfig no_augment;
  no_augment.enabled = false;

  std::vector<Sample> samples(decoded.size());
  parallel_for(static_cast<int64_t>(decoded.size()), [&](int64_t i) {
    ImageRGB img = decoded[static_cast<size_t>(i)];
    if (spec != nullptr) {
      Rng prng = Rng::derive(seed, spec_index, static_cast<uint64_t>(i), kPerturbStream);
      img = perturb(img, *spec, prng);
    }
    Rng unused(0);
    Sample s = prepare_from_image(img, model.config.input_side, no_augment, unused,
                                  model.config.radial_bins);
    s.label = manifest.entries[static_cast<size_t>(indices[static_cast<size_t>(i)])].label;
    samples[static_cast<size_t>(i)] = std::move(s);
  });

  int64_t correct = 0;
  constexpr size_t kChunk = 32;
  for (size_t start = 0; start < samples.size(); start += kChunk) {
    const size_t end = std::min(samples.size(), start + kChunk);
    const std::vector<Sample> chunk(samples.begin() + static_cast<int64_t>(start),
                                    samples.begin() + static_cast<int64_t>(end));
    const SampleBatch<T> batch = pack_batch<T>(chunk);
    Rng fwd_rng(0);  // eval mode never consults it
    const ForwardResult<T> out =
        forward<T>(nullptr, model, batch.rgb, batch.spectrum, batch.profile, false, fwd_rng);
    for (size_t n = 0; n < chunk.size(); ++n) {
      const bool predicted = out.p.values()[n] >= T(0.5);
      correct += predicted == (chunk[n].label == 1) ? 1 : 0;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}
}  // namespace detail

// Accuracy of the model on the perturbed test split, one row per spec plus
// the leading clean row. Images are decoded once and re-perturbed per spec;
// each (spec, image) pair draws from its own derived stream, so results do
// not depend on scheduling. Row order follows the spec list.
template <typename T>
std::vector<RobustnessRow> robustness_sweep(Model<T>& model, const DatasetManifest& manifest,
                                            const std::vector<PerturbSpec>& specs, uint64_t seed) {
  for (const PerturbSpec& spec : specs) spec.validate();
  const std::vector<int64_t> indices = manifest.split_indices(Split::kTest);
  if (indices.empty()) fail(ErrorKind::EmptySplit, "split test has no entries");

  std::vector<ImageRGB> decoded(indices.size());
  parallel_for(static_cast<int64_t>(indices.size()), [&](int64_t i) {
    decoded[static_cast<size_t>(i)] =
        decode_image_file(manifest.entries[static_cast<size_t>(indices[static_cast<size_t>(i)])].path);
  });

  std::vector<RobustnessRow> rows;
  const double clean =
      detail::accuracy_over_entries<T>(model, manifest, indices, decoded, nullptr, seed, 0);
  rows.push_back({"clean", clean, 0.0});
  for (size_t k = 0; k < specs.size(); ++k) {
    const double acc = detail::accuracy_over_entries<T>(model, manifest, indices, decoded,
                                                        &specs[k], seed, k + 1);
    rows.push_back({specs[k].name(), acc, clean - acc});
  }
  return rows;
}

}  // namespace freqcross
