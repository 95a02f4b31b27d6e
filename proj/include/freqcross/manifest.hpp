#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "freqcross/error.hpp"

namespace freqcross {

enum class Split { kTrain, kVal, kTest };

const char* split_name(Split split);                // "train" / "val" / "test"
Split parse_split(const std::string& text);         // UnknownSplit
const char* label_name(int label);                  // 0 -> "real", 1 -> "synthetic"
int parse_label(const std::string& text);           // UnknownLabel

struct ManifestEntry {
  std::string path;
  int label = 0;  // 0 = real, 1 = synthetic
  Split split = Split::kTrain;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  int64_t count(Split split, int label) const;
  int64_t split_size(Split split) const;
  // Indices of a split's entries, in manifest order.
  std::vector<int64_t> split_indices(Split split) const;
};

enum class ManifestFormat { kCsv, kJsonl };

// CSV with header `path,label,split`, or JSONL with one object per line
// carrying the same keys. Row problems name the offending line.
DatasetManifest load_manifest(const std::string& path, ManifestFormat format);
void save_manifest_csv(const DatasetManifest& manifest, const std::string& path);

struct SplitRatios {
  double train = 0.7;
  double val = 0.15;
  double test = 0.15;
};

// Stratified assignment: each class is shuffled with its own stream derived
// from the seed and partitioned by the ratios using largest-remainder
// rounding (remainder ties go to the earlier split: train, then val, then
// test). Entry order in the result matches the input.
DatasetManifest make_split(std::vector<ManifestEntry> entries, const SplitRatios& ratios,
                           uint64_t seed);

// Batches of manifest indices for one split: the train split is reshuffled
// per (seed, epoch), val/test keep manifest order; a final short batch is
// kept. Sample preparation is layered on top by make_batches.
std::vector<std::vector<int64_t>> batch_plan(const DatasetManifest& manifest, Split split,
                                             int batch_size, uint64_t seed, int64_t epoch);

namespace detail {
// Tags keeping the derived RNG streams of different consumers disjoint.
inline constexpr uint64_t kSplitStream = 101;
inline constexpr uint64_t kShuffleStream = 102;
inline constexpr uint64_t kSampleStream = 103;
inline constexpr uint64_t kFixtureStream = 104;
}  // namespace detail

}  // namespace freqcross
