#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "freqcross/bytes.hpp"
#include "freqcross/datapipe.hpp"
#include "freqcross/fft.hpp"
#include "freqcross/spectrum.hpp"

using namespace freqcross;

namespace {

// Fresh directory for on-disk cases; removed again on scope exit.
struct ScopedDir {
  std::filesystem::path path;

  explicit ScopedDir(const std::string& name) : path(name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~ScopedDir() { std::filesystem::remove_all(path); }

  std::string file(const std::string& name) const { return (path / name).string(); }
};

DatasetManifest load_csv_text(const ScopedDir& dir, const std::string& text) {
  const std::string path = dir.file("m.csv");
  write_file_bytes(path, text);
  return load_manifest(path, ManifestFormat::kCsv);
}

DatasetManifest load_jsonl_text(const ScopedDir& dir, const std::string& text) {
  const std::string path = dir.file("m.jsonl");
  write_file_bytes(path, text);
  return load_manifest(path, ManifestFormat::kJsonl);
}

std::vector<ManifestEntry> labeled_entries(int n_real, int n_syn) {
  std::vector<ManifestEntry> entries;
  for (int i = 0; i < n_real; ++i) entries.push_back({"real_" + std::to_string(i), 0, Split::kTrain});
  for (int i = 0; i < n_syn; ++i) entries.push_back({"syn_" + std::to_string(i), 1, Split::kTrain});
  return entries;
}

ImageRGB random_image(int h, int w, uint64_t seed) {
  ImageRGB img(h, w);
  Rng rng(seed);
  for (double& v : img.data) v = rng.uniform();
  return img;
}

ImageRGB constant_image(int h, int w, double value) {
  ImageRGB img(h, w);
  for (double& v : img.data) v = value;
  return img;
}

ImageRGB image_from_planar(const Sample& s) {
  ImageRGB img(s.side, s.side);
  const int64_t plane = static_cast<int64_t>(s.side) * s.side;
  for (int y = 0; y < s.side; ++y) {
    for (int x = 0; x < s.side; ++x) {
      for (int c = 0; c < 3; ++c) {
        img.at(y, x, c) = s.rgb[static_cast<size_t>(c * plane + y * s.side + x)];
      }
    }
  }
  return img;
}

bool same_values(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin());
}

template <typename T>
bool same_tensor(const Tensor<T>& a, const Tensor<T>& b) {
  return a.shape() == b.shape() &&
         std::equal(a.values().begin(), a.values().end(), b.values().begin());
}

double batch_checksum(const SampleBatch<double>& b) {
  double sum = 0.0;
  for (const double v : b.rgb.values()) sum += v;
  for (const double v : b.spectrum.values()) sum += v;
  for (const double v : b.profile.values()) sum += v;
  for (const double v : b.labels) sum += v;
  return sum;
}

// Count-weighted mean of profile energy over a set of bins.
double banded_mean(const RadialProfile& p, int lo_bin, int hi_bin) {
  double sum = 0.0;
  int64_t count = 0;
  for (int k = lo_bin; k <= hi_bin; ++k) {
    sum += p.energy[static_cast<size_t>(k)] * static_cast<double>(p.bin_counts[static_cast<size_t>(k)]);
    count += p.bin_counts[static_cast<size_t>(k)];
  }
  return sum / static_cast<double>(count);
}

RadialProfile profile_of_file(const std::string& path, int n_bins) {
  const ImageRGB img = decode_image_file(path);
  const MagnitudeSpectrum mag = magnitude(fft2d(to_grayscale(img)), /*centered=*/true);
  return radial_profile(mag, n_bins);
}

}  // namespace

TEST_CASE("split and label vocabulary round-trips") {
  CHECK(parse_split("train") == Split::kTrain);
  CHECK(parse_split("val") == Split::kVal);
  CHECK(parse_split("test") == Split::kTest);
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest}) CHECK(parse_split(split_name(s)) == s);

  CHECK(parse_label("0") == 0);
  CHECK(parse_label("1") == 1);
  CHECK(std::string(label_name(0)) == "real");
  CHECK(std::string(label_name(1)) == "synthetic");

  try {
    parse_split("validation");
    FAIL("expected UnknownSplit");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownSplit);
  }
  try {
    parse_label("real");
    FAIL("expected UnknownLabel");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownLabel);
  }
}

TEST_CASE("manifest csv loads rows and counts them per split and class") {
  ScopedDir dir("dp_csv");
  const DatasetManifest m = load_csv_text(dir,
                                          "path,label,split\n"
                                          "imgs/a.ppm,1,train\n"
                                          "imgs/b.ppm,0,train\r\n"  // CRLF tolerated
                                          "\n"
                                          "imgs/c.ppm,0,val\n"
                                          "imgs/d.ppm,1,test\n");
  REQUIRE(m.entries.size() == 4);
  CHECK(m.entries[0].path == "imgs/a.ppm");
  CHECK(m.entries[0].label == 1);
  CHECK(m.entries[0].split == Split::kTrain);
  CHECK(m.entries[1].path == "imgs/b.ppm");
  CHECK(m.count(Split::kTrain, 1) == 1);
  CHECK(m.count(Split::kTrain, 0) == 1);
  CHECK(m.split_size(Split::kTrain) == 2);
  CHECK(m.split_size(Split::kVal) == 1);
  CHECK(m.split_indices(Split::kVal) == std::vector<int64_t>{2});
}

TEST_CASE("manifest csv rejects malformed rows with their line number") {
  ScopedDir dir("dp_csv_bad");
  CHECK_THROWS_WITH_AS(load_csv_text(dir, "path;label;split\n"),
                       doctest::Contains("header"), Error);
  CHECK_THROWS_WITH_AS(load_csv_text(dir, "path,label,split\na.ppm,1\n"),
                       doctest::Contains("line 2"), Error);
  CHECK_THROWS_WITH_AS(load_csv_text(dir, "path,label,split\na.ppm,1,train,extra\n"),
                       doctest::Contains("3 comma-separated"), Error);
  CHECK_THROWS_WITH_AS(load_csv_text(dir, "path,label,split\n,1,train\n"),
                       doctest::Contains("path is empty"), Error);

  // Blank lines are skipped but still counted for error reporting.
  try {
    load_csv_text(dir, "path,label,split\n\na.ppm,1,train\nb.ppm,2,train\n");
    FAIL("expected UnknownLabel");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownLabel);
    CHECK(e.message().find("line 4") != std::string::npos);
  }
  try {
    load_csv_text(dir, "path,label,split\na.ppm,1,dev\n");
    FAIL("expected UnknownSplit");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownSplit);
  }
  try {
    load_csv_text(dir, "path,label,split\na.ppm,1,train\nb.ppm,0,val\na.ppm,0,test\n");
    FAIL("expected DuplicatePath");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DuplicatePath);
    CHECK(e.message().find("line 4") != std::string::npos);
    CHECK(e.message().find("first at line 2") != std::string::npos);
  }
}

TEST_CASE("manifest jsonl loads strict objects") {
  ScopedDir dir("dp_jsonl");
  const DatasetManifest m = load_jsonl_text(dir,
                                            "{\"path\":\"x.ppm\",\"label\":1,\"split\":\"train\"}\n"
                                            "{\"path\":\"y.ppm\",\"label\":0,\"split\":\"val\"}\n");
  REQUIRE(m.entries.size() == 2);
  CHECK(m.entries[0].path == "x.ppm");
  CHECK(m.entries[0].label == 1);
  CHECK(m.entries[1].split == Split::kVal);

  CHECK_THROWS_WITH_AS(
      load_jsonl_text(dir, "{\"path\":\"z\",\"label\":1,\"split\":\"train\",\"extra\":4}\n"),
      doctest::Contains("unknown key"), Error);
  CHECK_THROWS_WITH_AS(load_jsonl_text(dir, "{\"path\":\"z\",\"label\":\"1\",\"split\":\"train\"}\n"),
                       doctest::Contains("integer"), Error);
  CHECK_THROWS_WITH_AS(load_jsonl_text(dir, "[1,2]\n"), doctest::Contains("object"), Error);
  CHECK_THROWS_WITH_AS(load_jsonl_text(dir, "{broken\n"), doctest::Contains("object"), Error);
  try {
    load_jsonl_text(dir, "{\"path\":\"z\",\"label\":7,\"split\":\"train\"}\n");
    FAIL("expected UnknownLabel");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownLabel);
  }
  try {
    load_jsonl_text(dir,
                    "{\"path\":\"z\",\"label\":1,\"split\":\"train\"}\n"
                    "{\"path\":\"z\",\"label\":0,\"split\":\"val\"}\n");
    FAIL("expected DuplicatePath");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DuplicatePath);
  }
}

TEST_CASE("manifest csv save/load round-trips") {
  ScopedDir dir("dp_roundtrip");
  DatasetManifest m;
  m.entries = {{"p/one.ppm", 1, Split::kTrain},
               {"p/two.ppm", 0, Split::kVal},
               {"p/three.ppm", 0, Split::kTest}};
  const std::string path = dir.file("saved.csv");
  save_manifest_csv(m, path);
  const DatasetManifest back = load_manifest(path, ManifestFormat::kCsv);
  REQUIRE(back.entries.size() == m.entries.size());
  for (size_t i = 0; i < m.entries.size(); ++i) {
    CHECK(back.entries[i].path == m.entries[i].path);
    CHECK(back.entries[i].label == m.entries[i].label);
    CHECK(back.entries[i].split == m.entries[i].split);
  }
}

TEST_CASE("stratified split apportions each class by largest remainder") {
  // 10 per class at 0.7/0.15/0.15: quotas 7/1.5/1.5, the leftover goes to
  // val then test (equal remainders keep the train, val, test order).
  const DatasetManifest m = make_split(labeled_entries(10, 10), SplitRatios{}, 1);
  for (int label : {0, 1}) {
    CHECK(m.count(Split::kTrain, label) == 7);
    CHECK(m.count(Split::kVal, label) == 2);
    CHECK(m.count(Split::kTest, label) == 1);
  }
  CHECK(m.split_size(Split::kTrain) == 14);

  // Entry order is untouched; only the split field is assigned.
  const std::vector<ManifestEntry> input = labeled_entries(10, 10);
  for (size_t i = 0; i < input.size(); ++i) {
    CHECK(m.entries[i].path == input[i].path);
    CHECK(m.entries[i].label == input[i].label);
  }

  // Exact ratios stay exact per class.
  const DatasetManifest big = make_split(labeled_entries(100, 60), SplitRatios{}, 9);
  CHECK(big.count(Split::kTrain, 0) == 70);
  CHECK(big.count(Split::kVal, 0) == 15);
  CHECK(big.count(Split::kTest, 0) == 15);
  CHECK(big.count(Split::kTrain, 1) == 42);
  CHECK(big.count(Split::kVal, 1) == 9);
  CHECK(big.count(Split::kTest, 1) == 9);

  const DatasetManifest all_train = make_split(labeled_entries(5, 5), SplitRatios{1.0, 0.0, 0.0}, 1);
  CHECK(all_train.split_size(Split::kTrain) == 10);
}

TEST_CASE("stratified split is a pure function of seed") {
  const std::vector<ManifestEntry> entries = labeled_entries(12, 12);
  const DatasetManifest a = make_split(entries, SplitRatios{}, 7);
  const DatasetManifest b = make_split(entries, SplitRatios{}, 7);
  const DatasetManifest c = make_split(entries, SplitRatios{}, 8);
  bool same_ab = true;
  bool same_ac = true;
  for (size_t i = 0; i < entries.size(); ++i) {
    same_ab = same_ab && a.entries[i].split == b.entries[i].split;
    same_ac = same_ac && a.entries[i].split == c.entries[i].split;
  }
  CHECK(same_ab);
  CHECK_FALSE(same_ac);
}

TEST_CASE("stratified split rejects bad ratios and degenerate classes") {
  CHECK_THROWS_WITH_AS(make_split(labeled_entries(2, 2), SplitRatios{0.5, 0.5, 0.1}, 1),
                       doctest::Contains("sum to 1"), Error);
  CHECK_THROWS_WITH_AS(make_split(labeled_entries(2, 2), SplitRatios{1.2, -0.2, 0.0}, 1),
                       doctest::Contains("nonnegative"), Error);
  try {
    make_split(labeled_entries(4, 0), SplitRatios{}, 1);
    FAIL("expected EmptyClass");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyClass);
    CHECK(e.message().find("synthetic") != std::string::npos);
  }
  std::vector<ManifestEntry> bad = labeled_entries(2, 2);
  bad[1].label = 3;
  try {
    make_split(bad, SplitRatios{}, 1);
    FAIL("expected UnknownLabel");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownLabel);
  }
}

TEST_CASE("batch plan covers the split once and reshuffles only train") {
  DatasetManifest m;
  for (int i = 0; i < 10; ++i) m.entries.push_back({"t" + std::to_string(i), i % 2, Split::kTrain});
  m.entries[1].split = Split::kVal;
  m.entries[3].split = Split::kVal;
  m.entries[5].split = Split::kVal;

  const auto train0 = batch_plan(m, Split::kTrain, 4, 5, 0);
  REQUIRE(train0.size() == 2);
  CHECK(train0[0].size() == 4);
  CHECK(train0[1].size() == 3);

  // Every train index appears exactly once per epoch.
  std::vector<int64_t> seen;
  for (const auto& batch : train0) seen.insert(seen.end(), batch.begin(), batch.end());
  std::sort(seen.begin(), seen.end());
  CHECK(seen == std::vector<int64_t>{0, 2, 4, 6, 7, 8, 9});

  // Same (seed, epoch) replays the plan; a new epoch or seed reorders it.
  CHECK(batch_plan(m, Split::kTrain, 4, 5, 0) == train0);
  CHECK(batch_plan(m, Split::kTrain, 4, 5, 1) != train0);
  CHECK(batch_plan(m, Split::kTrain, 4, 6, 0) != train0);

  // Val keeps manifest order regardless of seed or epoch.
  const auto val = batch_plan(m, Split::kVal, 2, 5, 3);
  REQUIRE(val.size() == 2);
  CHECK(val[0] == std::vector<int64_t>{1, 3});
  CHECK(val[1] == std::vector<int64_t>{5});

  CHECK_THROWS_AS(batch_plan(m, Split::kTrain, 0, 5, 0), Error);
  try {
    batch_plan(m, Split::kTest, 4, 5, 0);
    FAIL("expected EmptySplit");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptySplit);
    CHECK(e.message().find("test") != std::string::npos);
  }
}

TEST_CASE("preparing a constant image isolates everything in the DC bin") {
  AugmentConfig aug;
  aug.enabled = false;
  Rng rng(1);
  const Sample s = prepare_from_image(constant_image(16, 16, 0.5), 16, aug, rng, 8);

  REQUIRE(s.side == 16);
  REQUIRE(s.e.size() == 8);
  REQUIRE(s.m_log.size() == 256);
  REQUIRE(s.rgb.size() == 3 * 256);
  for (const double v : s.rgb) CHECK(v == 0.5);

  // All spectral energy sits at DC, which lands in bin 0 after centering.
  CHECK(s.e[0] > 0.1);
  for (size_t k = 1; k < s.e.size(); ++k) CHECK(std::abs(s.e[k]) < 1e-9);

  // The z-scored log map has one large positive spike at the center and a
  // shared small negative value everywhere else.
  const double center = s.m_log[8 * 16 + 8];
  CHECK(center > 3.0);
  for (int u = 0; u < 16; ++u) {
    for (int v = 0; v < 16; ++v) {
      if (u == 8 && v == 8) continue;
      const double z = s.m_log[static_cast<size_t>(u) * 16 + v];
      CHECK(z < 0.0);
      CHECK(std::abs(z - s.m_log[0]) < 1e-9);
    }
  }
}

TEST_CASE("prepared spectrum views derive from the augmented pixels") {
  const ImageRGB src = random_image(24, 24, 33);
  AugmentConfig aug;  // enabled: flips, rotation, jitter all live
  Rng rng = Rng::derive(9, 0, 0, 1);
  const Sample s = prepare_from_image(src, 16, aug, rng, 6);

  // Recomputing both views from the stored pixels must agree bit for bit;
  // anything else would mean the branches see different images.
  const ImageRGB seen = image_from_planar(s);
  const MagnitudeSpectrum mag = magnitude(fft2d(to_grayscale(seen)), /*centered=*/true);
  CHECK(same_values(s.m_log, log_normalize(mag).data));
  CHECK(same_values(s.e, radial_profile(mag, 6, /*log_energy=*/true).energy));
}

TEST_CASE("preparation is deterministic given the derived stream") {
  const ImageRGB src = random_image(20, 20, 4);
  AugmentConfig aug;

  Rng r1 = Rng::derive(9, 2, 5, 0);
  Rng r2 = Rng::derive(9, 2, 5, 0);
  const Sample a = prepare_from_image(src, 16, aug, r1, 5);
  const Sample b = prepare_from_image(src, 16, aug, r2, 5);
  CHECK(same_values(a.rgb, b.rgb));
  CHECK(same_values(a.m_log, b.m_log));
  CHECK(same_values(a.e, b.e));

  Rng r3 = Rng::derive(9, 2, 6, 0);
  const Sample c = prepare_from_image(src, 16, aug, r3, 5);
  CHECK_FALSE(same_values(a.rgb, c.rgb));

  // With augmentation off the stream is never consulted.
  aug.enabled = false;
  Rng r4 = Rng::derive(1, 0, 0, 0);
  Rng r5 = Rng::derive(2, 0, 0, 0);
  const Sample d = prepare_from_image(src, 16, aug, r4, 5);
  const Sample e = prepare_from_image(src, 16, aug, r5, 5);
  CHECK(same_values(d.rgb, e.rgb));
  CHECK(same_values(d.m_log, e.m_log));
}

TEST_CASE("prepare_sample names the file when reading fails") {
  ScopedDir dir("dp_badfiles");
  AugmentConfig aug;
  aug.enabled = false;
  Rng rng(1);

  const ManifestEntry missing{dir.file("absent.ppm"), 0, Split::kTrain};
  try {
    prepare_sample(missing, 16, aug, rng, 5);
    FAIL("expected IoFailure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IoFailure);
    CHECK(e.message().find("absent.ppm") != std::string::npos);
  }

  write_file_bytes(dir.file("noise.bin"), "definitely not an image");
  const ManifestEntry garbage{dir.file("noise.bin"), 0, Split::kTrain};
  try {
    prepare_sample(garbage, 16, aug, rng, 5);
    FAIL("expected UnsupportedFormat");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnsupportedFormat);
    CHECK(e.message().find("noise.bin") != std::string::npos);
    // The path appears once even though the decoder already included it.
    CHECK(e.message().find("noise.bin") == e.message().rfind("noise.bin"));
  }
}

TEST_CASE("pack_batch stacks samples into model-shaped tensors") {
  std::vector<Sample> samples(2);
  for (int n = 0; n < 2; ++n) {
    Sample& s = samples[static_cast<size_t>(n)];
    s.side = 8;
    s.label = n;
    s.rgb.resize(3 * 64);
    s.m_log.resize(64);
    s.e.resize(4);
    for (size_t i = 0; i < s.rgb.size(); ++i) s.rgb[i] = n + 0.001 * static_cast<double>(i);
    for (size_t i = 0; i < s.m_log.size(); ++i) s.m_log[i] = n - 0.002 * static_cast<double>(i);
    for (size_t i = 0; i < s.e.size(); ++i) s.e[i] = 0.1 * static_cast<double>(i) + n;
  }

  const SampleBatch<float> b = pack_batch<float>(samples);
  CHECK(b.rgb.shape() == std::vector<int>{2, 3, 8, 8});
  CHECK(b.spectrum.shape() == std::vector<int>{2, 1, 8, 8});
  CHECK(b.profile.shape() == std::vector<int>{2, 4});
  REQUIRE(b.labels.size() == 2);
  CHECK(b.labels[0] == 0.0f);
  CHECK(b.labels[1] == 1.0f);

  // Spot-check the layout: sample 1, channel 2, pixel (3, 4).
  const size_t flat = ((1 * 3 + 2) * 8 + 3) * 8 + 4;
  CHECK(b.rgb.values()[flat] == doctest::Approx(1 + 0.001 * (2 * 64 + 3 * 8 + 4)));
  CHECK(b.profile.values()[5] == doctest::Approx(1.1));

  CHECK_THROWS_AS(pack_batch<float>({}), Error);
  samples[1].side = 4;
  samples[1].rgb.resize(3 * 16);
  samples[1].m_log.resize(16);
  try {
    pack_batch<float>(samples);
    FAIL("expected ShapeMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ShapeMismatch);
  }
}

TEST_CASE("make_batches prepares a real corpus deterministically") {
  ScopedDir dir("dp_corpus");
  DatasetManifest manifest;
  for (int i = 0; i < 10; ++i) {
    const std::string path = dir.file("img" + std::to_string(i) + ".ppm");
    write_ppm_file(path, random_image(12, 12, 100 + static_cast<uint64_t>(i)));
    Split split = Split::kTrain;
    if (i >= 6) split = i < 8 ? Split::kVal : Split::kTest;
    manifest.entries.push_back({path, i % 2, split});
  }

  PrepareOptions options;
  options.side = 12;
  options.radial_bins = 5;

  // Two identical calls agree bit for bit, with augmentation live.
  const auto epoch0 = make_batches<double>(manifest, Split::kTrain, 4, 5, 0, options);
  const auto again = make_batches<double>(manifest, Split::kTrain, 4, 5, 0, options);
  REQUIRE(epoch0.size() == 2);
  CHECK(epoch0[0].labels.size() == 4);
  CHECK(epoch0[1].labels.size() == 2);
  REQUIRE(again.size() == epoch0.size());
  for (size_t i = 0; i < epoch0.size(); ++i) {
    CHECK(same_tensor(epoch0[i].rgb, again[i].rgb));
    CHECK(same_tensor(epoch0[i].spectrum, again[i].spectrum));
    CHECK(same_tensor(epoch0[i].profile, again[i].profile));
    CHECK(epoch0[i].labels == again[i].labels);
  }

  // A new epoch redraws augmentations, so the content changes.
  const auto epoch1 = make_batches<double>(manifest, Split::kTrain, 4, 5, 1, options);
  CHECK(batch_checksum(epoch0[0]) + batch_checksum(epoch0[1]) !=
        batch_checksum(epoch1[0]) + batch_checksum(epoch1[1]));

  // The worker count must not leak into results.
  const int previous_cap = max_threads();
  set_max_threads(1);
  const auto serial = make_batches<double>(manifest, Split::kTrain, 4, 5, 0, options);
  set_max_threads(previous_cap);
  for (size_t i = 0; i < epoch0.size(); ++i) {
    CHECK(same_tensor(epoch0[i].rgb, serial[i].rgb));
    CHECK(same_tensor(epoch0[i].spectrum, serial[i].spectrum));
  }

  // Without augmentation each epoch holds the same sample set, reordered.
  options.augment.enabled = false;
  const auto plain0 = make_batches<double>(manifest, Split::kTrain, 4, 5, 0, options);
  const auto plain1 = make_batches<double>(manifest, Split::kTrain, 4, 5, 1, options);
  auto sample_sums = [](const std::vector<SampleBatch<double>>& batches) {
    std::vector<double> sums;
    for (const SampleBatch<double>& b : batches) {
      const int64_t stride = static_cast<int64_t>(b.rgb.size()) /
                             static_cast<int64_t>(b.labels.size());
      for (size_t n = 0; n < b.labels.size(); ++n) {
        double s = 0.0;
        for (int64_t i = 0; i < stride; ++i) {
          s += b.rgb.values()[static_cast<size_t>(static_cast<int64_t>(n) * stride + i)];
        }
        sums.push_back(s);
      }
    }
    return sums;
  };
  std::vector<double> sums0 = sample_sums(plain0);
  std::vector<double> sums1 = sample_sums(plain1);
  CHECK(sums0 != sums1);  // order differs
  std::sort(sums0.begin(), sums0.end());
  std::sort(sums1.begin(), sums1.end());
  CHECK(sums0 == sums1);  // same samples

  // Val ignores augmentation and keeps manifest order.
  const auto val = make_batches<double>(manifest, Split::kVal, 4, 5, 0, options);
  REQUIRE(val.size() == 1);
  AugmentConfig off;
  off.enabled = false;
  Rng unused(0);
  const Sample v0 = prepare_sample(manifest.entries[6], 12, off, unused, 5);
  const Sample v1 = prepare_sample(manifest.entries[7], 12, off, unused, 5);
  const SampleBatch<double> expected = pack_batch<double>({v0, v1});
  CHECK(same_tensor(val[0].rgb, expected.rgb));
  CHECK(same_tensor(val[0].spectrum, expected.spectrum));
  CHECK(same_tensor(val[0].profile, expected.profile));
  CHECK(val[0].labels == expected.labels);
}

TEST_CASE("fixture spec validation") {
  FixtureSpec spec;
  spec.validate();  // defaults are fine

  auto expect_invalid = [](FixtureSpec s) {
    try {
      s.validate();
      FAIL("expected InvalidSpec");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvalidSpec);
    }
  };
  FixtureSpec bad = spec;
  bad.count_per_class = 0;
  expect_invalid(bad);
  bad = spec;
  bad.side = 4;
  expect_invalid(bad);
  bad = spec;
  bad.band_lo = 0.5;
  bad.band_hi = 0.4;
  expect_invalid(bad);
  bad = spec;
  bad.band_gain = 0.5;
  expect_invalid(bad);
  bad = spec;
  bad.spectral_slope = -0.1;
  expect_invalid(bad);
}

TEST_CASE("fixture corpus writes a decodable, reproducible image set") {
  FixtureSpec spec;
  spec.count_per_class = 6;
  spec.side = 16;
  spec.seed = 7;

  ScopedDir dir_a("dp_fix_a");
  ScopedDir dir_b("dp_fix_b");
  const DatasetManifest made = make_fixtures(spec, dir_a.path.string());

  REQUIRE(made.entries.size() == 12);
  for (int i = 0; i < 6; ++i) CHECK(made.entries[static_cast<size_t>(i)].label == 0);
  for (int i = 6; i < 12; ++i) CHECK(made.entries[static_cast<size_t>(i)].label == 1);
  // 6 per class at 0.7/0.15/0.15 -> 4 train, 1 val, 1 test per class.
  for (int label : {0, 1}) {
    CHECK(made.count(Split::kTrain, label) == 4);
    CHECK(made.count(Split::kVal, label) == 1);
    CHECK(made.count(Split::kTest, label) == 1);
  }

  // The manifest on disk describes exactly the returned entries.
  const DatasetManifest loaded = load_manifest(dir_a.file("manifest.csv"), ManifestFormat::kCsv);
  REQUIRE(loaded.entries.size() == made.entries.size());
  for (size_t i = 0; i < made.entries.size(); ++i) {
    CHECK(loaded.entries[i].path == made.entries[i].path);
    CHECK(loaded.entries[i].label == made.entries[i].label);
    CHECK(loaded.entries[i].split == made.entries[i].split);
  }

  // Every file decodes at the requested size with a mid-gray mean.
  for (const ManifestEntry& entry : made.entries) {
    const ImageRGB img = decode_image_file(entry.path);
    REQUIRE(img.height == 16);
    REQUIRE(img.width == 16);
    double mean = 0.0;
    for (const double v : img.data) mean += v;
    mean /= static_cast<double>(img.data.size());
    CHECK(mean == doctest::Approx(0.5).epsilon(0.1));
  }

  // Regeneration is byte-identical, file by file.
  make_fixtures(spec, dir_b.path.string());
  for (const ManifestEntry& entry : made.entries) {
    const std::string name = std::filesystem::path(entry.path).filename().string();
    CHECK(read_file_bytes(dir_a.file(name)) == read_file_bytes(dir_b.file(name)));
  }
  CHECK(read_file_bytes(dir_a.file("manifest.csv")) != "");
}

TEST_CASE("fixture classes differ inside the boosted band and match outside") {
  FixtureSpec spec;
  spec.count_per_class = 10;
  spec.side = 32;
  spec.seed = 3;

  ScopedDir dir("dp_fix_band");
  const DatasetManifest made = make_fixtures(spec, dir.path.string());

  // With 10 bins, [0.1, 0.4] is exactly bins 1..3.
  const int n_bins = 10;
  std::vector<RadialProfile> real_profiles;
  std::vector<RadialProfile> syn_profiles;
  for (const ManifestEntry& entry : made.entries) {
    (entry.label == 0 ? real_profiles : syn_profiles)
        .push_back(profile_of_file(entry.path, n_bins));
  }
  REQUIRE(real_profiles.size() == 10);
  REQUIRE(syn_profiles.size() == 10);

  // Pairwise: every synthetic fixture out-boosts its real sibling in band.
  double real_in = 0.0;
  double syn_in = 0.0;
  double real_out = 0.0;
  double syn_out = 0.0;
  for (size_t i = 0; i < real_profiles.size(); ++i) {
    const double r = banded_mean(real_profiles[i], 1, 3);
    const double s = banded_mean(syn_profiles[i], 1, 3);
    CHECK(s > r);
    real_in += r;
    syn_in += s;
    real_out += banded_mean(real_profiles[i], 4, 9);
    syn_out += banded_mean(syn_profiles[i], 4, 9);
  }

  // In-band class means differ by far more than half; out of band they agree
  // to a few percent (only clamp and 8-bit quantization separate them).
  CHECK(syn_in / real_in > 1.5);
  CHECK(std::abs(syn_out - real_out) / real_out < 0.05);

  // The class report sees the same picture, bin by bin.
  const std::vector<ClassProfileRow> rows = class_profile_report(real_profiles, syn_profiles);
  REQUIRE(rows.size() == static_cast<size_t>(n_bins));
  double in_band_diff = 0.0;
  for (int k = 1; k <= 3; ++k) {
    CHECK(rows[static_cast<size_t>(k)].diff > 0.0);
    in_band_diff += rows[static_cast<size_t>(k)].diff / 3.0;
  }
  for (int k = 4; k < n_bins; ++k) {
    CHECK(std::abs(rows[static_cast<size_t>(k)].diff) < 0.25 * in_band_diff);
  }
  CHECK(rows[1].bin == 1);
  CHECK(rows[1].rho_mid == doctest::Approx(0.15));
}

TEST_CASE("unit band gain produces statistically identical classes") {
  FixtureSpec spec;
  spec.count_per_class = 6;
  spec.side = 32;
  spec.band_gain = 1.0;
  spec.seed = 11;

  ScopedDir dir("dp_fix_null");
  const DatasetManifest made = make_fixtures(spec, dir.path.string());

  double real_in = 0.0;
  double syn_in = 0.0;
  for (const ManifestEntry& entry : made.entries) {
    const double banded = banded_mean(profile_of_file(entry.path, 10), 1, 3);
    (entry.label == 0 ? real_in : syn_in) += banded;
  }
  // Amplitudes are identical by construction; only phases (and the rounding
  // they cause) differ between the classes.
  CHECK(std::abs(syn_in - real_in) / real_in < 0.02);
}
