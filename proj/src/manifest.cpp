#include "freqcross/manifest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_map>

#include "json.hpp"

#include "freqcross/bytes.hpp"
#include "freqcross/csv.hpp"
#include "freqcross/rng.hpp"

namespace freqcross {

using nlohmann::json;

const char* split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    default: return "test";
  }
}

Split parse_split(const std::string& text) {
  if (text == "train") return Split::kTrain;
  if (text == "val") return Split::kVal;
  if (text == "test") return Split::kTest;
  fail(ErrorKind::UnknownSplit, "split must be train, val, or test, got \"" + text + "\"");
}

const char* label_name(int label) { return label == 0 ? "real" : "synthetic"; }

int parse_label(const std::string& text) {
  if (text == "0") return 0;
  if (text == "1") return 1;
  fail(ErrorKind::UnknownLabel, "label must be 0 (real) or 1 (synthetic), got \"" + text + "\"");
}

int64_t DatasetManifest::count(Split split, int label) const {
  int64_t n = 0;
  for (const ManifestEntry& e : entries) {
    if (e.split == split && e.label == label) ++n;
  }
  return n;
}

int64_t DatasetManifest::split_size(Split split) const {
  int64_t n = 0;
  for (const ManifestEntry& e : entries) n += e.split == split ? 1 : 0;
  return n;
}

std::vector<int64_t> DatasetManifest::split_indices(Split split) const {
  std::vector<int64_t> out;
  for (size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].split == split) out.push_back(static_cast<int64_t>(i));
  }
  return out;
}

namespace {

[[noreturn]] void bad_row(int64_t line, const std::string& detail) {
  fail(ErrorKind::MalformedRow, "line " + std::to_string(line) + ": " + detail);
}

// Splits file content into lines, tolerating a trailing newline and CRLF.
std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    if (end == text.size()) break;
    start = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

// Rewraps label/split parse errors so they carry the line number.
template <typename Fn>
auto with_line(int64_t line, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    fail(e.kind(), "line " + std::to_string(line) + ": " + e.message());
  }
}

struct DuplicateGuard {
  std::unordered_map<std::string, int64_t> first_line;

  void check(const std::string& path, int64_t line) {
    auto [it, fresh] = first_line.emplace(path, line);
    if (!fresh) {
      fail(ErrorKind::DuplicatePath, "line " + std::to_string(line) + ": duplicate path \"" +
                                         path + "\" (first at line " +
                                         std::to_string(it->second) + ")");
    }
  }
};

DatasetManifest load_csv(const std::vector<std::string>& lines) {
  if (lines.empty() || lines[0] != "path,label,split") {
    bad_row(1, "header must be exactly \"path,label,split\"");
  }
  DatasetManifest manifest;
  DuplicateGuard seen;
  for (size_t i = 1; i < lines.size(); ++i) {
    const int64_t line_no = static_cast<int64_t>(i) + 1;
    const std::string& line = lines[i];
    if (line.empty()) continue;
    const size_t c1 = line.find(',');
    const size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos ||
        line.find(',', c2 + 1) != std::string::npos) {
      bad_row(line_no, "expected 3 comma-separated fields");
    }
    ManifestEntry entry;
    entry.path = line.substr(0, c1);
    if (entry.path.empty()) bad_row(line_no, "path is empty");
    entry.label = with_line(line_no, [&] { return parse_label(line.substr(c1 + 1, c2 - c1 - 1)); });
    entry.split = with_line(line_no, [&] { return parse_split(line.substr(c2 + 1)); });
    seen.check(entry.path, line_no);
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

DatasetManifest load_jsonl(const std::vector<std::string>& lines) {
  DatasetManifest manifest;
  DuplicateGuard seen;
  for (size_t i = 0; i < lines.size(); ++i) {
    const int64_t line_no = static_cast<int64_t>(i) + 1;
    const std::string& line = lines[i];
    if (line.empty()) continue;
    const json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) bad_row(line_no, "not a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it.key() != "path" && it.key() != "label" && it.key() != "split") {
        bad_row(line_no, "unknown key \"" + it.key() + "\"");
      }
    }
    if (!j.contains("path") || !j.contains("label") || !j.contains("split")) {
      bad_row(line_no, "needs keys path, label, split");
    }
    if (!j["path"].is_string() || !j["split"].is_string() || !j["label"].is_number_integer()) {
      bad_row(line_no, "path and split must be strings, label an integer");
    }
    ManifestEntry entry;
    entry.path = j["path"].get<std::string>();
    if (entry.path.empty()) bad_row(line_no, "path is empty");
    const int64_t label = j["label"].get<int64_t>();
    if (label != 0 && label != 1) {
      fail(ErrorKind::UnknownLabel, "line " + std::to_string(line_no) +
                                        ": label must be 0 (real) or 1 (synthetic), got " +
                                        std::to_string(label));
    }
    entry.label = static_cast<int>(label);
    entry.split = with_line(line_no, [&] { return parse_split(j["split"].get<std::string>()); });
    seen.check(entry.path, line_no);
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

}  // namespace

DatasetManifest load_manifest(const std::string& path, ManifestFormat format) {
  const std::vector<std::string> lines = split_lines(read_file_bytes(path));
  return format == ManifestFormat::kCsv ? load_csv(lines) : load_jsonl(lines);
}

void save_manifest_csv(const DatasetManifest& manifest, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "path,label,split\n";
  for (const ManifestEntry& e : manifest.entries) {
    out << e.path << ',' << e.label << ',' << split_name(e.split) << '\n';
  }
  close_out(out, path);
}

DatasetManifest make_split(std::vector<ManifestEntry> entries, const SplitRatios& ratios,
                           uint64_t seed) {
  const std::array<double, 3> r{ratios.train, ratios.val, ratios.test};
  double sum = 0.0;
  for (const double v : r) {
    if (v < 0.0) fail(ErrorKind::InvalidSpec, "split ratios must be nonnegative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    fail(ErrorKind::InvalidSpec, "split ratios must sum to 1");
  }

  for (const ManifestEntry& e : entries) {
    if (e.label != 0 && e.label != 1) {
      fail(ErrorKind::UnknownLabel,
           "label must be 0 (real) or 1 (synthetic), got " + std::to_string(e.label));
    }
  }

  for (int label = 0; label < 2; ++label) {
    std::vector<int64_t> members;
    for (size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].label == label) members.push_back(static_cast<int64_t>(i));
    }
    if (members.empty()) {
      fail(ErrorKind::EmptyClass, std::string("class ") + label_name(label) + " has no entries");
    }

    Rng rng = Rng::derive(seed, static_cast<uint64_t>(label), 0, detail::kSplitStream);
    rng.shuffle(members);

    // Largest-remainder apportionment of |members| across the three splits.
    // Each remainder is one explicit fma so equal ratios get bit-equal
    // remainders; letting the optimizer contract `exact - floor(exact)` per
    // iteration can (and did) break that tie and flip the assignment.
    const double n = static_cast<double>(members.size());
    std::array<int64_t, 3> quota{};
    std::array<double, 3> remainder{};
    int64_t assigned = 0;
    for (int s = 0; s < 3; ++s) {
      const double floored = std::floor(r[static_cast<size_t>(s)] * n);
      quota[static_cast<size_t>(s)] = static_cast<int64_t>(floored);
      remainder[static_cast<size_t>(s)] = std::fma(r[static_cast<size_t>(s)], n, -floored);
      assigned += quota[static_cast<size_t>(s)];
    }
    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return remainder[static_cast<size_t>(a)] > remainder[static_cast<size_t>(b)];
    });
    const int64_t leftover = static_cast<int64_t>(members.size()) - assigned;
    for (int64_t k = 0; k < leftover; ++k) {
      quota[static_cast<size_t>(order[static_cast<size_t>(k)])]++;
    }

    size_t cursor = 0;
    const std::array<Split, 3> splits{Split::kTrain, Split::kVal, Split::kTest};
    for (int s = 0; s < 3; ++s) {
      for (int64_t k = 0; k < quota[static_cast<size_t>(s)]; ++k) {
        entries[static_cast<size_t>(members[cursor++])].split = splits[static_cast<size_t>(s)];
      }
    }
  }
  return DatasetManifest{std::move(entries)};
}

std::vector<std::vector<int64_t>> batch_plan(const DatasetManifest& manifest, Split split,
                                             int batch_size, uint64_t seed, int64_t epoch) {
  if (batch_size < 1) fail(ErrorKind::InvalidSpec, "batch size must be at least 1");
  std::vector<int64_t> order = manifest.split_indices(split);
  if (order.empty()) {
    fail(ErrorKind::EmptySplit, std::string("split ") + split_name(split) + " has no entries");
  }
  if (split == Split::kTrain) {
    Rng rng = Rng::derive(seed, static_cast<uint64_t>(epoch), 0, detail::kShuffleStream);
    rng.shuffle(order);
  }
  std::vector<std::vector<int64_t>> batches;
  for (size_t i = 0; i < order.size(); i += static_cast<size_t>(batch_size)) {
    const size_t end = std::min(order.size(), i + static_cast<size_t>(batch_size));
    batches.emplace_back(order.begin() + static_cast<int64_t>(i),
                         order.begin() + static_cast<int64_t>(end));
  }
  return batches;
}

}  // namespace freqcross
