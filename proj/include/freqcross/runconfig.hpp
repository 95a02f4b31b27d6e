#pragma once

#include <string>

#include "freqcross/trainer.hpp"

namespace freqcross {

// Everything one run of the command-line tool needs, in a single document:
// the model topology, the training-loop settings, and the file locations.
// On disk it is JSON with three sections ("model", "train", "paths");
// omitted keys keep their defaults, and unknown keys are hard errors so a
// typo in a hyperparameter name cannot silently fall back to a default.
//
// The modality mask lives under "train" only — the trainer stamps it into
// the model config, so one key controls which branches a run uses.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  std::string manifest_path;  // paths.manifest (required by train/ablate)
  std::string out_dir;        // paths.out (required by train/ablate)
  std::string model_path;     // paths.model; empty means <out>/model.fqxm

  // Full check: the per-section validates plus the required paths.
  void validate() const;  // BadConfig / InvalidConfig
};

// The complete document with every key present, indented — this is the form
// effective configs are echoed in, and it parses back losslessly.
std::string encode_run_config(const RunConfig& config);

// Strict parse layered over `defaults`: sections and keys may be omitted,
// anything unknown or ill-typed raises BadConfig naming the dotted key.
RunConfig decode_run_config(const std::string& text, const RunConfig& defaults = RunConfig{});

RunConfig load_run_config(const std::string& path, const RunConfig& defaults = RunConfig{});
void save_run_config(const RunConfig& config, const std::string& path);

}  // namespace freqcross
