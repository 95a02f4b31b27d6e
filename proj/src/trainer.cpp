#include "freqcross/trainer.hpp"

#include <cmath>
#include <iterator>
#include <string>

#include "json.hpp"

#include "freqcross/csv.hpp"

namespace freqcross {

using nlohmann::json;

void TrainConfig::validate() const {
  if (epochs < 1) {
    fail(ErrorKind::InvalidConfig, "epochs must be at least 1, got " + std::to_string(epochs));
  }
  if (batch_size < 1) {
    fail(ErrorKind::InvalidConfig,
         "batch_size must be at least 1, got " + std::to_string(batch_size));
  }
  if (!std::isfinite(lr) || lr < 0.0) {
    fail(ErrorKind::InvalidConfig, "lr must be finite and >= 0");
  }
  if (!std::isfinite(lambda) || lambda < 0.0) {
    fail(ErrorKind::InvalidConfig, "lambda must be finite and >= 0");
  }
  augment.validate();
  if (modality_mask.enabled_count() == 0) {
    fail(ErrorKind::InvalidConfig, "at least one modality must stay enabled");
  }
}

std::string encode_train_config(const TrainConfig& config) {
  json j;
  j["epochs"] = config.epochs;
  j["batch_size"] = config.batch_size;
  j["lr"] = config.lr;
  j["lambda"] = config.lambda;
  j["seed"] = config.seed;
  j["augment"] = {{"enabled", config.augment.enabled},
                  {"hflip_prob", config.augment.hflip_prob},
                  {"max_rotation_deg", config.augment.max_rotation_deg},
                  {"jitter_range", config.augment.jitter_range}};
  j["modality_mask"] = {{"spatial", config.modality_mask.spatial},
                        {"frequency", config.modality_mask.frequency},
                        {"radial", config.modality_mask.radial}};
  j["dtype"] = dtype_name(config.dtype);
  return j.dump();
}

namespace {

[[noreturn]] void bad_train_blob(const std::string& detail) {
  fail(ErrorKind::CorruptFile, "train config " + detail);
}

const json& expect_key(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) bad_train_blob(std::string("is missing \"") + key + "\"");
  return *it;
}

int64_t expect_integer(const json& j, const char* key) {
  const json& v = expect_key(j, key);
  if (!v.is_number_integer()) {
    bad_train_blob(std::string("field \"") + key + "\" must be an integer");
  }
  return v.get<int64_t>();
}

double expect_number(const json& j, const char* key) {
  const json& v = expect_key(j, key);
  if (!v.is_number()) bad_train_blob(std::string("field \"") + key + "\" must be a number");
  return v.get<double>();
}

bool expect_bool(const json& j, const char* key) {
  const json& v = expect_key(j, key);
  if (!v.is_boolean()) bad_train_blob(std::string("field \"") + key + "\" must be a boolean");
  return v.get<bool>();
}

// `where` is either empty (the top-level object) or a "field \"x\" " prefix.
void reject_unknown(const json& j, const char* const* known, size_t count,
                    const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (size_t i = 0; i < count; ++i) ok = ok || it.key() == known[i];
    if (!ok) {
      bad_train_blob(where + "has unknown field \"" + it.key() + "\"");
    }
  }
}

}  // namespace

TrainConfig decode_train_config(const std::string& json_text) {
  const json j = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) bad_train_blob("is not a JSON object");

  static const char* const known[] = {"epochs", "batch_size",    "lr",   "lambda",
                                      "seed",   "modality_mask", "dtype", "augment"};
  reject_unknown(j, known, std::size(known), "");

  TrainConfig config;
  config.epochs = expect_integer(j, "epochs");
  config.batch_size = static_cast<int>(expect_integer(j, "batch_size"));
  config.lr = expect_number(j, "lr");
  config.lambda = expect_number(j, "lambda");
  const json& seed = expect_key(j, "seed");
  if (!seed.is_number_integer() ||
      (!seed.is_number_unsigned() && seed.get<int64_t>() < 0)) {
    bad_train_blob("field \"seed\" must be a non-negative integer");
  }
  config.seed = seed.get<uint64_t>();

  const json& aug = expect_key(j, "augment");
  if (!aug.is_object()) bad_train_blob("field \"augment\" must be an object");
  static const char* const aug_known[] = {"enabled", "hflip_prob", "max_rotation_deg",
                                          "jitter_range"};
  reject_unknown(aug, aug_known, std::size(aug_known), "field \"augment\" ");
  config.augment.enabled = expect_bool(aug, "enabled");
  config.augment.hflip_prob = expect_number(aug, "hflip_prob");
  config.augment.max_rotation_deg = expect_number(aug, "max_rotation_deg");
  config.augment.jitter_range = expect_number(aug, "jitter_range");

  const json& mask = expect_key(j, "modality_mask");
  if (!mask.is_object()) bad_train_blob("field \"modality_mask\" must be an object");
  static const char* const mask_known[] = {"spatial", "frequency", "radial"};
  reject_unknown(mask, mask_known, std::size(mask_known), "field \"modality_mask\" ");
  config.modality_mask.spatial = expect_bool(mask, "spatial");
  config.modality_mask.frequency = expect_bool(mask, "frequency");
  config.modality_mask.radial = expect_bool(mask, "radial");

  const json& dtype = expect_key(j, "dtype");
  if (!dtype.is_string()) bad_train_blob("field \"dtype\" must be a string");
  try {
    config.dtype = parse_dtype(dtype.get<std::string>());
    config.validate();
  } catch (const Error& e) {
    bad_train_blob(std::string("rejected: ") + e.what());
  }
  return config;
}

void write_history_csv(const std::string& path, const TrainHistory& history) {
  std::ofstream out = open_out(path);
  out << "epoch,train_loss,train_acc,val_loss,val_acc\n";
  for (size_t i = 0; i < history.epochs.size(); ++i) {
    const EpochRecord& r = history.epochs[i];
    out << (i + 1) << ',' << csv_num(r.train_loss) << ',' << csv_num(r.train_acc) << ','
        << csv_num(r.val_loss) << ',' << csv_num(r.val_acc) << '\n';
  }
  close_out(out, path);
}

void write_steps_csv(const std::string& path, const TrainHistory& history) {
  std::ofstream out = open_out(path);
  out << "step,loss\n";
  for (size_t i = 0; i < history.step_losses.size(); ++i) {
    out << i << ',' << csv_num(history.step_losses[i]) << '\n';
  }
  close_out(out, path);
}

Dtype checkpoint_file_dtype(const std::string& bytes) {
  ByteReader r(bytes);
  r.set_context("checkpoint header");
  char magic[4];
  r.raw(magic, sizeof(magic));
  if (std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    fail(ErrorKind::CorruptFile, "not a checkpoint file (bad magic)");
  }
  const uint32_t version = r.u32();
  if (version != kCheckpointFormatVersion) {
    fail(ErrorKind::VersionUnsupported, "checkpoint format version " + std::to_string(version) +
                                            "; this build reads version " +
                                            std::to_string(kCheckpointFormatVersion));
  }
  const uint32_t model_len = r.u32();
  r.set_context("model config");
  r.str(model_len);
  const uint32_t train_len = r.u32();
  r.set_context("train config");
  return decode_train_config(r.str(train_len)).dtype;
}

Dtype read_checkpoint_dtype(const std::string& path) {
  std::string bytes;
  try {
    bytes = read_file_bytes(path);
  } catch (const Error& e) {
    fail(ErrorKind::CorruptFile, e.message());
  }
  return checkpoint_file_dtype(bytes);
}

std::vector<ModalityMask> ablation_masks() {
  return {
      {true, false, false},
      {false, true, false},
      {false, false, true},
      {true, true, false},
      {true, false, true},
      {false, true, true},
      {true, true, true},
  };
}

void write_ablation_csv(const std::string& path, const std::vector<AblationRow>& rows) {
  std::ofstream out = open_out(path);
  out << "modalities,accuracy,precision,recall,f1,auc_roc,auc_pr\n";
  for (const AblationRow& r : rows) {
    out << r.name << ',' << csv_num(r.metrics.basics.accuracy) << ','
        << csv_num(r.metrics.basics.precision) << ',' << csv_num(r.metrics.basics.recall) << ','
        << csv_num(r.metrics.basics.f1) << ',' << csv_num(r.metrics.roc.auc) << ','
        << csv_num(r.metrics.pr.auc) << '\n';
  }
  close_out(out, path);
}

}  // namespace freqcross
