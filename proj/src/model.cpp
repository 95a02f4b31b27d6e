#include "freqcross/model.hpp"

#include <string>

#include "json.hpp"

namespace freqcross {

using nlohmann::json;

const char* spatial_preset_name(SpatialPreset preset) {
  return preset == SpatialPreset::kResnet18 ? "resnet18" : "tiny";
}

SpatialPreset parse_spatial_preset(const std::string& text) {
  if (text == "resnet18") return SpatialPreset::kResnet18;
  if (text == "tiny") return SpatialPreset::kTiny;
  fail(ErrorKind::InvalidConfig, "unknown spatial preset \"" + text + "\"");
}

std::string modality_mask_name(const ModalityMask& mask) {
  if (mask.enabled_count() == 3) return "all";
  if (mask.enabled_count() == 0) return "none";
  std::string out;
  auto append = [&](bool enabled, const char* name) {
    if (!enabled) return;
    if (!out.empty()) out += '+';
    out += name;
  };
  append(mask.spatial, "spatial");
  append(mask.frequency, "frequency");
  append(mask.radial, "radial");
  return out;
}

void ModelConfig::validate() const {
  auto positive = [](int value, const char* what) {
    if (value < 1) {
      fail(ErrorKind::InvalidConfig,
           std::string(what) + " must be at least 1, got " + std::to_string(value));
    }
  };
  for (const int c : freq_channels) positive(c, "every frequency-branch channel count");
  positive(freq_out_dim, "freq_out_dim");
  positive(radial_bins, "radial_bins");
  positive(radial_hidden, "radial_hidden");
  positive(radial_out_dim, "radial_out_dim");
  positive(head_hidden, "head_hidden");
  if (dropout_p < 0.0 || dropout_p >= 1.0) {
    fail(ErrorKind::InvalidConfig, "dropout_p must lie in [0, 1)");
  }
  if (modality_mask.enabled_count() == 0) {
    fail(ErrorKind::InvalidConfig, "at least one modality must stay enabled");
  }
  if (input_side < 8) {
    fail(ErrorKind::InvalidConfig,
         "input_side must be at least 8, got " + std::to_string(input_side));
  }
}

const char* dtype_name(Dtype dtype) { return dtype == Dtype::kF32 ? "f32" : "f64"; }

Dtype parse_dtype(const std::string& text) {
  if (text == "f32") return Dtype::kF32;
  if (text == "f64") return Dtype::kF64;
  fail(ErrorKind::InvalidConfig, "unknown dtype \"" + text + "\" (expected f32 or f64)");
}

std::string encode_model_config(const ModelConfig& config) {
  json j;
  j["spatial_preset"] = spatial_preset_name(config.spatial_preset);
  j["freq_channels"] = config.freq_channels;
  j["freq_out_dim"] = config.freq_out_dim;
  j["radial_bins"] = config.radial_bins;
  j["radial_hidden"] = config.radial_hidden;
  j["radial_out_dim"] = config.radial_out_dim;
  j["head_hidden"] = config.head_hidden;
  j["dropout_p"] = config.dropout_p;
  j["modality_mask"] = {{"spatial", config.modality_mask.spatial},
                        {"frequency", config.modality_mask.frequency},
                        {"radial", config.modality_mask.radial}};
  j["input_side"] = config.input_side;
  return j.dump();
}

namespace {

[[noreturn]] void bad_config_blob(const std::string& detail) {
  fail(ErrorKind::CorruptFile, "model config " + detail);
}

const json& expect_key(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) bad_config_blob(std::string("is missing \"") + key + "\"");
  return *it;
}

int expect_int(const json& j, const char* key) {
  const json& v = expect_key(j, key);
  if (!v.is_number_integer()) bad_config_blob(std::string("field \"") + key + "\" must be an integer");
  return v.get<int>();
}

bool expect_bool(const json& j, const char* key) {
  const json& v = expect_key(j, key);
  if (!v.is_boolean()) bad_config_blob(std::string("field \"") + key + "\" must be a boolean");
  return v.get<bool>();
}

}  // namespace

ModelConfig decode_model_config(const std::string& json_text) {
  const json j = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) bad_config_blob("is not a JSON object");

  static const char* const known[] = {"spatial_preset", "freq_channels", "freq_out_dim",
                                      "radial_bins",    "radial_hidden", "radial_out_dim",
                                      "head_hidden",    "dropout_p",     "modality_mask",
                                      "input_side"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* key : known) ok = ok || it.key() == key;
    if (!ok) bad_config_blob("has unknown field \"" + it.key() + "\"");
  }

  ModelConfig config;
  const json& preset = expect_key(j, "spatial_preset");
  if (!preset.is_string()) bad_config_blob("field \"spatial_preset\" must be a string");
  try {
    config.spatial_preset = parse_spatial_preset(preset.get<std::string>());
  } catch (const Error& e) {
    bad_config_blob(std::string("rejected: ") + e.what());
  }

  const json& channels = expect_key(j, "freq_channels");
  if (!channels.is_array() || channels.size() != config.freq_channels.size()) {
    bad_config_blob("field \"freq_channels\" must be an array of 3 integers");
  }
  for (size_t i = 0; i < config.freq_channels.size(); ++i) {
    if (!channels[i].is_number_integer()) {
      bad_config_blob("field \"freq_channels\" must be an array of 3 integers");
    }
    config.freq_channels[i] = channels[i].get<int>();
  }

  config.freq_out_dim = expect_int(j, "freq_out_dim");
  config.radial_bins = expect_int(j, "radial_bins");
  config.radial_hidden = expect_int(j, "radial_hidden");
  config.radial_out_dim = expect_int(j, "radial_out_dim");
  config.head_hidden = expect_int(j, "head_hidden");

  const json& dropout = expect_key(j, "dropout_p");
  if (!dropout.is_number()) bad_config_blob("field \"dropout_p\" must be a number");
  config.dropout_p = dropout.get<double>();

  const json& mask = expect_key(j, "modality_mask");
  if (!mask.is_object()) bad_config_blob("field \"modality_mask\" must be an object");
  config.modality_mask.spatial = expect_bool(mask, "spatial");
  config.modality_mask.frequency = expect_bool(mask, "frequency");
  config.modality_mask.radial = expect_bool(mask, "radial");

  config.input_side = expect_int(j, "input_side");

  try {
    config.validate();
  } catch (const Error& e) {
    bad_config_blob(std::string("rejected: ") + e.what());
  }
  return config;
}

Dtype model_file_dtype(const std::string& bytes) {
  ByteReader r(bytes);
  r.set_context("model header");
  char magic[4];
  r.raw(magic, sizeof(magic));
  if (std::memcmp(magic, kModelMagic, sizeof(magic)) != 0) {
    fail(ErrorKind::CorruptFile, "not a model file (bad magic)");
  }
  const uint32_t version = r.u32();
  if (version != kModelFormatVersion) {
    fail(ErrorKind::VersionUnsupported, "model format version " + std::to_string(version) +
                                            "; this build reads version " +
                                            std::to_string(kModelFormatVersion));
  }
  const uint32_t config_len = r.u32();
  r.set_context("model config");
  r.str(config_len);
  r.set_context("parameter count");
  const uint32_t count = r.u32();
  if (count == 0) fail(ErrorKind::CorruptFile, "model file lists no parameters");
  r.set_context("first parameter record");
  const uint16_t name_len = r.u16();
  r.str(name_len);
  const uint8_t dtype = r.u8();
  if (dtype > 1) {
    fail(ErrorKind::CorruptFile, "unknown dtype byte " + std::to_string(dtype));
  }
  return static_cast<Dtype>(dtype);
}

Dtype read_model_dtype(const std::string& path) {
  return model_file_dtype(read_file_bytes(path));
}

}  // namespace freqcross
