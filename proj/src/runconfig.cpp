#include "freqcross/runconfig.hpp"

#include <cstdint>
#include <string>

#include "json.hpp"

namespace freqcross {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& detail) { fail(ErrorKind::BadConfig, detail); }

void expect_object(const json& v, const std::string& where) {
  if (!v.is_object()) bad("\"" + where + "\" must be an object");
}

int as_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) bad("\"" + where + "\" must be an integer");
  return v.get<int>();
}

int64_t as_int64(const json& v, const std::string& where) {
  if (!v.is_number_integer()) bad("\"" + where + "\" must be an integer");
  return v.get<int64_t>();
}

uint64_t as_seed(const json& v, const std::string& where) {
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<int64_t>() < 0)) {
    bad("\"" + where + "\" must be a nonnegative integer");
  }
  return v.get<uint64_t>();
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) bad("\"" + where + "\" must be a number");
  return v.get<double>();
}

bool as_bool(const json& v, const std::string& where) {
  if (!v.is_boolean()) bad("\"" + where + "\" must be a boolean");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string()) bad("\"" + where + "\" must be a string");
  return v.get<std::string>();
}

void parse_model(const json& j, ModelConfig* out) {
  for (const auto& [key, value] : j.items()) {
    const std::string where = "model." + key;
    if (key == "spatial_preset") {
      try {
        out->spatial_preset = parse_spatial_preset(as_string(value, where));
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::BadConfig) throw;
        bad("\"" + where + "\": " + e.message());
      }
    } else if (key == "freq_channels") {
      if (!value.is_array() || value.size() != out->freq_channels.size()) {
        bad("\"" + where + "\" must be an array of 3 integers");
      }
      for (size_t i = 0; i < out->freq_channels.size(); ++i) {
        if (!value[i].is_number_integer()) {
          bad("\"" + where + "\" must be an array of 3 integers");
        }
        out->freq_channels[i] = value[i].get<int>();
      }
    } else if (key == "freq_out_dim") {
      out->freq_out_dim = as_int(value, where);
    } else if (key == "radial_bins") {
      out->radial_bins = as_int(value, where);
    } else if (key == "radial_hidden") {
      out->radial_hidden = as_int(value, where);
    } else if (key == "radial_out_dim") {
      out->radial_out_dim = as_int(value, where);
    } else if (key == "head_hidden") {
      out->head_hidden = as_int(value, where);
    } else if (key == "dropout_p") {
      out->dropout_p = as_number(value, where);
    } else if (key == "input_side") {
      out->input_side = as_int(value, where);
    } else {
      bad("unknown key \"" + where + "\"");
    }
  }
}

void parse_augment(const json& j, const std::string& prefix, AugmentConfig* out) {
  for (const auto& [key, value] : j.items()) {
    const std::string where = prefix + "." + key;
    if (key == "enabled") {
      out->enabled = as_bool(value, where);
    } else if (key == "hflip_prob") {
      out->hflip_prob = as_number(value, where);
    } else if (key == "max_rotation_deg") {
      out->max_rotation_deg = as_number(value, where);
    } else if (key == "jitter_range") {
      out->jitter_range = as_number(value, where);
    } else {
      bad("unknown key \"" + where + "\"");
    }
  }
}

void parse_mask(const json& j, const std::string& prefix, ModalityMask* out) {
  for (const auto& [key, value] : j.items()) {
    const std::string where = prefix + "." + key;
    if (key == "spatial") {
      out->spatial = as_bool(value, where);
    } else if (key == "frequency") {
      out->frequency = as_bool(value, where);
    } else if (key == "radial") {
      out->radial = as_bool(value, where);
    } else {
      bad("unknown key \"" + where + "\"");
    }
  }
}

void parse_train(const json& j, TrainConfig* out) {
  for (const auto& [key, value] : j.items()) {
    const std::string where = "train." + key;
    if (key == "epochs") {
      out->epochs = as_int64(value, where);
    } else if (key == "batch_size") {
      out->batch_size = as_int(value, where);
    } else if (key == "lr") {
      out->lr = as_number(value, where);
    } else if (key == "lambda") {
      out->lambda = as_number(value, where);
    } else if (key == "seed") {
      out->seed = as_seed(value, where);
    } else if (key == "dtype") {
      try {
        out->dtype = parse_dtype(as_string(value, where));
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::BadConfig) throw;
        bad("\"" + where + "\": " + e.message());
      }
    } else if (key == "augment") {
      expect_object(value, where);
      parse_augment(value, where, &out->augment);
    } else if (key == "modality_mask") {
      expect_object(value, where);
      parse_mask(value, where, &out->modality_mask);
    } else {
      bad("unknown key \"" + where + "\"");
    }
  }
}

void parse_paths(const json& j, RunConfig* out) {
  for (const auto& [key, value] : j.items()) {
    const std::string where = "paths." + key;
    if (key == "manifest") {
      out->manifest_path = as_string(value, where);
    } else if (key == "out") {
      out->out_dir = as_string(value, where);
    } else if (key == "model") {
      out->model_path = as_string(value, where);
    } else {
      bad("unknown key \"" + where + "\"");
    }
  }
}

}  // namespace

void RunConfig::validate() const {
  if (manifest_path.empty()) bad("\"paths.manifest\" is required");
  if (out_dir.empty()) bad("\"paths.out\" is required");
  model.validate();
  train.validate();
}

std::string encode_run_config(const RunConfig& config) {
  json j;
  j["model"] = {{"spatial_preset", spatial_preset_name(config.model.spatial_preset)},
                {"freq_channels", config.model.freq_channels},
                {"freq_out_dim", config.model.freq_out_dim},
                {"radial_bins", config.model.radial_bins},
                {"radial_hidden", config.model.radial_hidden},
                {"radial_out_dim", config.model.radial_out_dim},
                {"head_hidden", config.model.head_hidden},
                {"dropout_p", config.model.dropout_p},
                {"input_side", config.model.input_side}};
  j["train"] = {{"epochs", config.train.epochs},
                {"batch_size", config.train.batch_size},
                {"lr", config.train.lr},
                {"lambda", config.train.lambda},
                {"seed", config.train.seed},
                {"dtype", dtype_name(config.train.dtype)},
                {"augment",
                 {{"enabled", config.train.augment.enabled},
                  {"hflip_prob", config.train.augment.hflip_prob},
                  {"max_rotation_deg", config.train.augment.max_rotation_deg},
                  {"jitter_range", config.train.augment.jitter_range}}},
                {"modality_mask",
                 {{"spatial", config.train.modality_mask.spatial},
                  {"frequency", config.train.modality_mask.frequency},
                  {"radial", config.train.modality_mask.radial}}}};
  j["paths"] = {{"manifest", config.manifest_path},
                {"out", config.out_dir},
                {"model", config.model_path}};
  return j.dump(2) + "\n";
}

RunConfig decode_run_config(const std::string& text, const RunConfig& defaults) {
  const json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) bad("config is not a JSON object");

  RunConfig out = defaults;
  for (const auto& [key, value] : j.items()) {
    if (key == "model") {
      expect_object(value, "model");
      parse_model(value, &out.model);
    } else if (key == "train") {
      expect_object(value, "train");
      parse_train(value, &out.train);
    } else if (key == "paths") {
      expect_object(value, "paths");
      parse_paths(value, &out);
    } else {
      bad("unknown key \"" + key + "\"");
    }
  }
  // One authority for which branches run; the trainer stamps the same way.
  out.model.modality_mask = out.train.modality_mask;
  out.model.validate();
  out.train.validate();
  return out;
}

RunConfig load_run_config(const std::string& path, const RunConfig& defaults) {
  return decode_run_config(read_file_bytes(path), defaults);
}

void save_run_config(const RunConfig& config, const std::string& path) {
  write_file_bytes(path, encode_run_config(config));
}

}  // namespace freqcross
