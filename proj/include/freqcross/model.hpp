#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <string>
#include <utility>
#include <vector>

#include "freqcross/bytes.hpp"
#include "freqcross/crc32.hpp"
#include "freqcross/error.hpp"
#include "freqcross/nn.hpp"
#include "freqcross/rng.hpp"
#include "freqcross/tensor.hpp"

namespace freqcross {

// --- configuration ---------------------------------------------------------

enum class SpatialPreset {
  kResnet18,  // the standard 18-layer residual topology
  kTiny,      // three small conv blocks, for desk-scale runs and tests
};

const char* spatial_preset_name(SpatialPreset preset);
SpatialPreset parse_spatial_preset(const std::string& text);  // InvalidConfig

struct ModalityMask {
  bool spatial = true;
  bool frequency = true;
  bool radial = true;

  int enabled_count() const {
    return static_cast<int>(spatial) + static_cast<int>(frequency) + static_cast<int>(radial);
  }
  bool operator==(const ModalityMask&) const = default;
};

// "spatial", "frequency+radial", "all", ... — ablation tables key their rows
// by this name.
std::string modality_mask_name(const ModalityMask& mask);

// Both spatial presets end in a 512-wide feature vector.
inline constexpr int kSpatialOutDim = 512;

struct ModelConfig {
  SpatialPreset spatial_preset = SpatialPreset::kResnet18;
  std::array<int, 3> freq_channels{32, 64, 128};  // frequency-branch conv widths
  int freq_out_dim = 512;
  int radial_bins = 30;
  int radial_hidden = 64;
  int radial_out_dim = 32;
  int head_hidden = 256;
  double dropout_p = 0.5;
  ModalityMask modality_mask{};
  int input_side = 224;

  void validate() const;  // InvalidConfig

  // Width of the concatenated feature vector the head consumes.
  int fused_dim() const {
    return (modality_mask.spatial ? kSpatialOutDim : 0) +
           (modality_mask.frequency ? freq_out_dim : 0) +
           (modality_mask.radial ? radial_out_dim : 0);
  }

  bool operator==(const ModelConfig&) const = default;
};

// JSON blob used inside the model file. Decoding validates strictly and
// reports any defect as CorruptFile, since the blob only ever comes from a
// file we wrote.
std::string encode_model_config(const ModelConfig& config);
ModelConfig decode_model_config(const std::string& json_text);

// --- on-disk dtype ---------------------------------------------------------

enum class Dtype : uint8_t { kF32 = 0, kF64 = 1 };

const char* dtype_name(Dtype dtype);
Dtype parse_dtype(const std::string& text);  // InvalidConfig

template <typename T>
constexpr Dtype dtype_of();
template <>
constexpr Dtype dtype_of<float>() {
  return Dtype::kF32;
}
template <>
constexpr Dtype dtype_of<double>() {
  return Dtype::kF64;
}

// Peeks at a serialized model and reports the element type its tensors were
// written with, so a caller can pick the right instantiation before loading.
Dtype model_file_dtype(const std::string& bytes);
Dtype read_model_dtype(const std::string& path);

// --- layers ----------------------------------------------------------------

// 2D convolution (bias-free) followed by a batchnorm; the usual residual-net
// building unit.
template <typename T>
struct ConvBnLayer {
  Tensor<T> w;  // (out, in, k, k)
  BatchNorm2d<T> bn;
  int stride = 1;
  int padding = 0;
};

template <typename T>
struct ResidualBlock {
  ConvBnLayer<T> conv1;  // carries the block's stride
  ConvBnLayer<T> conv2;
  bool projected = false;  // stage transitions downsample the shortcut
  ConvBnLayer<T> down;     // 1x1 projection, present only when projected
};

template <typename T>
struct DenseLayer {
  Tensor<T> w;  // (out, in)
  Tensor<T> b;  // (out)
};

// --- the model -------------------------------------------------------------

// All three branches are always allocated; the modality mask only controls
// which branch outputs reach the fusion, and the head is sized to the masked
// width. Copies share parameter storage (tensors are views).
template <typename T>
struct Model {
  ModelConfig config;

  // spatial branch, tiny preset
  std::vector<ConvBnLayer<T>> tiny_blocks;
  DenseLayer<T> tiny_fc;
  // spatial branch, resnet18 preset
  ConvBnLayer<T> stem;
  std::vector<ResidualBlock<T>> res_blocks;
  // frequency branch
  std::vector<ConvBnLayer<T>> freq_blocks;
  DenseLayer<T> freq_fc;
  // radial branch
  DenseLayer<T> radial_fc1, radial_fc2;
  // classification head
  DenseLayer<T> head_fc1, head_fc2;

  std::vector<Parameter<T>> parameters();
  std::vector<std::pair<std::string, BatchNorm2d<T>*>> batchnorm_layers();
  std::vector<Tensor<T>> weight_tensors();  // conv + dense weights, for L2
  int64_t parameter_count();
};

namespace detail {

// Single canonical walk over every parameter and batchnorm, in the order the
// optimizer and the file format both use.
template <typename T, typename ParamFn, typename BnFn>
void visit_model(Model<T>& m, ParamFn&& param, BnFn&& bnorm) {
  auto conv_bn = [&](const std::string& conv_name, const std::string& bn_name,
                     ConvBnLayer<T>& layer) {
    param(conv_name + ".weight", layer.w);
    param(bn_name + ".gamma", layer.bn.gamma);
    param(bn_name + ".beta", layer.bn.beta);
    bnorm(bn_name, layer.bn);
  };
  auto dense = [&](const std::string& name, DenseLayer<T>& layer) {
    param(name + ".weight", layer.w);
    param(name + ".bias", layer.b);
  };

  if (m.config.spatial_preset == SpatialPreset::kTiny) {
    for (size_t i = 0; i < m.tiny_blocks.size(); ++i) {
      const std::string prefix = "spatial.block" + std::to_string(i + 1);
      conv_bn(prefix + ".conv", prefix + ".bn", m.tiny_blocks[i]);
    }
    dense("spatial.fc", m.tiny_fc);
  } else {
    conv_bn("spatial.stem.conv", "spatial.stem.bn", m.stem);
    for (size_t i = 0; i < m.res_blocks.size(); ++i) {
      const std::string prefix = "spatial.stage" + std::to_string(i / 2 + 1) + ".block" +
                                 std::to_string(i % 2 + 1);
      ResidualBlock<T>& block = m.res_blocks[i];
      conv_bn(prefix + ".conv1", prefix + ".bn1", block.conv1);
      conv_bn(prefix + ".conv2", prefix + ".bn2", block.conv2);
      if (block.projected) conv_bn(prefix + ".down.conv", prefix + ".down.bn", block.down);
    }
  }
  for (size_t i = 0; i < m.freq_blocks.size(); ++i) {
    const std::string prefix = "freq.block" + std::to_string(i + 1);
    conv_bn(prefix + ".conv", prefix + ".bn", m.freq_blocks[i]);
  }
  dense("freq.fc", m.freq_fc);
  dense("radial.fc1", m.radial_fc1);
  dense("radial.fc2", m.radial_fc2);
  dense("head.fc1", m.head_fc1);
  dense("head.fc2", m.head_fc2);
}

}  // namespace detail

template <typename T>
std::vector<Parameter<T>> Model<T>::parameters() {
  std::vector<Parameter<T>> out;
  detail::visit_model(
      *this, [&](const std::string& name, Tensor<T>& t) { out.push_back({name, t}); },
      [](const std::string&, BatchNorm2d<T>&) {});
  return out;
}

template <typename T>
std::vector<std::pair<std::string, BatchNorm2d<T>*>> Model<T>::batchnorm_layers() {
  std::vector<std::pair<std::string, BatchNorm2d<T>*>> out;
  detail::visit_model(
      *this, [](const std::string&, Tensor<T>&) {},
      [&](const std::string& name, BatchNorm2d<T>& bn) { out.emplace_back(name, &bn); });
  return out;
}

template <typename T>
std::vector<Tensor<T>> Model<T>::weight_tensors() {
  std::vector<Tensor<T>> out;
  detail::visit_model(
      *this,
      [&](const std::string& name, Tensor<T>& t) {
        if (name.size() >= 7 && name.compare(name.size() - 7, 7, ".weight") == 0) {
          out.push_back(t);
        }
      },
      [](const std::string&, BatchNorm2d<T>&) {});
  return out;
}

template <typename T>
int64_t Model<T>::parameter_count() {
  int64_t total = 0;
  for (const Parameter<T>& p : parameters()) total += p.tensor.size();
  return total;
}

// --- construction ----------------------------------------------------------

// Allocates the topology for a config with zero weights (batchnorm scales at
// their identity defaults). build_model layers the seeded init on top; the
// loader fills values from a file instead.
template <typename T>
Model<T> make_model(const ModelConfig& config) {
  config.validate();
  Model<T> m;
  m.config = config;

  auto conv = [](int out, int in, int k, int stride, int padding) {
    ConvBnLayer<T> layer;
    layer.w = Tensor<T>({out, in, k, k}, /*requires_grad=*/true);
    layer.bn = BatchNorm2d<T>(out);
    layer.bn.gamma.set_requires_grad(true);
    layer.bn.beta.set_requires_grad(true);
    layer.stride = stride;
    layer.padding = padding;
    return layer;
  };
  auto dense = [](int out, int in) {
    DenseLayer<T> layer;
    layer.w = Tensor<T>({out, in}, /*requires_grad=*/true);
    layer.b = Tensor<T>({out}, /*requires_grad=*/true);
    return layer;
  };

  if (config.spatial_preset == SpatialPreset::kTiny) {
    const std::array<int, 3> widths{16, 32, 64};
    int in = 3;
    for (const int width : widths) {
      m.tiny_blocks.push_back(conv(width, in, 3, 1, 1));
      in = width;
    }
    m.tiny_fc = dense(kSpatialOutDim, in);
  } else {
    m.stem = conv(64, 3, 7, 2, 3);
    const std::array<int, 4> widths{64, 128, 256, 512};
    int in = 64;
    for (size_t stage = 0; stage < widths.size(); ++stage) {
      for (int b = 0; b < 2; ++b) {
        const int width = widths[stage];
        const bool transition = stage > 0 && b == 0;
        ResidualBlock<T> block;
        block.conv1 = conv(width, in, 3, transition ? 2 : 1, 1);
        block.conv2 = conv(width, width, 3, 1, 1);
        block.projected = transition;
        if (transition) block.down = conv(width, in, 1, 2, 0);
        m.res_blocks.push_back(std::move(block));
        in = width;
      }
    }
  }

  int in = 1;
  for (const int width : config.freq_channels) {
    m.freq_blocks.push_back(conv(width, in, 3, 1, 1));
    in = width;
  }
  m.freq_fc = dense(config.freq_out_dim, in);

  m.radial_fc1 = dense(config.radial_hidden, config.radial_bins);
  m.radial_fc2 = dense(config.radial_out_dim, config.radial_hidden);

  m.head_fc1 = dense(config.head_hidden, config.fused_dim());
  m.head_fc2 = dense(1, config.head_hidden);
  return m;
}

// Seeded initialization: every weight gets a Kaiming-uniform fill in walk
// order; biases stay zero and batchnorms at identity. The draw sequence
// depends only on the config, so equal seeds give equal parameters.
template <typename T>
Model<T> build_model(const ModelConfig& config, Rng& rng) {
  Model<T> m = make_model<T>(config);
  for (Parameter<T>& p : m.parameters()) {
    const std::string& name = p.name;
    if (name.size() < 7 || name.compare(name.size() - 7, 7, ".weight") != 0) continue;
    const int64_t fan_in = p.tensor.rank() == 4 ? static_cast<int64_t>(p.tensor.dim(1)) *
                                                      p.tensor.dim(2) * p.tensor.dim(3)
                                                : p.tensor.dim(1);
    fill_kaiming_uniform(p.tensor, fan_in, rng);
  }
  return m;
}

// --- forward ---------------------------------------------------------------

// Per-branch feature vectors plus the fused representation and the final
// probabilities. Masked branches leave their slot as an empty tensor.
template <typename T>
struct ForwardResult {
  Tensor<T> spatial;    // (B, 512)
  Tensor<T> frequency;  // (B, freq_out_dim)
  Tensor<T> radial;     // (B, radial_out_dim)
  Tensor<T> fused;      // (B, fused width)
  Tensor<T> p;          // (B, 1) probabilities
};

// rgb (B, 3, side, side), spectrum (B, 1, side, side), profile (B, bins).
// Inputs for masked modalities are ignored entirely, so callers may pass
// empty placeholders or full batches alike.
template <typename T>
ForwardResult<T> forward(Tape<T>* tape, Model<T>& m, Tensor<T> rgb, Tensor<T> spectrum,
                         Tensor<T> profile, bool train, Rng& rng) {
  const ModalityMask& mask = m.config.modality_mask;
  const int side = m.config.input_side;

  int batch = -1;
  auto take_batch = ([&](const Tensor<T>& t, const char* branch) {
    if (batch < 0) {
      batch = t.dim(0);
    } else if (t.dim(0) != batch) {
      fail(ErrorKind::ShapeMismatch, std::string(branch) + " input has batch " +
                                         std::to_string(t.dim(0)) + ", other branches have " +
                                         std::to_string(batch));
    }
  });
  auto expect_planes = [&](const Tensor<T>& t, int channels, const char* branch) {
    if (t.rank() != 4 || t.dim(1) != channels || t.dim(2) != side || t.dim(3) != side) {
      fail(ErrorKind::ShapeMismatch, std::string(branch) + " input must be (batch, " +
                                         std::to_string(channels) + ", " + std::to_string(side) +
                                         ", " + std::to_string(side) + ")");
    }
    take_batch(t, branch);
  };
  auto conv_block = [&](Tensor<T> h, ConvBnLayer<T>& layer) {
    h = conv2d(tape, h, layer.w, Tensor<T>(), layer.stride, layer.padding);
    h = batchnorm2d(tape, h, layer.bn, train);
    return relu(tape, h);
  };

  ForwardResult<T> out;
  std::vector<Tensor<T>> parts;

  if (mask.spatial) {
    expect_planes(rgb, 3, "spatial");
    Tensor<T> h = rgb;
    if (m.config.spatial_preset == SpatialPreset::kTiny) {
      for (ConvBnLayer<T>& block : m.tiny_blocks) {
        h = conv_block(h, block);
        h = maxpool2d(tape, h, 2, 2);
      }
      h = global_avg_pool(tape, h);
      h = linear(tape, h, m.tiny_fc.w, m.tiny_fc.b);
    } else {
      h = conv_block(h, m.stem);
      h = maxpool2d(tape, h, 3, 2, 1);
      for (ResidualBlock<T>& block : m.res_blocks) {
        Tensor<T> shortcut = h;
        if (block.projected) {
          shortcut = conv2d(tape, h, block.down.w, Tensor<T>(), block.down.stride, 0);
          shortcut = batchnorm2d(tape, shortcut, block.down.bn, train);
        }
        Tensor<T> y = conv_block(h, block.conv1);
        y = conv2d(tape, y, block.conv2.w, Tensor<T>(), 1, 1);
        y = batchnorm2d(tape, y, block.conv2.bn, train);
        h = relu(tape, add(tape, y, shortcut));
      }
      h = global_avg_pool(tape, h);
    }
    out.spatial = h;
    parts.push_back(h);
  }

  if (mask.frequency) {
    expect_planes(spectrum, 1, "frequency");
    Tensor<T> h = spectrum;
    for (ConvBnLayer<T>& block : m.freq_blocks) {
      h = conv_block(h, block);
      h = maxpool2d(tape, h, 2, 2);
    }
    h = global_avg_pool(tape, h);
    h = linear(tape, h, m.freq_fc.w, m.freq_fc.b);
    out.frequency = h;
    parts.push_back(h);
  }

  if (mask.radial) {
    if (profile.rank() != 2 || profile.dim(1) != m.config.radial_bins) {
      fail(ErrorKind::ShapeMismatch, "radial input must be (batch, " +
                                         std::to_string(m.config.radial_bins) + ")");
    }
    take_batch(profile, "radial");
    Tensor<T> h = linear(tape, profile, m.radial_fc1.w, m.radial_fc1.b);
    h = relu(tape, h);
    h = linear(tape, h, m.radial_fc2.w, m.radial_fc2.b);
    out.radial = h;
    parts.push_back(h);
  }

  out.fused = concat(tape, parts, 1);
  Tensor<T> h = linear(tape, out.fused, m.head_fc1.w, m.head_fc1.b);
  h = relu(tape, h);
  h = dropout(tape, h, m.config.dropout_p, rng, train);
  h = linear(tape, h, m.head_fc2.w, m.head_fc2.b);
  out.p = sigmoid(tape, h);
  return out;
}

// --- serialization ---------------------------------------------------------
//
// Layout (little-endian): magic "FQXM", format version u32, config blob
// length u32 + JSON config, parameter count u32, one record per parameter
// (name length u16 + name, dtype byte, rank byte, dims as u32, raw values),
// the batchnorm running statistics in the same record shape with names
// suffixed ".running_mean"/".running_var", and a trailing CRC32 of all
// preceding bytes.

inline constexpr char kModelMagic[4] = {'F', 'Q', 'X', 'M'};
inline constexpr uint32_t kModelFormatVersion = 1;

namespace detail {

template <typename T>
void write_record(ByteWriter& w, const std::string& name, const T* values,
                  const std::vector<int>& shape, int64_t count) {
  w.u16(static_cast<uint16_t>(name.size()));
  w.str(name);
  w.u8(static_cast<uint8_t>(dtype_of<T>()));
  w.u8(static_cast<uint8_t>(shape.size()));
  for (const int d : shape) w.u32(static_cast<uint32_t>(d));
  w.raw(values, static_cast<size_t>(count) * sizeof(T));
}

template <typename T>
void read_record(ByteReader& r, const std::string& want, T* values,
                 const std::vector<int>& shape, int64_t count) {
  r.set_context(want);
  const uint16_t name_len = r.u16();
  const std::string name = r.str(name_len);
  if (name != want) {
    fail(ErrorKind::CorruptFile, "parameter order: want " + want + ", found " + name);
  }
  const uint8_t dtype = r.u8();
  if (dtype != static_cast<uint8_t>(dtype_of<T>())) {
    const char* stored = dtype <= 1 ? dtype_name(static_cast<Dtype>(dtype)) : "unknown dtype";
    fail(ErrorKind::CorruptFile, want + " is stored as " + stored + ", expected " +
                                     dtype_name(dtype_of<T>()));
  }
  const uint8_t rank = r.u8();
  if (rank != shape.size()) {
    fail(ErrorKind::CorruptFile, want + " rank: file has " + std::to_string(rank) +
                                     ", config needs " + std::to_string(shape.size()));
  }
  for (const int d : shape) {
    const uint32_t file_dim = r.u32();
    if (file_dim != static_cast<uint32_t>(d)) {
      fail(ErrorKind::CorruptFile, want + " shape: file has " + std::to_string(file_dim) +
                                       " where the config needs " + std::to_string(d));
    }
  }
  r.raw(values, static_cast<size_t>(count) * sizeof(T));
}

}  // namespace detail

template <typename T>
std::string serialize_model(Model<T>& m) {
  ByteWriter w;
  w.raw(kModelMagic, sizeof(kModelMagic));
  w.u32(kModelFormatVersion);
  const std::string config_json = encode_model_config(m.config);
  w.u32(static_cast<uint32_t>(config_json.size()));
  w.str(config_json);

  std::vector<Parameter<T>> params = m.parameters();
  w.u32(static_cast<uint32_t>(params.size()));
  for (Parameter<T>& p : params) {
    detail::write_record(w, p.name, p.tensor.data(), p.tensor.shape(), p.tensor.size());
  }
  for (auto& [name, bn] : m.batchnorm_layers()) {
    const std::vector<int> shape{bn->channels()};
    detail::write_record(w, name + ".running_mean", bn->running_mean.data(), shape,
                         bn->channels());
    detail::write_record(w, name + ".running_var", bn->running_var.data(), shape,
                         bn->channels());
  }
  w.u32(crc32(w.buffer().data(), w.buffer().size()));
  return std::move(w.buffer());
}

template <typename T>
Model<T> deserialize_model(const std::string& bytes) {
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
  Model<T> m = make_model<T>(decode_model_config(r.str(config_len)));

  std::vector<Parameter<T>> params = m.parameters();
  r.set_context("parameter count");
  const uint32_t count = r.u32();
  if (count != params.size()) {
    fail(ErrorKind::CorruptFile, "parameter count: file has " + std::to_string(count) +
                                     ", config needs " + std::to_string(params.size()));
  }
  for (Parameter<T>& p : params) {
    detail::read_record(r, p.name, p.tensor.data(), p.tensor.shape(), p.tensor.size());
  }
  for (auto& [name, bn] : m.batchnorm_layers()) {
    const std::vector<int> shape{bn->channels()};
    detail::read_record(r, name + ".running_mean", bn->running_mean.data(), shape,
                        bn->channels());
    detail::read_record(r, name + ".running_var", bn->running_var.data(), shape,
                        bn->channels());
  }

  const size_t body = r.pos();
  r.set_context("model checksum");
  const uint32_t stored = r.u32();
  if (stored != crc32(bytes.data(), body)) {
    fail(ErrorKind::CorruptFile, "model checksum mismatch");
  }
  if (r.remaining() != 0) {
    fail(ErrorKind::CorruptFile, "trailing bytes after the model checksum");
  }
  return m;
}

template <typename T>
void save_model(Model<T>& m, const std::string& path) {
  write_file_bytes(path, serialize_model(m));
}

template <typename T>
Model<T> load_model(const std::string& path) {
  return deserialize_model<T>(read_file_bytes(path));
}

}  // namespace freqcross
