#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <utility>
#include <vector>

#include "freqcross/adam.hpp"
#include "freqcross/bytes.hpp"
#include "freqcross/crc32.hpp"
#include "freqcross/datapipe.hpp"
#include "freqcross/evalkit.hpp"
#include "freqcross/model.hpp"
#include "freqcross/nn.hpp"
#include "freqcross/rng.hpp"

namespace freqcross {

// The Adam loop over the three-branch detector: shuffled minibatches of the
// regularized BCE objective, per-epoch validation, checkpoint/resume, and
// the modality-ablation driver.

struct TrainConfig {
  int64_t epochs = 10;
  int batch_size = 32;
  double lr = 1e-4;       // constant; no schedule, no early stopping
  double lambda = 1e-4;   // L2 weight on conv and dense weights
  uint64_t seed = 0;
  AugmentConfig augment{};
  ModalityMask modality_mask{};  // stamped into the model config by train()
  Dtype dtype = Dtype::kF32;

  // lr = 0 is allowed: it makes every optimizer step a no-op, which the
  // degenerate-step tests rely on.
  void validate() const;  // InvalidConfig
  bool operator==(const TrainConfig&) const = default;
};

// JSON blob stored inside checkpoints; decoding is strict and reports any
// defect as CorruptFile.
std::string encode_train_config(const TrainConfig& config);
TrainConfig decode_train_config(const std::string& json_text);

// One completed epoch: train numbers are accumulated over that epoch's
// optimizer steps (train-mode forward), val numbers come from a full
// eval-mode pass. Both losses are the full objective (BCE plus the L2
// penalty), so the two curves are comparable.
struct EpochRecord {
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::vector<double> step_losses;  // one per optimizer step, across epochs
};

// history.csv rows are 1-based (epoch 1 = first completed epoch); steps.csv
// rows carry the 0-based optimizer step index that error messages also use.
void write_history_csv(const std::string& path, const TrainHistory& history);
void write_steps_csv(const std::string& path, const TrainHistory& history);

namespace detail {
inline constexpr uint64_t kInitStream = 106;  // model weight init
inline constexpr uint64_t kStepStream = 107;  // per-step dropout masks
}  // namespace detail

// Sum of squared conv/dense weights, accumulated exactly like the loss's
// penalty term so reported losses stay consistent with the objective.
template <typename T>
double weight_penalty(Model<T>& m) {
  double penalty = 0.0;
  for (const Tensor<T>& w : m.weight_tensors()) {
    for (const T v : w.values()) penalty += static_cast<double>(v) * v;
  }
  return penalty;
}

// --- evaluation ------------------------------------------------------------

// Scores, metrics at threshold 0.5, the plain mean BCE (no penalty), and the
// fusion-layer feature vector per sample — everything the artifact writers
// need from one pass over a split.
struct EvalResult {
  ScoredSet scored;  // split entries in manifest order
  MetricsReport metrics;
  double mean_bce = 0.0;
  std::vector<std::vector<double>> fused;
};

// Eval-mode forward over the split in manifest order, never augmented.
// batch_size only chunks the forward passes; every quantity is accumulated
// per sample, so results do not depend on it.
template <typename T>
EvalResult evaluate(Model<T>& model, const DatasetManifest& manifest, Split split,
                    int batch_size = 32) {
  if (batch_size < 1) {
    fail(ErrorKind::InvalidConfig,
         "batch_size must be at least 1, got " + std::to_string(batch_size));
  }
  const std::vector<int64_t> indices = manifest.split_indices(split);
  if (indices.empty()) {
    fail(ErrorKind::EmptySplit, std::string("split ") + split_name(split) + " has no entries");
  }

  AugmentConfig no_augment;
  no_augment.enabled = false;
  std::vector<Sample> samples(indices.size());
  parallel_for(static_cast<int64_t>(indices.size()), [&](int64_t i) {
    Rng unused(0);
    samples[static_cast<size_t>(i)] =
        prepare_sample(manifest.entries[static_cast<size_t>(indices[static_cast<size_t>(i)])],
                       model.config.input_side, no_augment, unused, model.config.radial_bins);
  });

  EvalResult out;
  double bce_sum = 0.0;
  for (size_t start = 0; start < samples.size(); start += static_cast<size_t>(batch_size)) {
    const size_t end = std::min(samples.size(), start + static_cast<size_t>(batch_size));
    const std::vector<Sample> chunk(samples.begin() + static_cast<int64_t>(start),
                                    samples.begin() + static_cast<int64_t>(end));
    const SampleBatch<T> batch = pack_batch<T>(chunk);
    Rng fwd_rng(0);  // eval mode never consults it
    const ForwardResult<T> fwd =
        forward<T>(nullptr, model, batch.rgb, batch.spectrum, batch.profile, false, fwd_rng);
    const int64_t fdim = fwd.fused.dim(1);
    for (size_t n = 0; n < chunk.size(); ++n) {
      const double p = static_cast<double>(fwd.p.values()[static_cast<int64_t>(n)]);
      out.scored.scores.push_back(p);
      out.scored.labels.push_back(chunk[n].label);
      const double pc = std::min(1.0 - kProbClamp, std::max(kProbClamp, p));
      bce_sum -= chunk[n].label == 1 ? std::log(pc) : std::log(1.0 - pc);
      const T* row = fwd.fused.values().data() + static_cast<int64_t>(n) * fdim;
      out.fused.emplace_back(row, row + fdim);
    }
  }
  out.mean_bce = bce_sum / static_cast<double>(samples.size());
  out.metrics = evaluate_scores(out.scored, 0.5);
  return out;
}

template <typename T>
struct TrainResult {
  Model<T> model;
  TrainHistory history;
};

// --- checkpoints -----------------------------------------------------------
//
// The model format with the training state appended: magic "FQXC", format
// version u32, model-config and train-config JSON blobs (u32 length each),
// the completed-epoch counter u64, the model's parameter and batchnorm
// records exactly as in a model file, the optimizer step counter u64, one
// f64 record pair "opt.m.<name>"/"opt.v.<name>" per parameter, the history
// (u64 count + 4 f64 per epoch, u64 count + f64 per step), and a trailing
// CRC32. Everything an uninterrupted continuation needs is in here; the RNG
// streams need no state because every stream is re-derived from
// (seed, epoch, step-or-entry).

inline constexpr char kCheckpointMagic[4] = {'F', 'Q', 'X', 'C'};
inline constexpr uint32_t kCheckpointFormatVersion = 1;

template <typename T>
struct Checkpoint {
  Model<T> model;
  AdamState<T> opt;
  TrainHistory history;
  TrainConfig config;
  int64_t completed_epochs = 0;
};

template <typename T>
std::string serialize_checkpoint(Model<T>& model, const AdamState<T>& opt,
                                 const TrainHistory& history, const TrainConfig& config,
                                 int64_t completed_epochs) {
  std::vector<Parameter<T>> params = model.parameters();
  AdamState<T> fresh;
  const AdamState<T>* moments = &opt;
  if (opt.m.empty()) {  // never stepped: the moments are implicit zeros
    fresh.init(params);
    moments = &fresh;
  } else if (opt.m.size() != params.size()) {
    fail(ErrorKind::ShapeMismatch, "optimizer state tracks " + std::to_string(opt.m.size()) +
                                       " tensors, model has " + std::to_string(params.size()));
  }

  ByteWriter w;
  w.raw(kCheckpointMagic, sizeof(kCheckpointMagic));
  w.u32(kCheckpointFormatVersion);
  const std::string model_json = encode_model_config(model.config);
  w.u32(static_cast<uint32_t>(model_json.size()));
  w.str(model_json);
  const std::string train_json = encode_train_config(config);
  w.u32(static_cast<uint32_t>(train_json.size()));
  w.str(train_json);
  w.u64(static_cast<uint64_t>(completed_epochs));

  w.u32(static_cast<uint32_t>(params.size()));
  for (Parameter<T>& p : params) {
    detail::write_record(w, p.name, p.tensor.data(), p.tensor.shape(), p.tensor.size());
  }
  for (auto& [name, bn] : model.batchnorm_layers()) {
    const std::vector<int> shape{bn->channels()};
    detail::write_record(w, name + ".running_mean", bn->running_mean.data(), shape,
                         bn->channels());
    detail::write_record(w, name + ".running_var", bn->running_var.data(), shape,
                         bn->channels());
  }

  w.u64(static_cast<uint64_t>(opt.step));
  for (size_t i = 0; i < params.size(); ++i) {
    const std::vector<int>& shape = params[i].tensor.shape();
    const int64_t count = params[i].tensor.size();
    detail::write_record(w, "opt.m." + params[i].name, moments->m[i].data(), shape, count);
    detail::write_record(w, "opt.v." + params[i].name, moments->v[i].data(), shape, count);
  }

  w.u64(history.epochs.size());
  for (const EpochRecord& r : history.epochs) {
    w.f64(r.train_loss);
    w.f64(r.train_acc);
    w.f64(r.val_loss);
    w.f64(r.val_acc);
  }
  w.u64(history.step_losses.size());
  for (const double v : history.step_losses) w.f64(v);

  w.u32(crc32(w.buffer().data(), w.buffer().size()));
  return std::move(w.buffer());
}

template <typename T>
Checkpoint<T> deserialize_checkpoint(const std::string& bytes) {
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
  const ModelConfig model_config = decode_model_config(r.str(model_len));
  const uint32_t train_len = r.u32();
  r.set_context("train config");
  Checkpoint<T> ck;
  ck.config = decode_train_config(r.str(train_len));
  if (model_config.modality_mask != ck.config.modality_mask) {
    fail(ErrorKind::CorruptFile, "model and train configs disagree on the modality mask");
  }
  if (dtype_of<T>() != ck.config.dtype) {
    fail(ErrorKind::InvalidConfig, std::string("checkpoint stores ") +
                                       dtype_name(ck.config.dtype) + " parameters, caller asked for " +
                                       dtype_name(dtype_of<T>()));
  }
  r.set_context("epoch counter");
  ck.completed_epochs = static_cast<int64_t>(r.u64());

  ck.model = make_model<T>(model_config);
  std::vector<Parameter<T>> params = ck.model.parameters();
  r.set_context("parameter count");
  const uint32_t count = r.u32();
  if (count != params.size()) {
    fail(ErrorKind::CorruptFile, "parameter count: file has " + std::to_string(count) +
                                     ", config needs " + std::to_string(params.size()));
  }
  for (Parameter<T>& p : params) {
    detail::read_record(r, p.name, p.tensor.data(), p.tensor.shape(), p.tensor.size());
  }
  for (auto& [name, bn] : ck.model.batchnorm_layers()) {
    const std::vector<int> shape{bn->channels()};
    detail::read_record(r, name + ".running_mean", bn->running_mean.data(), shape,
                        bn->channels());
    detail::read_record(r, name + ".running_var", bn->running_var.data(), shape,
                        bn->channels());
  }

  r.set_context("optimizer step counter");
  ck.opt.lr = ck.config.lr;
  ck.opt.step = static_cast<int64_t>(r.u64());
  for (const Parameter<T>& p : params) {
    const size_t n = static_cast<size_t>(p.tensor.size());
    ck.opt.m.emplace_back(n, 0.0);
    detail::read_record<double>(r, "opt.m." + p.name, ck.opt.m.back().data(), p.tensor.shape(),
                                p.tensor.size());
    ck.opt.v.emplace_back(n, 0.0);
    detail::read_record<double>(r, "opt.v." + p.name, ck.opt.v.back().data(), p.tensor.shape(),
                                p.tensor.size());
  }

  r.set_context("history");
  const uint64_t epoch_count = r.u64();
  if (epoch_count != static_cast<uint64_t>(ck.completed_epochs)) {
    fail(ErrorKind::CorruptFile, "history records " + std::to_string(epoch_count) +
                                     " epochs, counter says " +
                                     std::to_string(ck.completed_epochs));
  }
  for (uint64_t i = 0; i < epoch_count; ++i) {
    EpochRecord rec{r.f64(), r.f64(), r.f64(), r.f64()};
    if (!std::isfinite(rec.train_loss) || !std::isfinite(rec.train_acc) ||
        !std::isfinite(rec.val_loss) || !std::isfinite(rec.val_acc)) {
      fail(ErrorKind::CorruptFile, "history holds a non-finite value");
    }
    ck.history.epochs.push_back(rec);
  }
  const uint64_t step_count = r.u64();
  for (uint64_t i = 0; i < step_count; ++i) {
    const double v = r.f64();
    if (!std::isfinite(v)) fail(ErrorKind::CorruptFile, "history holds a non-finite value");
    ck.history.step_losses.push_back(v);
  }

  const size_t body = r.pos();
  r.set_context("checkpoint checksum");
  const uint32_t stored = r.u32();
  if (stored != crc32(bytes.data(), body)) {
    fail(ErrorKind::CorruptFile, "checkpoint checksum mismatch");
  }
  if (r.remaining() != 0) {
    fail(ErrorKind::CorruptFile, "trailing bytes after the checkpoint checksum");
  }
  return ck;
}

template <typename T>
void save_checkpoint(Model<T>& model, const AdamState<T>& opt, const TrainHistory& history,
                     const TrainConfig& config, int64_t completed_epochs,
                     const std::string& path) {
  write_file_bytes(path, serialize_checkpoint(model, opt, history, config, completed_epochs));
}

// A checkpoint that cannot be read — including a missing file — cannot be
// resumed from, so read failures surface as CorruptFile.
template <typename T>
Checkpoint<T> load_checkpoint(const std::string& path) {
  std::string bytes;
  try {
    bytes = read_file_bytes(path);
  } catch (const Error& e) {
    fail(ErrorKind::CorruptFile, e.message());
  }
  return deserialize_checkpoint<T>(bytes);
}

// Peeks at the stored train config so a caller can pick the instantiation.
Dtype checkpoint_file_dtype(const std::string& bytes);
Dtype read_checkpoint_dtype(const std::string& path);

// --- the loop --------------------------------------------------------------

namespace detail {

// Epochs [first_epoch, config.epochs) on an existing model and optimizer;
// train() and resume() both funnel through here. When checkpoint_path is
// nonempty, the full training state is rewritten there after every epoch.
template <typename T>
void run_epochs(Model<T>& model, AdamState<T>& opt, TrainHistory& history,
                const DatasetManifest& manifest, const TrainConfig& config, int64_t first_epoch,
                const std::string& checkpoint_path) {
  config.validate();
  if (manifest.split_size(Split::kTrain) == 0) {
    fail(ErrorKind::EmptySplit, "split train has no entries");
  }
  if (manifest.split_size(Split::kVal) == 0) {
    fail(ErrorKind::EmptySplit, "split val has no entries");
  }
  opt.lr = config.lr;

  std::vector<Parameter<T>> params = model.parameters();
  const std::vector<Tensor<T>> penalized = model.weight_tensors();
  PrepareOptions prep;
  prep.side = model.config.input_side;
  prep.radial_bins = model.config.radial_bins;
  prep.augment = config.augment;

  for (int64_t epoch = first_epoch; epoch < config.epochs; ++epoch) {
    std::vector<SampleBatch<T>> batches =
        make_batches<T>(manifest, Split::kTrain, config.batch_size, config.seed, epoch, prep);
    double loss_sum = 0.0;
    int64_t correct = 0;
    int64_t seen = 0;
    for (size_t step = 0; step < batches.size(); ++step) {
      SampleBatch<T>& batch = batches[step];
      for (Parameter<T>& p : params) p.tensor.zero_grad();
      Tape<T> tape;
      Rng step_rng =
          Rng::derive(config.seed, static_cast<uint64_t>(epoch), step, detail::kStepStream);
      const ForwardResult<T> out =
          forward<T>(&tape, model, batch.rgb, batch.spectrum, batch.profile, true, step_rng);
      Tensor<T> loss = bce_l2_loss<T>(&tape, out.p, batch.labels, penalized, config.lambda);
      const double loss_value = static_cast<double>(loss.values()[0]);
      if (!std::isfinite(loss_value)) {
        fail(ErrorKind::NonFiniteLoss,
             "loss is not finite at step " + std::to_string(history.step_losses.size()) +
                 " (epoch " + std::to_string(epoch) + ")");
      }
      backward(loss);
      adam_step(params, opt);
      history.step_losses.push_back(loss_value);
      loss_sum += loss_value;
      for (size_t n = 0; n < batch.labels.size(); ++n) {
        const bool predicted = out.p.values()[static_cast<int64_t>(n)] >= T(0.5);
        correct += predicted == (batch.labels[n] == T(1)) ? 1 : 0;
      }
      seen += static_cast<int64_t>(batch.labels.size());
    }

    EpochRecord rec;
    rec.train_loss = loss_sum / static_cast<double>(batches.size());
    rec.train_acc = static_cast<double>(correct) / static_cast<double>(seen);
    const EvalResult val = evaluate<T>(model, manifest, Split::kVal, config.batch_size);
    rec.val_loss = val.mean_bce + config.lambda * weight_penalty(model);
    rec.val_acc = val.metrics.basics.accuracy;
    history.epochs.push_back(rec);

    if (!checkpoint_path.empty()) {
      save_checkpoint<T>(model, opt, history, config, epoch + 1, checkpoint_path);
    }
  }
}

}  // namespace detail

// Builds a model from the config (with the train config's modality mask
// stamped in — the train config is the authority) and runs the full loop.
// Deterministic for a fixed (seed, dtype): the weight init, batch shuffles,
// augmentations, and dropout masks all come from streams derived from the
// seed and the epoch/step counters.
template <typename T>
TrainResult<T> train(ModelConfig model_config, const DatasetManifest& manifest,
                     const TrainConfig& config, const std::string& checkpoint_path = {}) {
  config.validate();
  if (dtype_of<T>() != config.dtype) {
    fail(ErrorKind::InvalidConfig, std::string("train config asks for ") +
                                       dtype_name(config.dtype) + ", caller instantiated " +
                                       dtype_name(dtype_of<T>()));
  }
  model_config.modality_mask = config.modality_mask;
  Rng init_rng = Rng::derive(config.seed, 0, 0, detail::kInitStream);
  TrainResult<T> result{build_model<T>(model_config, init_rng), TrainHistory{}};
  AdamState<T> opt;
  detail::run_epochs(result.model, opt, result.history, manifest, config, 0, checkpoint_path);
  return result;
}

// Continues a checkpointed run to its configured epoch target (or to
// total_epochs when ≥ 0) and keeps checkpointing to the same path. The
// continuation is bitwise-identical to the uninterrupted run.
template <typename T>
TrainResult<T> resume(const std::string& path, const DatasetManifest& manifest,
                      int64_t total_epochs = -1) {
  Checkpoint<T> ck = load_checkpoint<T>(path);
  TrainConfig config = ck.config;
  if (total_epochs >= 0) config.epochs = total_epochs;
  if (config.epochs < ck.completed_epochs) {
    fail(ErrorKind::InvalidConfig, "checkpoint has " + std::to_string(ck.completed_epochs) +
                                       " completed epochs, target is " +
                                       std::to_string(config.epochs));
  }
  TrainResult<T> result{std::move(ck.model), std::move(ck.history)};
  detail::run_epochs(result.model, ck.opt, result.history, manifest, config,
                     ck.completed_epochs, path);
  return result;
}

// --- ablation --------------------------------------------------------------

struct AblationRow {
  std::string name;
  ModalityMask mask;
  MetricsReport metrics;  // test-split metrics at threshold 0.5
};

// The seven variants in table order: the three single modalities, the three
// pairs, then all.
std::vector<ModalityMask> ablation_masks();

void write_ablation_csv(const std::string& path, const std::vector<AblationRow>& rows);

// Trains one model per mask — all from the same seed — and scores each on
// the test split.
template <typename T>
std::vector<AblationRow> ablate(const ModelConfig& base_config, const DatasetManifest& manifest,
                                const TrainConfig& base_train) {
  std::vector<AblationRow> rows;
  for (const ModalityMask& mask : ablation_masks()) {
    TrainConfig config = base_train;
    config.modality_mask = mask;
    TrainResult<T> trained = train<T>(base_config, manifest, config);
    const EvalResult ev = evaluate<T>(trained.model, manifest, Split::kTest, config.batch_size);
    rows.push_back({modality_mask_name(mask), mask, ev.metrics});
  }
  return rows;
}

}  // namespace freqcross
