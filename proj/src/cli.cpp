#include "freqcross/cli.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "freqcross/csv.hpp"
#include "freqcross/datapipe.hpp"
#include "freqcross/evalkit.hpp"
#include "freqcross/gradcheck.hpp"
#include "freqcross/runconfig.hpp"
#include "freqcross/spectrum.hpp"
#include "freqcross/trainer.hpp"

namespace freqcross {
namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Argument and config defects exit 2; everything else the library reports
// (missing data, corrupt files, failed runs) is a runtime failure.
int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::BadConfig:
    case ErrorKind::InvalidConfig:
    case ErrorKind::InvalidSpec:
    case ErrorKind::UnknownSplit:
    case ErrorKind::UnknownLabel:
      return kExitUsage;
    default:
      return kExitRuntime;
  }
}

// FREQCROSS_SEED replaces the built-in default seed; config files and flags
// still win over it.
std::optional<uint64_t> env_seed() {
  const char* text = std::getenv("FREQCROSS_SEED");
  if (text == nullptr || *text == '\0') return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const unsigned long long value = std::strtoull(text, &end, 10);
  if (errno != 0 || end == text || *end != '\0' || *text == '-') {
    fail(ErrorKind::BadConfig,
         std::string("FREQCROSS_SEED must be a nonnegative integer, got \"") + text + "\"");
  }
  return static_cast<uint64_t>(value);
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::IoFailure, "cannot create directory " + dir + ": " + ec.message());
}

ManifestFormat manifest_format_for(const std::string& path) {
  const std::string ext = std::filesystem::path(path).extension().string();
  return ext == ".jsonl" ? ManifestFormat::kJsonl : ManifestFormat::kCsv;
}

// Every run leaves its effective settings next to its outputs, so any
// artifact directory documents how it was produced.
void echo_settings(const std::string& out_dir, const json& doc) {
  write_file_bytes(join(out_dir, "config.json"), doc.dump(2) + "\n");
}

// --- fixtures --------------------------------------------------------------

int run_fixtures(const std::string& out, int count, int side, double gain, uint64_t seed) {
  FixtureSpec spec;
  spec.count_per_class = count;
  spec.side = side;
  spec.band_gain = gain;
  spec.seed = seed;
  const DatasetManifest manifest = make_fixtures(spec, out);
  echo_settings(out, json{{"command", "fixtures"},
                          {"count", count},
                          {"side", side},
                          {"gain", gain},
                          {"seed", seed},
                          {"out", out}});
  std::cout << "wrote " << manifest.entries.size() << " images and manifest.csv under " << out
            << "\n";
  return kExitOk;
}

// --- spectrum --------------------------------------------------------------

int run_spectrum(const std::string& image_path, int bins, const std::string& out) {
  const ImageRGB img = decode_image_file(image_path);
  const MagnitudeSpectrum mag = magnitude(fft2d(to_grayscale(img)), /*centered=*/true);
  const RadialProfile profile = radial_profile(mag, bins);

  ensure_dir(out);
  echo_settings(out, json{{"command", "spectrum"},
                          {"image", image_path},
                          {"bins", bins},
                          {"out", out}});

  // Centered log-magnitude grid, one CSV row per spectrum row.
  const std::string grid_path = join(out, "magnitude.csv");
  std::ofstream grid = open_out(grid_path);
  for (int u = 0; u < mag.height; ++u) {
    for (int v = 0; v < mag.width; ++v) {
      if (v > 0) grid << ',';
      grid << csv_num(std::log1p(mag.at(u, v)));
    }
    grid << '\n';
  }
  close_out(grid, grid_path);
  write_profile_csv(join(out, "profile.csv"), profile);

  std::cout << "spectrum of " << image_path << " (" << mag.height << "x" << mag.width << ", "
            << bins << " bins) written to " << out << "\n";
  return kExitOk;
}

// --- train -----------------------------------------------------------------

// Defaults (with FREQCROSS_SEED applied) merged with the file, then flags.
RunConfig merged_run_config(const std::string& config_path, bool seed_given, uint64_t seed,
                            bool epochs_given, int64_t epochs, const std::string& out_flag) {
  RunConfig defaults;
  if (const std::optional<uint64_t> seed_default = env_seed()) {
    defaults.train.seed = *seed_default;
  }
  RunConfig run = load_run_config(config_path, defaults);
  if (seed_given) run.train.seed = seed;
  if (epochs_given) run.train.epochs = epochs;
  if (!out_flag.empty()) run.out_dir = out_flag;
  run.validate();
  return run;
}

template <typename T>
int run_train_typed(const RunConfig& run, const std::string& resume_path) {
  const DatasetManifest manifest =
      load_manifest(run.manifest_path, manifest_format_for(run.manifest_path));
  ensure_dir(run.out_dir);
  save_run_config(run, join(run.out_dir, "config.json"));

  const std::string checkpoint_path = join(run.out_dir, "checkpoint.fqxc");
  TrainResult<T> result = resume_path.empty()
                              ? train<T>(run.model, manifest, run.train, checkpoint_path)
                              : resume<T>(resume_path, manifest, run.train.epochs);

  write_history_csv(join(run.out_dir, "history.csv"), result.history);
  write_steps_csv(join(run.out_dir, "steps.csv"), result.history);
  const std::string model_path =
      run.model_path.empty() ? join(run.out_dir, "model.fqxm") : run.model_path;
  save_model(result.model, model_path);
  const EvalResult val = evaluate<T>(result.model, manifest, Split::kVal, run.train.batch_size);
  write_metrics_json(join(run.out_dir, "metrics.json"), val.metrics);

  for (size_t e = 0; e < result.history.epochs.size(); ++e) {
    const EpochRecord& r = result.history.epochs[e];
    std::cout << "epoch " << e + 1 << ": train_loss " << csv_num(r.train_loss) << " train_acc "
              << csv_num(r.train_acc) << " val_loss " << csv_num(r.val_loss) << " val_acc "
              << csv_num(r.val_acc) << "\n";
  }
  std::cout << "model written to " << model_path << ", artifacts under " << run.out_dir << "\n";
  return kExitOk;
}

int run_train(const RunConfig& run, const std::string& resume_path) {
  // A resume continues with the checkpoint's stored precision; the config
  // file only supplies the (possibly extended) epoch target.
  const Dtype dtype =
      resume_path.empty() ? run.train.dtype : read_checkpoint_dtype(resume_path);
  return dtype == Dtype::kF32 ? run_train_typed<float>(run, resume_path)
                              : run_train_typed<double>(run, resume_path);
}

// --- eval ------------------------------------------------------------------

template <typename T>
int run_eval_typed(const std::string& model_path, const std::string& manifest_path,
                   const std::string& split_text, const std::string& out) {
  const Split split = parse_split(split_text);
  Model<T> model = load_model<T>(model_path);
  const DatasetManifest manifest = load_manifest(manifest_path, manifest_format_for(manifest_path));
  ensure_dir(out);
  echo_settings(out, json{{"command", "eval"},
                          {"model", model_path},
                          {"manifest", manifest_path},
                          {"split", split_text},
                          {"out", out}});

  const EvalResult ev = evaluate<T>(model, manifest, split);
  write_metrics_json(join(out, "metrics.json"), ev.metrics);
  write_roc_csv(join(out, "roc.csv"), ev.metrics.roc);
  write_pr_csv(join(out, "pr.csv"), ev.metrics.pr);
  write_confusion_csv(join(out, "confusion.csv"), ev.metrics.confusion);
  write_confidence_hist_csv(join(out, "confidence_hist.csv"),
                            confidence_histogram(ev.scored, 10));
  if (ev.scored.size() >= 3) {
    write_pca_csv(join(out, "pca.csv"), pca2(ev.fused), ev.scored.labels);
  } else {
    std::cerr << "pca.csv skipped: the scatter needs at least 3 samples, split has "
              << ev.scored.size() << "\n";
  }

  std::cout << "split " << split_text << ": accuracy " << csv_num(ev.metrics.basics.accuracy)
            << ", auc_roc " << csv_num(ev.metrics.roc.auc) << ", auc_pr "
            << csv_num(ev.metrics.pr.auc) << "; artifacts under " << out << "\n";
  return kExitOk;
}

int run_eval(const std::string& model_path, const std::string& manifest_path,
             const std::string& split_text, const std::string& out) {
  return read_model_dtype(model_path) == Dtype::kF32
             ? run_eval_typed<float>(model_path, manifest_path, split_text, out)
             : run_eval_typed<double>(model_path, manifest_path, split_text, out);
}

// --- detect ----------------------------------------------------------------

template <typename T>
int run_detect_typed(const std::string& model_path, const std::vector<std::string>& images) {
  Model<T> model = load_model<T>(model_path);
  AugmentConfig no_augment;
  no_augment.enabled = false;

  bool any_failed = false;
  for (const std::string& path : images) {
    try {
      Rng unused(0);
      const Sample sample = prepare_from_image(decode_image_file(path), model.config.input_side,
                                               no_augment, unused, model.config.radial_bins);
      const SampleBatch<T> batch = pack_batch<T>({sample});
      Rng fwd_rng(0);
      const ForwardResult<T> out =
          forward<T>(nullptr, model, batch.rgb, batch.spectrum, batch.profile, false, fwd_rng);
      const double p = static_cast<double>(out.p.values()[0]);
      std::cout << path << ',' << csv_num(p) << ',' << label_name(p >= 0.5 ? 1 : 0) << '\n';
    } catch (const Error& e) {
      std::cerr << path << ": " << e.what() << '\n';
      any_failed = true;
    }
  }
  return any_failed ? kExitRuntime : kExitOk;
}

int run_detect(const std::string& model_path, const std::vector<std::string>& images) {
  return read_model_dtype(model_path) == Dtype::kF32
             ? run_detect_typed<float>(model_path, images)
             : run_detect_typed<double>(model_path, images);
}

// --- ablate ----------------------------------------------------------------

template <typename T>
int run_ablate_typed(const RunConfig& run) {
  const DatasetManifest manifest =
      load_manifest(run.manifest_path, manifest_format_for(run.manifest_path));
  ensure_dir(run.out_dir);
  save_run_config(run, join(run.out_dir, "config.json"));

  const std::vector<AblationRow> rows = ablate<T>(run.model, manifest, run.train);
  write_ablation_csv(join(run.out_dir, "ablation.csv"), rows);
  for (const AblationRow& row : rows) {
    std::cout << row.name << ": auc_roc " << csv_num(row.metrics.roc.auc) << ", accuracy "
              << csv_num(row.metrics.basics.accuracy) << "\n";
  }
  std::cout << "ablation.csv written under " << run.out_dir << "\n";
  return kExitOk;
}

int run_ablate(const RunConfig& run) {
  return run.train.dtype == Dtype::kF32 ? run_ablate_typed<float>(run)
                                        : run_ablate_typed<double>(run);
}

// --- robustness ------------------------------------------------------------

// The standard sweep: three JPEG qualities, two noise levels, one blur, one
// resize round-trip. The sweep itself prepends the clean row.
std::vector<PerturbSpec> default_perturbations() {
  return {PerturbSpec::jpeg_sim(90),          PerturbSpec::jpeg_sim(70),
          PerturbSpec::jpeg_sim(50),          PerturbSpec::gaussian_noise(0.01),
          PerturbSpec::gaussian_noise(0.02),  PerturbSpec::gaussian_blur(1.0),
          PerturbSpec::resize_roundtrip(128)};
}

template <typename T>
int run_robustness_typed(const std::string& model_path, const std::string& manifest_path,
                         const std::string& out, uint64_t seed) {
  Model<T> model = load_model<T>(model_path);
  const DatasetManifest manifest = load_manifest(manifest_path, manifest_format_for(manifest_path));
  const std::vector<RobustnessRow> rows =
      robustness_sweep<T>(model, manifest, default_perturbations(), seed);

  ensure_dir(out);
  echo_settings(out, json{{"command", "robustness"},
                          {"model", model_path},
                          {"manifest", manifest_path},
                          {"seed", seed},
                          {"out", out}});
  write_robustness_csv(join(out, "robustness.csv"), rows);
  for (const RobustnessRow& row : rows) {
    std::cout << row.name << ": accuracy " << csv_num(row.accuracy) << ", drop "
              << csv_num(row.drop) << "\n";
  }
  return kExitOk;
}

int run_robustness(const std::string& model_path, const std::string& manifest_path,
                   const std::string& out, uint64_t seed) {
  return read_model_dtype(model_path) == Dtype::kF32
             ? run_robustness_typed<float>(model_path, manifest_path, out, seed)
             : run_robustness_typed<double>(model_path, manifest_path, out, seed);
}

// --- gradcheck -------------------------------------------------------------

Tensor<double> filled(const std::vector<int>& shape, uint64_t seed, bool requires_grad = false,
                      double scale = 1.0) {
  Tensor<double> t(shape, requires_grad);
  Rng rng(seed);
  for (double& v : t.values()) v = rng.uniform(-scale, scale);
  return t;
}

// Analytic-vs-finite-difference comparison for every layer kind and for the
// composed detector (tiny spatial preset at a reduced input side, so the
// probing loop stays fast). f64, h = 1e-4, tolerance 1e-4.
int run_gradcheck() {
  constexpr double kH = 1e-4;
  constexpr double kTol = 1e-4;
  bool all_passed = true;
  int groups = 0;
  double worst = 0.0;
  std::string worst_name;

  const auto report = [&](const std::string& scope, const GradCheckReport& r) {
    for (const GradCheckEntry& entry : r.entries) {
      const bool ok = entry.max_rel_err <= kTol;
      all_passed = all_passed && ok;
      ++groups;
      if (entry.max_rel_err > worst) {
        worst = entry.max_rel_err;
        worst_name = scope + "/" + entry.name;
      }
      std::cout << (ok ? "pass" : "FAIL") << " [" << scope << "] " << entry.name
                << " max_rel_err " << csv_num(entry.max_rel_err) << "\n";
    }
  };

  {  // dense stack: linear, relu, sigmoid, BCE with the L2 penalty
    Parameter<double> w1{"fc1.weight", filled({4, 5}, 301, true)};
    Parameter<double> b1{"fc1.bias", filled({4}, 302, true, 0.2)};
    Parameter<double> w2{"fc2.weight", filled({1, 4}, 303, true)};
    Parameter<double> b2{"fc2.bias", filled({1}, 304, true, 0.2)};
    const Tensor<double> x = filled({3, 5}, 305);
    const std::vector<double> y{1.0, 0.0, 1.0};
    const auto frag = [&](Tape<double>* tape) {
      Tensor<double> h = relu(tape, linear(tape, x, w1.tensor, b1.tensor));
      Tensor<double> p = sigmoid(tape, linear(tape, h, w2.tensor, b2.tensor));
      return bce_l2_loss(tape, p, y, {w1.tensor, w2.tensor}, 1e-3);
    };
    report("linear", gradcheck<double>(frag, {&w1, &b1, &w2, &b2}, kH, kTol));
  }

  {  // convolution block: conv2d, batchnorm (train), maxpool, global pool
    Parameter<double> cw{"conv.weight", filled({3, 2, 3, 3}, 310, true, 0.5)};
    Parameter<double> cb{"conv.bias", filled({3}, 311, true, 0.1)};
    BatchNorm2d<double> bn(3);
    bn.gamma.set_requires_grad(true);
    bn.beta.set_requires_grad(true);
    for (int c = 0; c < 3; ++c) {
      bn.gamma.values()[c] = 0.9 + 0.1 * c;
      bn.beta.values()[c] = 0.05 * c;
    }
    Parameter<double> gw{"bn.gamma", bn.gamma};
    Parameter<double> gb{"bn.beta", bn.beta};
    Parameter<double> lw{"head.weight", filled({1, 3}, 312, true)};
    Parameter<double> lb{"head.bias", filled({1}, 313, true, 0.2)};
    const Tensor<double> x = filled({4, 2, 6, 6}, 314);
    const std::vector<double> y{1.0, 0.0, 1.0, 0.0};
    const auto frag = [&](Tape<double>* tape) {
      Tensor<double> h = conv2d(tape, x, cw.tensor, cb.tensor, 1, 1);
      h = batchnorm2d(tape, h, bn, true);
      h = relu(tape, h);
      h = maxpool2d(tape, h, 2, 2);
      h = global_avg_pool(tape, h);
      Tensor<double> p = sigmoid(tape, linear(tape, h, lw.tensor, lb.tensor));
      return bce_l2_loss(tape, p, y, {cw.tensor, lw.tensor}, 1e-3);
    };
    report("conv_block", gradcheck<double>(frag, {&cw, &cb, &gw, &gb, &lw, &lb}, kH, kTol));
  }

  {  // structural ops: residual add and concat
    Parameter<double> w1{"branch.weight", filled({4, 4}, 320, true)};
    Parameter<double> b1{"branch.bias", filled({4}, 321, true, 0.2)};
    Parameter<double> w2{"head.weight", filled({1, 8}, 322, true)};
    Parameter<double> b2{"head.bias", filled({1}, 323, true, 0.2)};
    const Tensor<double> x = filled({3, 4}, 324);
    const std::vector<double> y{1.0, 1.0, 0.0};
    const auto frag = [&](Tape<double>* tape) {
      Tensor<double> h = relu(tape, linear(tape, x, w1.tensor, b1.tensor));
      Tensor<double> res = add(tape, h, x);
      Tensor<double> both = concat(tape, {res, h}, 1);
      Tensor<double> p = sigmoid(tape, linear(tape, both, w2.tensor, b2.tensor));
      return bce_l2_loss(tape, p, y, {}, 0.0);
    };
    report("add_concat", gradcheck<double>(frag, {&w1, &b1, &w2, &b2}, kH, kTol));
  }

  {  // dropout with a per-invocation derived mask stream
    Parameter<double> w{"head.weight", filled({1, 6}, 330, true)};
    Parameter<double> b{"head.bias", filled({1}, 331, true, 0.2)};
    const Tensor<double> x = filled({2, 6}, 332);
    const std::vector<double> y{0.0, 1.0};
    const auto frag = [&](Tape<double>* tape) {
      Rng rng = Rng::derive(333, 0);
      Tensor<double> h = dropout(tape, x, 0.5, rng, true);
      Tensor<double> p = sigmoid(tape, linear(tape, h, w.tensor, b.tensor));
      return bce_l2_loss(tape, p, y, {}, 0.0);
    };
    report("dropout", gradcheck<double>(frag, {&w, &b}, kH, kTol));
  }

  {  // the composed three-branch model, every parameter group probed
    ModelConfig cfg;
    cfg.spatial_preset = SpatialPreset::kTiny;
    cfg.freq_channels = {4, 6, 8};
    cfg.freq_out_dim = 16;
    cfg.radial_bins = 8;
    cfg.radial_hidden = 12;
    cfg.radial_out_dim = 8;
    cfg.head_hidden = 12;
    cfg.dropout_p = 0.25;
    cfg.input_side = 16;
    Rng init = Rng::derive(340, 0);
    Model<double> model = build_model<double>(cfg, init);
    const std::vector<Tensor<double>> penalized = model.weight_tensors();
    const Tensor<double> rgb = filled({2, 3, 16, 16}, 341);
    const Tensor<double> spectrum = filled({2, 1, 16, 16}, 342);
    const Tensor<double> profile = filled({2, 8}, 343);
    const std::vector<double> y{1.0, 0.0};
    const auto frag = [&](Tape<double>* tape) {
      Rng rng = Rng::derive(344, 0);
      ForwardResult<double> out = forward<double>(tape, model, rgb, spectrum, profile, true, rng);
      return bce_l2_loss<double>(tape, out.p, y, penalized, 1e-3);
    };
    std::vector<Parameter<double>> params = model.parameters();
    std::vector<Parameter<double>*> ptrs;
    ptrs.reserve(params.size());
    for (Parameter<double>& p : params) ptrs.push_back(&p);
    report("model", gradcheck<double>(frag, ptrs, kH, kTol, /*max_checks_per_param=*/4));
  }

  std::cout << "gradcheck: " << groups << " parameter groups, worst " << csv_num(worst) << " ("
            << worst_name << "): " << (all_passed ? "PASS" : "FAIL") << "\n";
  return all_passed ? kExitOk : kExitRuntime;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"multi-modal detector for AI-generated images: spatial, spectral, and "
               "radial-energy branches over a shared fusion head"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "freqcross 1.0.0");
  int threads = 0;
  app.add_option("--threads", threads, "cap worker threads; 0 uses all cores (results never vary)")
      ->check(CLI::NonNegativeNumber);

  CLI::App* fixtures = app.add_subcommand("fixtures", "generate the deterministic test corpus");
  std::string fx_out;
  int fx_count = 50;
  int fx_side = 64;
  double fx_gain = 3.0;
  uint64_t fx_seed = 0;
  fixtures->add_option("--out", fx_out, "corpus directory")->required();
  fixtures->add_option("--count", fx_count, "images per class")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  fixtures->add_option("--side", fx_side, "square image side")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  fixtures->add_option("--gain", fx_gain, "mid-band boost of the synthetic class; 1.0 = null corpus")
      ->capture_default_str();
  fixtures->add_option("--seed", fx_seed, "corpus seed (default: FREQCROSS_SEED or 0)");

  CLI::App* spectrum = app.add_subcommand("spectrum", "inspect one image's frequency content");
  std::string sp_image;
  int sp_bins = 30;
  std::string sp_out;
  spectrum->add_option("image", sp_image, "image to analyze")
      ->required()
      ->check(CLI::ExistingFile);
  spectrum->add_option("--bins", sp_bins, "radial energy bins")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  spectrum->add_option("--out", sp_out, "artifact directory")->required();

  CLI::App* train_cmd = app.add_subcommand("train", "train a detector from a config file");
  std::string tr_config;
  std::string tr_resume;
  uint64_t tr_seed = 0;
  int64_t tr_epochs = 0;
  std::string tr_out;
  train_cmd->add_option("--config", tr_config, "run config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--resume", tr_resume, "continue from this checkpoint")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--seed", tr_seed, "override train.seed");
  train_cmd->add_option("--epochs", tr_epochs, "override train.epochs")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--out", tr_out, "override paths.out");

  CLI::App* eval_cmd = app.add_subcommand("eval", "score a split and write every metric artifact");
  std::string ev_model;
  std::string ev_manifest;
  std::string ev_split = "test";
  std::string ev_out;
  eval_cmd->add_option("--model", ev_model, "model file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--manifest", ev_manifest, "dataset manifest")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--split", ev_split, "train, val, or test")->capture_default_str();
  eval_cmd->add_option("--out", ev_out, "artifact directory")->required();

  CLI::App* detect = app.add_subcommand("detect", "score images; prints path,score,label");
  std::string dt_model;
  std::vector<std::string> dt_images;
  detect->add_option("--model", dt_model, "model file")->required()->check(CLI::ExistingFile);
  detect->add_option("images", dt_images, "images to score")->required();

  CLI::App* ablate_cmd =
      app.add_subcommand("ablate", "train all seven modality variants and score each");
  std::string ab_config;
  uint64_t ab_seed = 0;
  std::string ab_out;
  ablate_cmd->add_option("--config", ab_config, "run config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  ablate_cmd->add_option("--seed", ab_seed, "override train.seed");
  ablate_cmd->add_option("--out", ab_out, "override paths.out");

  CLI::App* robustness = app.add_subcommand("robustness", "accuracy under standard perturbations");
  std::string rb_model;
  std::string rb_manifest;
  std::string rb_out = ".";
  uint64_t rb_seed = 0;
  robustness->add_option("--model", rb_model, "model file")->required()->check(CLI::ExistingFile);
  robustness->add_option("--manifest", rb_manifest, "dataset manifest")
      ->required()
      ->check(CLI::ExistingFile);
  robustness->add_option("--out", rb_out, "artifact directory")->capture_default_str();
  robustness->add_option("--seed", rb_seed, "noise stream seed (default: FREQCROSS_SEED or 0)");

  app.add_subcommand("gradcheck", "finite-difference check of every layer and the composed model");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (app.count("--threads") > 0) set_max_threads(threads);

    if (fixtures->parsed()) {
      if (fixtures->count("--seed") == 0) fx_seed = env_seed().value_or(0);
      return run_fixtures(fx_out, fx_count, fx_side, fx_gain, fx_seed);
    }
    if (spectrum->parsed()) return run_spectrum(sp_image, sp_bins, sp_out);
    if (train_cmd->parsed()) {
      const RunConfig run =
          merged_run_config(tr_config, train_cmd->count("--seed") > 0, tr_seed,
                            train_cmd->count("--epochs") > 0, tr_epochs, tr_out);
      return run_train(run, tr_resume);
    }
    if (eval_cmd->parsed()) return run_eval(ev_model, ev_manifest, ev_split, ev_out);
    if (detect->parsed()) return run_detect(dt_model, dt_images);
    if (ablate_cmd->parsed()) {
      const RunConfig run = merged_run_config(ab_config, ablate_cmd->count("--seed") > 0, ab_seed,
                                              false, 0, ab_out);
      return run_ablate(run);
    }
    if (robustness->parsed()) {
      if (robustness->count("--seed") == 0) rb_seed = env_seed().value_or(0);
      return run_robustness(rb_model, rb_manifest, rb_out, rb_seed);
    }
    return run_gradcheck();
  } catch (const Error& e) {
    std::cerr << "freqcross: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "freqcross: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace freqcross
