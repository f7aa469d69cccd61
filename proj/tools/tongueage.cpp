// tongueage: synthetic data, training, evaluation, ablation, prediction,
// inspection and visualization from one executable.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data or format
// error, 3 numerical failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "tongueage/checkpoint.hpp"
#include "tongueage/config.hpp"
#include "tongueage/errors.hpp"
#include "tongueage/synth.hpp"
#include "tongueage/trainer.hpp"
#include "tongueage/visualize.hpp"

namespace fs = std::filesystem;
using namespace tongueage;

namespace {

using Entries = std::vector<std::pair<std::string, std::string>>;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string grouped(std::size_t n) {
  std::string s = std::to_string(n);
  for (int i = static_cast<int>(s.size()) - 3; i > 0; i -= 3) s.insert(static_cast<std::size_t>(i), ",");
  return s;
}

void print_resolved(const std::string& command, const Entries& entries) {
  std::cerr << "resolved config (" << command << "):\n";
  for (const auto& [k, v] : entries) std::cerr << "  " << k << "=" << v << "\n";
}

/// Seed given on the command line, else TONGUEAGE_SEED, else 0.
std::uint64_t default_seed() {
  const char* env = std::getenv("TONGUEAGE_SEED");
  if (!env || !*env) return 0;
  TrainConfig probe;
  apply_config_value(probe, "seed", env);
  return probe.seed;
}

/// Training flags mirroring TrainConfig plus --config; flags win over the file.
struct TrainFlags {
  std::string config_path;
  std::map<std::string, std::string> values;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "key=value config file");
    for (const auto& key : train_config_keys()) {
      std::string flag = key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      app->add_option("--" + flag, values[key], "TrainConfig." + key);
    }
  }

  TrainConfig resolve(CLI::App* app) const {
    TrainConfig cfg;
    cfg.seed = default_seed();
    if (!config_path.empty()) cfg = load_train_config(config_path, cfg);
    for (const auto& key : train_config_keys()) {
      std::string flag = key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      if (app->count("--" + flag) > 0) apply_config_value(cfg, key, values.at(key));
    }
    cfg.validate();
    cfg.augment.validate();
    return cfg;
  }
};

Dataset load_dataset(const std::string& dir, const TrainConfig& cfg) {
  std::vector<Sample> samples = load_samples(dir, cfg.frame_stride);
  std::cerr << "loaded " << samples.size() << " frames from " << dir << "\n";
  return split_dataset(std::move(samples), cfg.train_fraction, cfg.seed, cfg.split_mode);
}

Manifest checkpoint_extra(const TrainConfig& cfg, std::size_t epoch, double val_mse) {
  Manifest m;
  m.set("epoch", std::to_string(epoch));
  m.set("val_mse", num(val_mse));
  m.set("config_digest", config_digest(cfg));
  m.set("precision", to_string(cfg.precision));
  return m;
}

template <typename T>
int run_training(const Dataset& ds, const TrainConfig& cfg, const fs::path& out) {
  Network<T> init = build_paper_model(cfg.seed, cfg.dropout_rate).template cast<T>();
  const auto result = train(init, ds, cfg, EpochCallback<T>([](const EpochMetrics& m, const Network<T>&) {
                              std::fprintf(stderr, "epoch %zu train_mse %.6g val_mse %.6g val_mae %.6g (%.1fs)\n",
                                           m.epoch, m.train_mse, m.val_mse, m.val_mae, m.wall_seconds);
                            }));
  fs::create_directories(out);
  write_metrics_csv((out / "metrics.csv").string(), result.history);
  const auto& best = result.history[result.best_epoch - 1];
  save_checkpoint(result.best_model.template cast<float>(), (out / "model.ckpt").string(),
                  checkpoint_extra(cfg, best.epoch, best.val_mse));
  save_checkpoint(result.model.template cast<float>(), (out / "last.ckpt").string(),
                  checkpoint_extra(cfg, result.history.back().epoch, result.history.back().val_mse));
  std::printf("best_epoch=%zu\nbest_val_mse=%.9g\nfinal_val_mse=%.9g\nbaseline_mse=%.9g\n", best.epoch,
              best.val_mse, result.history.back().val_mse, mean_age_baseline(ds));
  return 0;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

/// Frames to run on: a raw recording (stride-sampled) or a single-frame raw file.
std::vector<TensorF> input_frames(const std::string& raw, const std::string& param, const std::string& frame,
                                  std::size_t stride) {
  if (!frame.empty() == !raw.empty()) throw ConfigError("give exactly one of --raw or --frame");
  if (!frame.empty()) {
    const auto bytes = read_file_bytes(frame);
    if (bytes.size() != kFrameBytes)
      throw FormatError("frame file " + frame + " has " + std::to_string(bytes.size()) + " bytes, expected " +
                        std::to_string(kFrameBytes));
    return load_recording(bytes, ParamFile{}).frames;
  }
  const std::string p = param.empty() ? fs::path(raw).replace_extension(".param").string() : param;
  return sample_frames(load_recording_file(raw, p), stride);
}

int cmd_synth(const std::string& out, std::size_t n, std::uint64_t seed, std::size_t frames, double min_age,
              double max_age, double speckle) {
  SynthOptions opt;
  opt.frames_per_recording = frames;
  opt.speckle = speckle;
  validate_age(min_age);
  validate_age(max_age);
  if (min_age > max_age) throw ConfigError("--min-age exceeds --max-age");
  if (n == 0 || frames == 0) throw ConfigError("--recordings and --frames must be >= 1");
  print_resolved("synth", {{"out", out}, {"recordings", std::to_string(n)}, {"seed", std::to_string(seed)},
                           {"frames", std::to_string(frames)}, {"min_age", num(min_age)},
                           {"max_age", num(max_age)}, {"speckle", num(speckle)}});
  write_data_dir(out, synth_generate(n, seed, {min_age, max_age}, opt));
  std::printf("wrote %zu recordings to %s\n", n, out.c_str());
  return 0;
}

int cmd_inspect(const std::string& model_path) {
  const Model m = model_path.empty() ? build_paper_model(0) : load_checkpoint(model_path).model;
  print_resolved("inspect", {{"model", model_path.empty() ? "(default architecture)" : model_path}});
  std::printf("%-18s %-26s %-16s %s\n", "Layer", "Type", "Output Shape", "Param #");
  for (const auto& r : m.summary())
    std::printf("%-18s %-26s %-16s %s\n", r.name.c_str(), r.type.c_str(), r.output_shape.str().c_str(),
                grouped(r.params).c_str());
  std::printf("Total params: %s\n", grouped(m.param_count()).c_str());
  return 0;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"Age estimation from raw ultrasound tongue frames"};
  app.require_subcommand(1);

  auto* synth = app.add_subcommand("synth", "write a synthetic data directory");
  std::string synth_out;
  std::size_t recordings = 20, frames = 4;
  std::uint64_t synth_seed = 0;
  double min_age = 5, max_age = 13, speckle = 0.25;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--recordings", recordings, "number of recordings");
  synth->add_option("--frames", frames, "frames per recording");
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--min-age", min_age, "youngest age in years");
  synth->add_option("--max-age", max_age, "oldest age in years");
  synth->add_option("--speckle", speckle, "multiplicative speckle std");

  auto* train_cmd = app.add_subcommand("train", "train the age model on a data directory");
  std::string data_dir, train_out = "run";
  TrainFlags train_flags;
  train_cmd->add_option("--data", data_dir, "data directory with manifest.csv")->required();
  train_cmd->add_option("--out", train_out, "run directory");
  train_flags.attach(train_cmd);

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string eval_model, eval_data, eval_split = "all";
  TrainFlags eval_flags;
  eval_cmd->add_option("--model", eval_model, "checkpoint")->required();
  eval_cmd->add_option("--data", eval_data, "data directory")->required();
  eval_cmd->add_option("--split", eval_split, "all, train or val")->check(CLI::IsMember({"all", "train", "val"}));
  eval_flags.attach(eval_cmd);

  auto* ablate = app.add_subcommand("ablate", "train once per augmentation strategy");
  std::string ablate_data, ablate_out = "ablation", strategies, seed_mode = "shared";
  TrainFlags ablate_flags;
  ablate->add_option("--data", ablate_data, "data directory")->required();
  ablate->add_option("--out", ablate_out, "output directory");
  ablate->add_option("--strategies", strategies, "comma list, e.g. none,rotation:5 (default: all nine)");
  ablate->add_option("--seed-mode", seed_mode, "shared or fresh")->check(CLI::IsMember({"shared", "fresh"}));
  ablate_flags.attach(ablate);

  auto* predict_cmd = app.add_subcommand("predict", "predict ages for a recording or a frame");
  std::string pred_model, pred_raw, pred_param, pred_frame, pred_out;
  std::size_t pred_stride = 150;
  predict_cmd->add_option("--model", pred_model, "checkpoint")->required();
  predict_cmd->add_option("--raw", pred_raw, "raw recording");
  predict_cmd->add_option("--param", pred_param, "param file (default: raw path with .param)");
  predict_cmd->add_option("--frame", pred_frame, "single-frame raw file");
  predict_cmd->add_option("--frame-stride", pred_stride, "frame sampling stride for --raw");
  predict_cmd->add_option("--out", pred_out, "CSV path (default: standard output)");

  auto* inspect = app.add_subcommand("inspect", "print the architecture table");
  std::string inspect_model;
  inspect->add_option("--model", inspect_model, "checkpoint (default: freshly built age model)");

  auto* vis = app.add_subcommand("visualize", "export activation images and training curves");
  std::string vis_model, vis_raw, vis_param, vis_frame, vis_layers, vis_out = "vis", vis_metrics;
  std::size_t vis_index = 0;
  vis->add_option("--model", vis_model, "checkpoint");
  vis->add_option("--raw", vis_raw, "raw recording");
  vis->add_option("--param", vis_param, "param file");
  vis->add_option("--frame", vis_frame, "single-frame raw file");
  vis->add_option("--frame-index", vis_index, "frame of --raw to use");
  vis->add_option("--layers", vis_layers, "comma list of layer names (default: all before flatten)");
  vis->add_option("--metrics", vis_metrics, "metrics.csv to plot");
  vis->add_option("--out", vis_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*synth) {
    if (synth->count("--seed") == 0) synth_seed = default_seed();
    return cmd_synth(synth_out, recordings, synth_seed, frames, min_age, max_age, speckle);
  }

  if (*train_cmd) {
    const TrainConfig cfg = train_flags.resolve(train_cmd);
    Entries e = {{"data", data_dir}, {"out", train_out}};
    for (const auto& kv : config_entries(cfg)) e.push_back(kv);
    print_resolved("train", e);
    const Dataset ds = load_dataset(data_dir, cfg);
    fs::create_directories(train_out);
    std::ofstream(fs::path(train_out) / "config.txt") << describe(cfg);
    return cfg.precision == Precision::float64 ? run_training<double>(ds, cfg, train_out)
                                               : run_training<float>(ds, cfg, train_out);
  }

  if (*eval_cmd) {
    const TrainConfig cfg = eval_flags.resolve(eval_cmd);
    Entries e = {{"model", eval_model}, {"data", eval_data}, {"split", eval_split}};
    for (const auto& kv : config_entries(cfg)) e.push_back(kv);
    print_resolved("eval", e);
    const Model m = load_checkpoint(eval_model).model;
    const Dataset ds = load_dataset(eval_data, cfg);
    std::vector<std::size_t> idx;
    if (eval_split == "all")
      for (std::size_t i = 0; i < ds.samples.size(); ++i) idx.push_back(i);
    else
      idx = ds.indices(eval_split == "train" ? Split::train : Split::val);
    const EvalResult r = evaluate(m, ds.samples, idx, cfg.chunk_size);
    std::printf("samples=%zu\nmse=%.9g\nmae=%.9g\nbaseline_mse=%.9g\n", idx.size(), r.mse, r.mae,
                mean_age_baseline(ds));
    return 0;
  }

  if (*ablate) {
    const TrainConfig cfg = ablate_flags.resolve(ablate);
    std::vector<AugmentConfig> list;
    if (strategies.empty())
      list = default_ablation_strategies();
    else
      for (const auto& s : split_list(strategies)) list.push_back(AugmentConfig::parse(s));
    std::string labels;
    for (const auto& s : list) labels += (labels.empty() ? "" : ",") + s.label();
    Entries e = {{"data", ablate_data}, {"out", ablate_out}, {"strategies", labels}, {"seed_mode", seed_mode}};
    for (const auto& kv : config_entries(cfg)) e.push_back(kv);
    print_resolved("ablate", e);
    const Dataset ds = load_dataset(ablate_data, cfg);
    const auto rows = run_ablation(ds, list, cfg, parse_seed_mode(seed_mode));
    fs::create_directories(ablate_out);
    std::ofstream os(fs::path(ablate_out) / "ablation.csv");
    write_ablation_csv(os, rows);
    write_ablation_csv(std::cout, rows);
    return 0;
  }

  if (*predict_cmd) {
    print_resolved("predict", {{"model", pred_model}, {"raw", pred_raw}, {"param", pred_param},
                               {"frame", pred_frame}, {"frame_stride", std::to_string(pred_stride)},
                               {"out", pred_out.empty() ? "-" : pred_out}});
    if (pred_stride == 0) throw ConfigError("--frame-stride must be >= 1");
    const Model m = load_checkpoint(pred_model).model;
    const auto frames = input_frames(pred_raw, pred_param, pred_frame, pred_stride);
    std::vector<Sample> samples;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < frames.size(); ++i) {
      samples.push_back(Sample::from_frame(frames[i], 0.0, ""));
      idx.push_back(i);
    }
    const std::vector<float> ages = predict_samples(m, samples, idx);
    std::ostringstream csv;
    csv << "frame,age_years\n";
    for (std::size_t i = 0; i < ages.size(); ++i) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%zu,%.9g\n", i * pred_stride, static_cast<double>(ages[i]));
      csv << buf;
    }
    if (pred_out.empty())
      std::cout << csv.str();
    else
      std::ofstream(pred_out) << csv.str();
    return 0;
  }

  if (*inspect) return cmd_inspect(inspect_model);

  if (*vis) {
    print_resolved("visualize", {{"model", vis_model}, {"raw", vis_raw}, {"param", vis_param},
                                 {"frame", vis_frame}, {"frame_index", std::to_string(vis_index)},
                                 {"layers", vis_layers.empty() ? "(all before flatten)" : vis_layers},
                                 {"metrics", vis_metrics}, {"out", vis_out}});
    if (vis_model.empty() && vis_metrics.empty()) throw ConfigError("give --model and a frame, or --metrics");
    fs::create_directories(vis_out);
    std::size_t written = 0;
    if (!vis_model.empty()) {
      const Model m = load_checkpoint(vis_model).model;
      const auto frames = input_frames(vis_raw, vis_param, vis_frame, 1);
      if (vis_index >= frames.size())
        throw ConfigError("--frame-index " + std::to_string(vis_index) + " out of range (" +
                          std::to_string(frames.size()) + " frames)");
      const auto set = extract_activations(m, frames[vis_index], split_list(vis_layers));
      write_pgm((fs::path(vis_out) / "input.pgm").string(), render_grayscale(frames[vis_index]));
      written += 1 + export_activations(set, vis_out).size();
      for (const auto& entry : set.entries)
        std::printf("%s %s min=%.9g max=%.9g\n", entry.layer.c_str(), entry.activation.shape().str().c_str(),
                    entry.min, entry.max);
    }
    if (!vis_metrics.empty()) {
      export_curves(read_metrics_csv(vis_metrics), vis_out);
      written += 2;
    }
    std::printf("wrote %zu files to %s\n", written, vis_out.c_str());
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const LookupError& e) {
    std::cerr << "lookup error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  }
}
