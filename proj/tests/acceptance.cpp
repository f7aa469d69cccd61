// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "augment_oracles.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"
#include "tiny_model.hpp"
#include "tongueage/checkpoint.hpp"
#include "tongueage/dataio.hpp"
#include "tongueage/errors.hpp"
#include "tongueage/kernels.hpp"
#include "tongueage/optim.hpp"
#include "tongueage/synth.hpp"
#include "tongueage/trainer.hpp"
#include "tongueage/visualize.hpp"

using namespace tongueage;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + ("failed: " + what);
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome architecture() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const Model m = build_paper_model(1);
  const auto rows = m.summary();
  const std::vector<std::pair<Shape, std::size_t>> expect = {
      {Shape{63, 412, 8}, 80},  {Shape{61, 410, 8}, 584}, {Shape{30, 205, 8}, 0},
      {Shape{30, 205, 8}, 584}, {Shape{28, 203, 4}, 292}, {Shape{14, 101, 4}, 0},
      {Shape{512}, 2896384},    {Shape{1}, 513}};
  o.require(rows.size() == expect.size(), "8 summary rows");
  for (std::size_t i = 0; i < std::min(rows.size(), expect.size()); ++i)
    o.require(rows[i].output_shape == expect[i].first && rows[i].params == expect[i].second,
              "row " + std::to_string(i + 1) + " " + rows[i].output_shape.str());
  o.require(m.param_count() == 2898437, "total 2,898,437");
  const double t = seconds_since(t0);
  o.require(t < 1.0, "runtime < 1 s");
  o.note("total " + std::to_string(m.param_count()) + ", " + fmt("%.3f s", t));
  return o;
}

Outcome gradients() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  constexpr int kDraws = 100;
  std::mt19937_64 gen(2024);
  const std::vector<std::pair<std::string, std::function<double()>>> suites = {
      {"conv_same", [&] { return gradcheck::conv(gen, Padding::same); }},
      {"conv_valid", [&] { return gradcheck::conv(gen, Padding::valid); }},
      {"maxpool", [&] { return gradcheck::maxpool(gen); }},
      {"dense", [&] { return gradcheck::dense(gen); }},
      {"relu", [&] { return gradcheck::relu(gen); }},
      {"dropout", [&] { return gradcheck::dropout(gen); }},
      {"flatten", [&] { return gradcheck::flatten(gen); }},
      {"tiny_model", [&] { return tiny::check_draw(gen()); }}};
  double overall = 0.0;
  for (const auto& [name, draw] : suites) {
    double worst = 0.0;
    for (int i = 0; i < kDraws; ++i) worst = std::max(worst, draw());
    o.require(worst < 1e-6, name + " max rel err " + fmt("%.3g", worst));
    overall = std::max(overall, worst);
  }
  const double t = seconds_since(t0);
  o.require(t < 60.0, "runtime < 60 s");
  o.note(std::to_string(suites.size()) + " suites x " + std::to_string(kDraws) + " draws, max rel err " +
         fmt("%.3g", overall) + ", " + fmt("%.1f s", t));
  return o;
}

Outcome optimizer() {
  Outcome o;
  const RmsPropOptions opt{0.001, 0.9, 1e-7};
  std::vector<double> theta{1.0}, g{1.0}, v{0.0};
  rmsprop_update<double>(theta, g, v, opt);
  const double v1 = 0.1, t1 = 1.0 - 0.001 / (std::sqrt(v1) + 1e-7);
  o.require(std::abs(v[0] - v1) < 1e-12 && std::abs(theta[0] - t1) < 1e-12, "single step");

  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> d(-2, 2);
  double worst = std::max(std::abs(v[0] - v1), std::abs(theta[0] - t1));
  for (int draw = 0; draw < 100; ++draw) {
    const double th0 = d(gen), ga = d(gen), gb = d(gen);
    std::vector<double> th{th0}, acc{0.0}, gr{ga};
    rmsprop_update<double>(th, gr, acc, opt);
    gr[0] = gb;
    rmsprop_update<double>(th, gr, acc, opt);
    const double a1 = 0.1 * ga * ga, x1 = th0 - 0.001 * ga / (std::sqrt(a1) + 1e-7);
    const double a2 = 0.9 * a1 + 0.1 * gb * gb, x2 = x1 - 0.001 * gb / (std::sqrt(a2) + 1e-7);
    worst = std::max({worst, std::abs(acc[0] - a2), std::abs(th[0] - x2)});
  }
  o.require(worst < 1e-12, "two-step recurrence");

  auto net = tiny::build(3);
  const double before = net.layers()[0].params.weights[0];
  RmsPropState<double> state(net, opt);
  std::vector<LayerParams<double>> grads;
  for (const auto& l : net.layers())
    grads.push_back(l.params.empty() ? LayerParams<double>{}
                                     : LayerParams<double>{TensorD(l.params.weights.shape(), 0.5),
                                                           TensorD(l.params.bias.shape(), 0.5)});
  state.step(net, grads);
  state.step(net, grads);
  const double a1 = 0.1 * 0.25, a2 = 0.9 * a1 + 0.1 * 0.25;
  const double expect = before - 0.001 * 0.5 / (std::sqrt(a1) + 1e-7) - 0.001 * 0.5 / (std::sqrt(a2) + 1e-7);
  const double err = std::abs(net.layers()[0].params.weights[0] - expect);
  o.require(err < 1e-12, "network state two-step");
  o.note("max abs err " + fmt("%.3g", std::max(worst, err)));
  return o;
}

Outcome loss() {
  Outcome o;
  const TensorD p(Shape{2, 1}, {3.0, 1.0}), t(Shape{2, 1}, {1.0, 1.0});
  const double l = mse_loss(p, t).loss;
  o.require(l == 2.0, "mse_loss([3,1],[1,1]) == 2.0, got " + fmt("%.17g", l));
  std::mt19937_64 gen(4);
  double worst = oracle::relative_error(
      mse_loss(p, t).grad, oracle::numeric_gradient([&](const TensorD& q) { return mse_loss(q, t).loss; }, p));
  for (int draw = 0; draw < 100; ++draw) {
    const std::size_t b = 1 + draw % 9;
    const TensorD pr = oracle::random_tensor(Shape{b, 1}, gen, -5, 5), tr = oracle::random_tensor(Shape{b, 1}, gen, -5, 5);
    auto f = [&](const TensorD& q) { return mse_loss(q, tr).loss; };
    worst = std::max(worst, oracle::relative_error(mse_loss(pr, tr).grad, oracle::numeric_gradient(f, pr)));
  }
  o.require(worst < 1e-9, "gradient vs finite differences");
  o.note("loss " + fmt("%.17g", l) + ", max grad rel err " + fmt("%.3g", worst));
  return o;
}

Outcome augmentation() {
  Outcome o;
  Rng frame_rng(5);
  const TensorF speckled = render_synthetic_frame(9.0, frame_rng);
  o.require(rotate(speckled, 0.0) == speckled, "rotation 0 identity");
  Rng rng(6);
  o.require(random_augment(speckled, AugmentConfig::noise(0.0), rng) == speckled, "noise sigma 0 identity");

  double worst = 0.0;
  std::size_t interior = 0;
  for (double age : {5.0, 9.0, 13.0})
    for (double angle : {5.0, -5.0, 2.0}) {
      const auto d = augment_oracle::inverse_pair_deviation(augment_oracle::clean_frame(age), angle);
      worst = std::max(worst, d.max_abs);
      interior = d.interior;
    }
  o.require(worst < 0.05, "rotation inverse pair interior deviation " + fmt("%.4f", worst));

  const TensorF half(Shape{1000, 1000, 1}, 0.5f);
  Rng noise_rng(7);
  const double sd = augment_oracle::noise_std(half, random_augment(half, AugmentConfig::noise(0.1), noise_rng));
  o.require(std::abs(sd - 0.1) <= 0.003, "noise std " + fmt("%.5f", sd));
  o.note("inverse-pair max dev " + fmt("%.4f", worst) + " over " + std::to_string(interior) +
         " interior px, noise std " + fmt("%.5f", sd) + " at 1e6 samples");
  return o;
}

Dataset synthetic_dataset(std::size_t recordings, std::uint64_t seed) {
  SynthOptions so;
  so.frames_per_recording = 1;
  std::vector<Sample> samples;
  for (const auto& r : synth_generate(recordings, seed, {}, so))
    for (auto& s : recording_samples(r, 150)) samples.push_back(std::move(s));
  return split_dataset(std::move(samples), 0.8, seed);
}

Outcome learning() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const Dataset ds = synthetic_dataset(320, 42);
  const std::size_t n_train = ds.indices(Split::train).size(), n_val = ds.indices(Split::val).size();
  o.require(n_train == 256 && n_val == 64, "256/64 split");
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.seed = 42;
  const auto r = train(build_paper_model(cfg.seed, cfg.dropout_rate), ds, cfg,
                       EpochCallback<float>([](const EpochMetrics& m, const Model&) {
                         std::fprintf(stderr, "  epoch %2zu train_mse %8.4f val_mse %8.4f (%.1fs)\n", m.epoch,
                                      m.train_mse, m.val_mse, m.wall_seconds);
                       }));
  const double baseline = mean_age_baseline(ds);
  const double final_val = r.history.back().val_mse;
  const double t = seconds_since(t0);
  o.require(r.history.size() == 30, "30 epochs");
  o.require(final_val < baseline, "final val MSE below baseline");
  o.require(t < 15 * 60.0, "runtime < 15 min");
  o.note("final val MSE " + fmt("%.4f", final_val) + ", best " +
         fmt("%.4f", r.history[r.best_epoch - 1].val_mse) + " (epoch " + std::to_string(r.best_epoch) +
         "), baseline " + fmt("%.4f", baseline) + ", " + fmt("%.0f s", t));
  return o;
}

/// metrics.csv with the wall_seconds column removed.
std::string without_wall_clock(const std::string& csv) {
  std::istringstream is(csv);
  std::string line, out;
  while (std::getline(is, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

Outcome determinism() {
  Outcome o;
  const Dataset ds = synthetic_dataset(40, 11);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 8;
  cfg.seed = 11;
  const fs::path root = fs::temp_directory_path() / "tongueage_acceptance_det";
  fs::remove_all(root);
  const int threads_before = kernels::max_threads();
  std::vector<std::string> csv, ckpt_best, ckpt_last;
  for (int run = 0; run < 2; ++run) {
    kernels::set_threads(run == 0 ? 1 : 3);
    const fs::path dir = root / std::to_string(run);
    fs::create_directories(dir);
    const auto r = train(build_paper_model(cfg.seed, cfg.dropout_rate), ds, cfg);
    write_metrics_csv((dir / "metrics.csv").string(), r.history);
    save_checkpoint(r.best_model, (dir / "model.ckpt").string());
    save_checkpoint(r.model, (dir / "last.ckpt").string());
    auto text = [](const fs::path& p) {
      const auto b = read_file_bytes(p.string());
      return std::string(b.begin(), b.end());
    };
    csv.push_back(text(dir / "metrics.csv"));
    ckpt_best.push_back(text(dir / "model.ckpt"));
    ckpt_last.push_back(text(dir / "last.ckpt"));
  }
  kernels::set_threads(threads_before);
  o.require(without_wall_clock(csv[0]) == without_wall_clock(csv[1]),
            "metrics CSV bytes identical outside wall_seconds");
  o.require(ckpt_best[0] == ckpt_best[1] && ckpt_last[0] == ckpt_last[1], "checkpoints byte-identical");
  o.note("3-epoch age-model runs on 1 vs 3 threads; metrics CSV identical except the wall_seconds timing "
         "column, best and last checkpoints byte-identical (" + std::to_string(ckpt_best[0].size()) + " bytes)");
  o.note(csv[0] == csv[1] ? "full CSV identical" : "wall_seconds differs as expected of a timing column");
  fs::remove_all(root);
  return o;
}

Outcome plumbing() {
  Outcome o;
  std::vector<std::uint8_t> raw(2 * kFrameBytes + 5, 7);
  bool rejected = false;
  try {
    load_recording(raw, ParamFile{});
  } catch (const FormatError&) {
    rejected = true;
  }
  o.require(rejected, "non-divisible raw rejected");

  raw.assign(450 * kFrameBytes, 0);
  for (std::size_t f = 0; f < 450; ++f) raw[f * kFrameBytes] = static_cast<std::uint8_t>(f % 256);
  const Recording rec = load_recording(raw, ParamFile{});
  const auto frames = sample_frames(rec, 150);
  o.require(rec.frames.size() == 450 && frames.size() == 3, "450 frames at stride 150 give 3");
  o.require(frames.size() == 3 && frames[1].at(0, 0, 0) == 150 / 255.0f, "sampled frames are 0,150,300");

  for (std::size_t n : {10ul, 97ul, 320ul, 24449ul}) {
    std::vector<Sample> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i].age_years = 4.0 + static_cast<double>(i % 12);
    const Dataset d = split_dataset(std::move(s), 0.8, 1);
    auto tr = d.indices(Split::train), va = d.indices(Split::val);
    std::vector<std::size_t> all = tr;
    all.insert(all.end(), va.begin(), va.end());
    std::sort(all.begin(), all.end());
    bool partition = all.size() == n;
    for (std::size_t i = 0; partition && i < n; ++i) partition = all[i] == i;
    o.require(partition, "split of " + std::to_string(n) + " is a partition");
    o.require(std::abs(static_cast<double>(tr.size()) - 0.8 * static_cast<double>(n)) <= 1.0,
              "split of " + std::to_string(n) + " within one sample of 80%");
  }
  const double age = parse_age("8y 4m");
  o.require(age == 8.0 + 4.0 / 12.0, "\"8y 4m\" parses to 8+4/12");
  o.note("remainder rejected, 450/150 -> 3 frames, splits exact to one sample, \"8y 4m\" = " + fmt("%.6f", age));
  return o;
}

Outcome visualization() {
  Outcome o;
  const Model m = build_paper_model(9);
  Rng rng(9);
  const TensorF frame = render_synthetic_frame(10.0, rng);
  const auto digest = parameter_digest(m);
  const auto set = extract_activations(m, frame, {"conv2d_1", "max_pooling2d_2"});
  o.require(set.entries.size() == 2, "two entries");
  if (set.entries.size() == 2) {
    o.require(set.entries[0].activation.shape() == Shape{63, 412, 8}, "first conv shape (63, 412, 8)");
    o.require(set.entries[1].activation.shape() == Shape{14, 101, 4}, "last pool shape (14, 101, 4)");
  }
  const fs::path a = fs::temp_directory_path() / "tongueage_acceptance_vis_a";
  const fs::path b = fs::temp_directory_path() / "tongueage_acceptance_vis_b";
  fs::remove_all(a);
  fs::remove_all(b);
  const auto files = export_activations(set, a.string());
  export_activations(extract_activations(m, frame, {"conv2d_1", "max_pooling2d_2"}), b.string());
  bool same = !files.empty();
  for (const auto& f : files) same = same && read_file_bytes((a / f).string()) == read_file_bytes((b / f).string());
  o.require(same, "heatmap export byte-deterministic");
  o.require(parameter_digest(m) == digest, "parameter digest unchanged");
  o.note(std::to_string(files.size()) + " files identical across exports, digest unchanged");
  fs::remove_all(a);
  fs::remove_all(b);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"architecture", architecture}, {"gradient suite", gradients},    {"optimizer", optimizer},
      {"loss", loss},                 {"augmentation", augmentation},   {"desk-scale learning", learning},
      {"determinism", determinism},   {"data plumbing", plumbing},      {"visualization", visualization}};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += o.pass ? 0 : 1;
    std::printf("criterion %zu (%s): %s - %s\n", i + 1, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
