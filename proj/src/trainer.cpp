#include "tongueage/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tongueage/errors.hpp"

namespace tongueage {

namespace {

// Stream tags for Rng::derive.
constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kAugmentStream = 2;
constexpr std::uint64_t kDropoutStream = 3;

template <typename T>
Tensor<T> assemble_batch(const std::vector<Sample>& samples, const std::vector<std::size_t>& order,
                         std::size_t begin, std::size_t end, const AugmentConfig* augment,
                         const Rng& root, std::size_t epoch) {
  const std::size_t n = end - begin;
  Tensor<T> batch(Shape{n, kScanlines, kEchoReturns, 1});
  for (std::size_t k = 0; k < n; ++k) {
    TensorF frame = samples[order[begin + k]].frame();
    if (augment) {
      Rng rng = root.derive({kAugmentStream, epoch, begin + k});
      frame = random_augment(frame, *augment, rng);
    }
    std::copy(frame.values().begin(), frame.values().end(), batch.data().begin() + k * kFrameBytes);
  }
  return batch;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string to_string(Precision p) { return p == Precision::float32 ? "float32" : "float64"; }

Precision parse_precision(const std::string& text) {
  if (text == "float32" || text == "single") return Precision::float32;
  if (text == "float64" || text == "double") return Precision::float64;
  throw ConfigError("unknown precision '" + text + "' (expected float32 or float64)");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("dropout_rate must lie in [0, 1)");
  if (!(rho >= 0.0 && rho < 1.0)) throw ConfigError("rho must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  if (frame_stride < 1) throw ConfigError("frame_stride must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must lie in (0, 1)");
  if (chunk_size < 1) throw ConfigError("chunk_size must be >= 1");
  augment.validate();
}

void write_metrics_csv(std::ostream& os, const std::vector<EpochMetrics>& history) {
  os << kMetricsHeader << '\n';
  for (const auto& m : history)
    os << m.epoch << ',' << fmt(m.train_mse) << ',' << fmt(m.val_mse) << ',' << fmt(m.train_mae) << ','
       << fmt(m.val_mae) << ',' << fmt(m.wall_seconds) << '\n';
}

void write_metrics_csv(const std::string& path, const std::vector<EpochMetrics>& history) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw FormatError("cannot open metrics file for writing: " + path);
  write_metrics_csv(os, history);
}

std::vector<EpochMetrics> read_metrics_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kMetricsHeader)
    throw ParseError("metrics CSV header must be '" + std::string(kMetricsHeader) + "'");
  std::vector<EpochMetrics> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6) throw ParseError("metrics CSV row has " + std::to_string(cells.size()) + " columns");
    try {
      EpochMetrics m;
      m.epoch = std::stoull(cells[0]);
      m.train_mse = std::stod(cells[1]);
      m.val_mse = std::stod(cells[2]);
      m.train_mae = std::stod(cells[3]);
      m.val_mae = std::stod(cells[4]);
      m.wall_seconds = std::stod(cells[5]);
      out.push_back(m);
    } catch (const std::exception&) {
      throw ParseError("metrics CSV row is not numeric: " + line);
    }
  }
  return out;
}

std::vector<EpochMetrics> read_metrics_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open metrics file: " + path);
  return read_metrics_csv(is);
}

template <typename T>
std::vector<T> predict_samples(const Network<T>& net, const std::vector<Sample>& samples,
                               const std::vector<std::size_t>& indices, std::size_t chunk) {
  std::vector<T> out;
  out.reserve(indices.size());
  chunk = std::max<std::size_t>(1, chunk);
  const Rng unused(0);
  for (std::size_t begin = 0; begin < indices.size(); begin += chunk) {
    const std::size_t end = std::min(indices.size(), begin + chunk);
    // No augmentation and inference mode: validation data is never perturbed.
    const Tensor<T> batch = assemble_batch<T>(samples, indices, begin, end, nullptr, unused, 0);
    const Tensor<T> pred = predict(net, batch);
    out.insert(out.end(), pred.values().begin(), pred.values().end());
  }
  return out;
}

template <typename T>
EvalResult evaluate(const Network<T>& net, const std::vector<Sample>& samples,
                    const std::vector<std::size_t>& indices, std::size_t chunk) {
  if (indices.empty()) throw ConfigError("evaluation needs at least one sample");
  const std::vector<T> pred = predict_samples(net, samples, indices, chunk);
  double se = 0.0, ae = 0.0;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const double d = samples[indices[i]].age_years - static_cast<double>(pred[i]);
    se += d * d;
    ae += std::abs(d);
  }
  const double n = static_cast<double>(indices.size());
  return {se / n, ae / n};
}

template <typename T>
EvalResult evaluate(const Network<T>& net, const std::vector<Sample>& samples) {
  std::vector<std::size_t> all(samples.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return evaluate(net, samples, all);
}

template <typename T>
TrainResult<T> train(Network<T> model, const Dataset& dataset, const TrainConfig& config,
                     const EpochCallback<T>& on_epoch) {
  config.validate();
  if (dataset.split.size() != dataset.samples.size())
    throw ConfigError("dataset split assignment does not cover every sample");
  const std::vector<std::size_t> train_idx = dataset.indices(Split::train);
  const std::vector<std::size_t> val_idx = dataset.indices(Split::val);
  if (train_idx.empty() || val_idx.empty())
    throw ConfigError("training needs non-empty train and validation splits");

  const Rng root(config.seed);
  RmsPropState<T> optimizer(model, config.optimizer());
  TrainResult<T> result{model, model, 0, {}};
  double best_val = INFINITY;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::size_t> order = train_idx;
    Rng shuffle_rng = root.derive({kShuffleStream, epoch});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);

    double se = 0.0, ae = 0.0;
    std::size_t seen = 0, batch_no = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size, ++batch_no) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const Tensor<T> batch =
          assemble_batch<T>(dataset.samples, order, begin, end, &config.augment, root, epoch);
      Tensor<T> targets(Shape{end - begin, 1});
      for (std::size_t k = begin; k < end; ++k)
        targets[k - begin] = static_cast<T>(dataset.samples[order[k]].age_years);

      Rng dropout_rng = root.derive({kDropoutStream, epoch, batch_no});
      BackwardResult<T> step = backward(model, batch, targets, dropout_rng, config.chunk_size);
      if (!std::isfinite(step.loss))
        throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batch_no + 1));
      optimizer.step(model, step.gradients);

      const double n = static_cast<double>(end - begin);
      se += step.loss * n;
      ae += mae(step.predictions, targets) * n;
      seen += end - begin;
    }

    const EvalResult val = evaluate(model, dataset.samples, val_idx, config.chunk_size);
    EpochMetrics m;
    m.epoch = epoch;
    m.train_mse = se / static_cast<double>(seen);
    m.train_mae = ae / static_cast<double>(seen);
    m.val_mse = val.mse;
    m.val_mae = val.mae;
    m.train_samples = seen;
    if (!std::isfinite(m.val_mse))
      throw NumericalError("non-finite validation loss at epoch " + std::to_string(epoch));
    m.wall_seconds = std::max(
        1e-9, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    result.history.push_back(m);
    if (m.val_mse < best_val) {
      best_val = m.val_mse;
      result.best_model = model;
      result.best_epoch = epoch;
    }
    if (on_epoch) on_epoch(m, model);
  }
  result.model = std::move(model);
  return result;
}

std::string to_string(SeedMode mode) { return mode == SeedMode::shared ? "shared" : "fresh"; }

SeedMode parse_seed_mode(const std::string& text) {
  if (text == "shared") return SeedMode::shared;
  if (text == "fresh") return SeedMode::fresh;
  throw ConfigError("unknown seed mode '" + text + "' (expected shared or fresh)");
}

std::vector<AugmentConfig> default_ablation_strategies() {
  return {AugmentConfig::none(),         AugmentConfig::rotation(5),  AugmentConfig::rotation(10),
          AugmentConfig::rotation(15),   AugmentConfig::rotation(20), AugmentConfig::noise(0.01),
          AugmentConfig::noise(0.1),     AugmentConfig::noise(0.2),   AugmentConfig::noise(0.5)};
}

std::vector<AblationRow> run_ablation(const Dataset& dataset,
                                      const std::vector<AugmentConfig>& strategies,
                                      const TrainConfig& base, SeedMode seed_mode) {
  if (strategies.empty()) throw ConfigError("ablation needs at least one strategy");
  std::vector<AblationRow> rows;
  for (std::size_t i = 0; i < strategies.size(); ++i) {
    TrainConfig cfg = base;
    cfg.augment = strategies[i];
    if (seed_mode == SeedMode::fresh) cfg.seed = mix64(base.seed ^ mix64(i + 1));
    auto r = train(build_paper_model(cfg.seed, cfg.dropout_rate), dataset, cfg);
    double best = INFINITY;
    for (const auto& m : r.history) best = std::min(best, m.val_mse);
    rows.push_back({strategies[i], r.history.back().val_mse, best});
  }
  return rows;
}

void write_ablation_csv(std::ostream& os, const std::vector<AblationRow>& rows) {
  os << "strategy,parameter,val_mse,best_val_mse\n";
  for (const auto& r : rows) {
    const std::string param = r.strategy.mode == AugmentMode::none ? "/" : fmt(r.strategy.parameter());
    os << to_string(r.strategy.mode) << ',' << param << ',' << fmt(r.final_val_mse) << ','
       << fmt(r.best_val_mse) << '\n';
  }
}

#define TONGUEAGE_TRAINER(T)                                                                     \
  template std::vector<T> predict_samples(const Network<T>&, const std::vector<Sample>&,         \
                                          const std::vector<std::size_t>&, std::size_t);         \
  template EvalResult evaluate(const Network<T>&, const std::vector<Sample>&,                    \
                               const std::vector<std::size_t>&, std::size_t);                    \
  template EvalResult evaluate(const Network<T>&, const std::vector<Sample>&);                   \
  template TrainResult<T> train(Network<T>, const Dataset&, const TrainConfig&,                  \
                                const EpochCallback<T>&);

TONGUEAGE_TRAINER(float)
TONGUEAGE_TRAINER(double)

}  // namespace tongueage
