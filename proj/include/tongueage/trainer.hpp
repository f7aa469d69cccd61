#ifndef TONGUEAGE_TRAINER_HPP
#define TONGUEAGE_TRAINER_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "tongueage/augment.hpp"
#include "tongueage/dataio.hpp"
#include "tongueage/model.hpp"
#include "tongueage/optim.hpp"

namespace tongueage {

enum class Precision { float32, float64 };

std::string to_string(Precision p);
Precision parse_precision(const std::string& text);

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 128;
  double learning_rate = 0.001;
  double dropout_rate = 0.5;
  AugmentConfig augment = AugmentConfig::rotation(5.0);
  std::uint64_t seed = 0;
  Precision precision = Precision::float32;
  double rho = 0.9;
  double epsilon = 1e-7;
  // Data preparation
  std::size_t frame_stride = 150;
  double train_fraction = 0.8;
  SplitMode split_mode = SplitMode::frame;
  // Samples per forward/backward chunk inside a batch (memory bound only;
  // results depend on it through float summation order).
  std::size_t chunk_size = 32;

  void validate() const;
  RmsPropOptions optimizer() const { return {learning_rate, rho, epsilon}; }
};

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  double train_mse = 0.0;
  double val_mse = 0.0;
  double train_mae = 0.0;
  double val_mae = 0.0;
  double wall_seconds = 0.0;
  std::size_t train_samples = 0;  // samples stepped on this epoch (not exported)
};

inline constexpr const char* kMetricsHeader = "epoch,train_mse,val_mse,train_mae,val_mae,wall_seconds";

void write_metrics_csv(std::ostream& os, const std::vector<EpochMetrics>& history);
void write_metrics_csv(const std::string& path, const std::vector<EpochMetrics>& history);
std::vector<EpochMetrics> read_metrics_csv(std::istream& is);
std::vector<EpochMetrics> read_metrics_csv(const std::string& path);

struct EvalResult {
  double mse = 0.0;
  double mae = 0.0;
};

/// Inference-mode predictions for the selected samples, in order.
template <typename T>
std::vector<T> predict_samples(const Network<T>& net, const std::vector<Sample>& samples,
                               const std::vector<std::size_t>& indices, std::size_t chunk = 32);

template <typename T>
EvalResult evaluate(const Network<T>& net, const std::vector<Sample>& samples,
                    const std::vector<std::size_t>& indices, std::size_t chunk = 32);

/// All samples.
template <typename T>
EvalResult evaluate(const Network<T>& net, const std::vector<Sample>& samples);

template <typename T>
struct TrainResult {
  Network<T> model;       // parameters after the last epoch
  Network<T> best_model;  // parameters at the lowest validation MSE
  std::size_t best_epoch = 0;
  std::vector<EpochMetrics> history;
};

/// Called after each epoch with the metrics so far and the current model.
template <typename T>
using EpochCallback = std::function<void(const EpochMetrics&, const Network<T>&)>;

/// Fixed epoch budget; per epoch the training split is reshuffled with a
/// stream derived from (seed, epoch), batched (last batch kept short),
/// augmented per frame, and stepped with RMSprop; the validation split is
/// then evaluated without dropout or augmentation.
template <typename T>
TrainResult<T> train(Network<T> model, const Dataset& dataset, const TrainConfig& config,
                     const EpochCallback<T>& on_epoch = {});

enum class SeedMode { shared, fresh };

std::string to_string(SeedMode mode);
SeedMode parse_seed_mode(const std::string& text);

struct AblationRow {
  AugmentConfig strategy;
  double final_val_mse = 0.0;
  double best_val_mse = 0.0;
};

/// Nine settings: none, rotation 5/10/15/20 degrees, noise sigma 0.01/0.1/0.2/0.5.
std::vector<AugmentConfig> default_ablation_strategies();

/// Trains one freshly initialized age model per strategy. Shared mode
/// reuses config.seed for every row; fresh mode derives row i's seed from
/// (config.seed, i).
std::vector<AblationRow> run_ablation(const Dataset& dataset,
                                      const std::vector<AugmentConfig>& strategies,
                                      const TrainConfig& base, SeedMode seed_mode = SeedMode::shared);

/// CSV "strategy,parameter,val_mse,best_val_mse".
void write_ablation_csv(std::ostream& os, const std::vector<AblationRow>& rows);

}  // namespace tongueage

#endif  // TONGUEAGE_TRAINER_HPP
