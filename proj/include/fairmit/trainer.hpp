#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fairmit/augment.hpp"
#include "fairmit/core.hpp"
#include "fairmit/metrics.hpp"
#include "fairmit/mitigate.hpp"

namespace fairmit {

struct DenseLayer {
  std::size_t in_size = 0;
  std::size_t out_size = 0;
  std::vector<double> weights;  // out_size x in_size, row-major
  std::vector<double> bias;     // out_size
  bool frozen = false;
};

/// Fully-connected binary classifier: rectifier hidden units, dropout before
/// the output layer, single sigmoid output. Inputs are standardized with
/// per-feature mean/std fixed from the first training set the model sees.
struct MlpModel {
  std::vector<DenseLayer> layers;
  double dropout_rate = 0.2;
  std::vector<double> feature_mean;  // empty until fitted
  std::vector<double> feature_std;

  std::size_t input_size() const {
    return layers.empty() ? 0 : layers.front().in_size;
  }
  bool has_standardization() const { return !feature_mean.empty(); }
};

/// Feature vectors with binary labels. When the features are flattened
/// images the shape fields are set so augmentation can rebuild the raster.
struct Dataset {
  std::vector<std::vector<double>> features;
  std::vector<int> labels;
  std::size_t image_height = 0;
  std::size_t image_width = 0;
  std::size_t image_channels = 0;

  std::size_t size() const { return labels.size(); }
  bool is_image_data() const {
    return image_height > 0 && image_width > 0 && image_channels > 0;
  }
};

struct TrainConfig {
  std::size_t max_epochs = 20;
  std::size_t patience = 3;
  double lr0 = 0.05;
  double decay_rate = 0.9;  // lr(epoch) = lr0 * decay_rate^epoch
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  std::optional<ClassWeights> class_weights;
  std::optional<AugmentConfig> augment;
};

struct EpochStats {
  double train_loss = 0.0;
  double val_loss = 0.0;
  double learning_rate = 0.0;
  MetricReport val_report;
};

enum class StopReason { EarlyStop, MaxEpochs };

/// Epoch indices are zero-based. stopped_epoch is the last epoch executed;
/// best_epoch is the epoch whose parameters were returned. Under early
/// stopping, stopped_epoch - best_epoch == patience.
struct TrainHistory {
  std::vector<EpochStats> epochs;
  std::size_t stopped_epoch = 0;
  std::size_t best_epoch = 0;
  StopReason stop_reason = StopReason::MaxEpochs;
};

/// Glorot-uniform weights (variance 2 / (fan_in + fan_out)), zero biases.
/// layer_sizes runs input..output; the last size must be 1.
MlpModel init_model(std::span<const std::size_t> layer_sizes,
                    std::uint64_t seed);

/// Mean over samples of w(label) * [-y log p - (1-y) log(1-p)], with probs
/// clipped to [1e-7, 1 - 1e-7]. Weights default to 1.
double weighted_bce(std::span<const int> labels, std::span<const double> probs,
                    const std::optional<ClassWeights>& weights = {});

/// Deterministic forward pass, dropout disabled; output strictly in (0,1).
double predict(const MlpModel& model, std::span<const double> input);

std::vector<double> predict_batch(const MlpModel& model, const Dataset& data);

/// Scores every sample; record ids are the dataset indices.
std::vector<ScoreRecord> score_dataset(const MlpModel& model,
                                       const Dataset& data);

/// Mini-batch gradient descent on the weighted cross-entropy with
/// exponential learning-rate decay and patience-based early stopping on the
/// validation loss. Returns the parameters of the best validation epoch.
/// Frozen layers receive no updates. Fully deterministic per (seed, data,
/// config).
std::pair<MlpModel, TrainHistory> train(MlpModel model, const Dataset& train_set,
                                        const Dataset& val_set,
                                        const TrainConfig& cfg);

/// Freezes all but the last keep_trainable layers of the pretrained model,
/// then trains on the target data.
std::pair<MlpModel, TrainHistory> transfer(MlpModel pretrained,
                                           std::size_t keep_trainable,
                                           const Dataset& target_train,
                                           const Dataset& target_val,
                                           const TrainConfig& cfg);

/// Max relative error between analytic gradients and central finite
/// differences over every unfrozen parameter. eps must lie in [1e-7, 1e-3].
double gradient_check(const MlpModel& model, const Dataset& batch, double eps,
                      const std::optional<ClassWeights>& weights = {});

// Binary model file; load(save(m)) reproduces every parameter bit-exact.
void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace fairmit
