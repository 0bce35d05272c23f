#include "fairmit/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>

#include "fairmit/errors.hpp"

namespace fairmit {

namespace {

constexpr double kProbEpsilon = 1e-7;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double sample_weight(int label, const std::optional<ClassWeights>& weights) {
  if (!weights) return 1.0;
  return label == kMale ? weights->male : weights->female;
}

void require_dataset(const Dataset& data, const char* what) {
  if (data.size() == 0) {
    throw input_error(std::string(what) + " set is empty");
  }
  if (data.features.size() != data.labels.size()) {
    throw input_error(std::string(what) + " features/labels length mismatch");
  }
}

void require_both_classes(const Dataset& data) {
  bool male = false;
  bool female = false;
  for (int label : data.labels) {
    (label == kMale ? male : female) = true;
  }
  if (!male || !female) {
    throw input_error("training set must contain both classes");
  }
}

std::vector<double> standardize(const MlpModel& model,
                                std::span<const double> input) {
  std::vector<double> out(input.begin(), input.end());
  if (model.has_standardization()) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = (out[i] - model.feature_mean[i]) / model.feature_std[i];
    }
  }
  return out;
}

void fit_standardization(MlpModel& model, const Dataset& train_set) {
  const std::size_t dim = model.input_size();
  std::vector<double> mean(dim, 0.0);
  std::vector<double> var(dim, 0.0);
  const double n = static_cast<double>(train_set.size());
  for (const auto& row : train_set.features) {
    for (std::size_t i = 0; i < dim; ++i) {
      mean[i] += row[i];
    }
  }
  for (std::size_t i = 0; i < dim; ++i) {
    mean[i] /= n;
  }
  for (const auto& row : train_set.features) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = row[i] - mean[i];
      var[i] += d * d;
    }
  }
  std::vector<double> std_dev(dim, 1.0);
  for (std::size_t i = 0; i < dim; ++i) {
    const double s = std::sqrt(var[i] / n);
    std_dev[i] = s > 0.0 ? s : 1.0;
  }
  model.feature_mean = std::move(mean);
  model.feature_std = std::move(std_dev);
}

// Activations of one forward pass; layer_inputs[l] feeds layer l.
struct ForwardState {
  std::vector<std::vector<double>> layer_inputs;
  std::vector<std::vector<double>> pre_activations;
  double prob = 0.0;
};

// dropout_mask, when non-null, multiplies the input of the last layer
// (inverted dropout: entries are 0 or 1/(1-rate)).
ForwardState forward(const MlpModel& model, std::span<const double> input,
                     const std::vector<double>* dropout_mask) {
  ForwardState state;
  const std::size_t n_layers = model.layers.size();
  state.layer_inputs.resize(n_layers);
  state.pre_activations.resize(n_layers);

  std::vector<double> act = standardize(model, input);
  for (std::size_t l = 0; l < n_layers; ++l) {
    if (l == n_layers - 1 && dropout_mask != nullptr) {
      for (std::size_t i = 0; i < act.size(); ++i) {
        act[i] *= (*dropout_mask)[i];
      }
    }
    state.layer_inputs[l] = act;
    const auto& layer = model.layers[l];
    std::vector<double> z(layer.out_size, 0.0);
    for (std::size_t o = 0; o < layer.out_size; ++o) {
      double acc = layer.bias[o];
      const double* w = &layer.weights[o * layer.in_size];
      for (std::size_t i = 0; i < layer.in_size; ++i) {
        acc += w[i] * act[i];
      }
      z[o] = acc;
    }
    state.pre_activations[l] = z;
    if (l + 1 < n_layers) {
      for (double& v : z) {
        v = std::max(v, 0.0);
      }
      act = std::move(z);
    } else {
      state.prob = sigmoid(z[0]);
    }
  }
  return state;
}

struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> bias;

  explicit Gradients(const MlpModel& model) {
    weights.reserve(model.layers.size());
    bias.reserve(model.layers.size());
    for (const auto& layer : model.layers) {
      weights.emplace_back(layer.weights.size(), 0.0);
      bias.emplace_back(layer.bias.size(), 0.0);
    }
  }
};

// Accumulates d(batch loss)/d(params) for one sample whose loss term is
// weight * bce / batch_size. Derivative through the probability clip is
// zero outside (eps, 1-eps), matching the loss actually computed.
void backward(const MlpModel& model, const ForwardState& state, int label,
              double weight, double inv_batch,
              const std::vector<double>* dropout_mask, Gradients& grads) {
  const std::size_t n_layers = model.layers.size();
  const double p = state.prob;
  double delta_out = 0.0;
  if (p > kProbEpsilon && p < 1.0 - kProbEpsilon) {
    delta_out = weight * (p - static_cast<double>(label)) * inv_batch;
  }

  std::vector<double> delta{delta_out};
  for (std::size_t l = n_layers; l-- > 0;) {
    const auto& layer = model.layers[l];
    const auto& input = state.layer_inputs[l];
    for (std::size_t o = 0; o < layer.out_size; ++o) {
      const double d = delta[o];
      if (d != 0.0) {
        double* gw = &grads.weights[l][o * layer.in_size];
        for (std::size_t i = 0; i < layer.in_size; ++i) {
          gw[i] += d * input[i];
        }
        grads.bias[l][o] += d;
      }
    }
    if (l == 0) break;
    std::vector<double> prev(layer.in_size, 0.0);
    for (std::size_t o = 0; o < layer.out_size; ++o) {
      const double d = delta[o];
      if (d != 0.0) {
        const double* w = &layer.weights[o * layer.in_size];
        for (std::size_t i = 0; i < layer.in_size; ++i) {
          prev[i] += d * w[i];
        }
      }
    }
    if (l == n_layers - 1 && dropout_mask != nullptr) {
      for (std::size_t i = 0; i < prev.size(); ++i) {
        prev[i] *= (*dropout_mask)[i];
      }
    }
    // rectifier derivative on the previous layer's pre-activation
    const auto& z_prev = state.pre_activations[l - 1];
    for (std::size_t i = 0; i < prev.size(); ++i) {
      if (z_prev[i] <= 0.0) prev[i] = 0.0;
    }
    delta = std::move(prev);
  }
}

double bce_term(int label, double prob) {
  const double p = std::clamp(prob, kProbEpsilon, 1.0 - kProbEpsilon);
  return label == 1 ? -std::log(p) : -std::log(1.0 - p);
}

std::vector<double> features_for_sample(const Dataset& data, std::size_t index,
                                        const TrainConfig& cfg,
                                        std::size_t epoch) {
  if (!cfg.augment) {
    return data.features[index];
  }
  ImageTensor img;
  img.height = data.image_height;
  img.width = data.image_width;
  img.channels = data.image_channels;
  img.pixels = data.features[index];
  Rng rng = augment_rng(cfg.augment->seed, index, epoch);
  return augment_pipeline(img, *cfg.augment, rng).pixels;
}

double validation_loss(const MlpModel& model, const Dataset& val_set) {
  std::vector<double> probs = predict_batch(model, val_set);
  return weighted_bce(val_set.labels, probs, std::nullopt);
}

MetricReport validation_report(const MlpModel& model, const Dataset& val_set) {
  const auto records = score_dataset(model, val_set);
  return metric_report(confusion_from_scores(records, Threshold(0.5)));
}

}  // namespace

MlpModel init_model(std::span<const std::size_t> layer_sizes,
                    std::uint64_t seed) {
  if (layer_sizes.size() < 2) {
    throw input_error("model needs at least input and output sizes");
  }
  if (layer_sizes.back() != 1) {
    throw input_error("output layer must have exactly one unit");
  }
  for (std::size_t s : layer_sizes) {
    if (s == 0) {
      throw input_error("layer sizes must be positive");
    }
  }
  MlpModel model;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    DenseLayer layer;
    layer.in_size = layer_sizes[l];
    layer.out_size = layer_sizes[l + 1];
    layer.weights.resize(layer.in_size * layer.out_size);
    layer.bias.assign(layer.out_size, 0.0);
    const double limit = std::sqrt(
        6.0 / static_cast<double>(layer.in_size + layer.out_size));
    for (double& w : layer.weights) {
      w = rng.uniform_in(-limit, limit);
    }
    model.layers.push_back(std::move(layer));
  }
  return model;
}

double weighted_bce(std::span<const int> labels, std::span<const double> probs,
                    const std::optional<ClassWeights>& weights) {
  if (labels.size() != probs.size()) {
    throw input_error("labels/probs length mismatch");
  }
  if (labels.empty()) {
    throw input_error("empty input");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    total += sample_weight(labels[i], weights) * bce_term(labels[i], probs[i]);
  }
  return total / static_cast<double>(labels.size());
}

double predict(const MlpModel& model, std::span<const double> input) {
  if (model.layers.empty()) {
    throw input_error("model has no layers");
  }
  if (input.size() != model.input_size()) {
    throw input_error("input dimension mismatch");
  }
  return forward(model, input, nullptr).prob;
}

std::vector<double> predict_batch(const MlpModel& model, const Dataset& data) {
  std::vector<double> probs;
  probs.reserve(data.size());
  for (const auto& row : data.features) {
    probs.push_back(predict(model, row));
  }
  return probs;
}

std::vector<ScoreRecord> score_dataset(const MlpModel& model,
                                       const Dataset& data) {
  std::vector<ScoreRecord> records;
  records.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    records.push_back(ScoreRecord{std::to_string(i), data.labels[i],
                                  predict(model, data.features[i])});
  }
  return records;
}

std::pair<MlpModel, TrainHistory> train(MlpModel model, const Dataset& train_set,
                                        const Dataset& val_set,
                                        const TrainConfig& cfg) {
  require_dataset(train_set, "training");
  require_dataset(val_set, "validation");
  require_both_classes(train_set);
  if (model.layers.empty()) {
    throw input_error("model has no layers");
  }
  if (train_set.features[0].size() != model.input_size()) {
    throw input_error("input dimension mismatch");
  }
  if (cfg.batch_size == 0 || cfg.max_epochs == 0) {
    throw config_error("batch_size and max_epochs must be positive");
  }
  if (cfg.augment && !train_set.is_image_data()) {
    throw input_error("augmentation requires image-shaped data");
  }
  if (cfg.augment &&
      train_set.image_height * train_set.image_width *
              train_set.image_channels != model.input_size()) {
    throw input_error("image shape does not match model input");
  }

  if (!model.has_standardization()) {
    fit_standardization(model, train_set);
  }

  const std::size_t n = train_set.size();
  const std::size_t last = model.layers.size() - 1;
  const std::size_t drop_dim = model.layers[last].in_size;
  const bool use_dropout = model.dropout_rate > 0.0;

  TrainHistory history;
  MlpModel best_model = model;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  std::size_t no_improve = 0;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const double lr = cfg.lr0 * std::pow(cfg.decay_rate, epoch);

    Rng shuffle_rng(mix_seed(cfg.seed, 0x5u, epoch));
    shuffle_values(order, shuffle_rng);

    double epoch_loss = 0.0;
    for (std::size_t batch_start = 0, batch_id = 0; batch_start < n;
         batch_start += cfg.batch_size, ++batch_id) {
      const std::size_t batch_end = std::min(batch_start + cfg.batch_size, n);
      const std::size_t batch_n = batch_end - batch_start;
      const double inv_batch = 1.0 / static_cast<double>(batch_n);

      Rng dropout_rng(mix_seed(cfg.seed, 0xDu, epoch, batch_id));
      Gradients grads(model);
      double batch_loss = 0.0;

      for (std::size_t b = batch_start; b < batch_end; ++b) {
        const std::size_t index = order[b];
        const int label = train_set.labels[index];
        const double w = sample_weight(label, cfg.class_weights);
        const auto features = features_for_sample(train_set, index, cfg, epoch);

        std::vector<double> mask;
        const std::vector<double>* mask_ptr = nullptr;
        if (use_dropout) {
          mask.resize(drop_dim);
          const double keep = 1.0 - model.dropout_rate;
          for (double& m : mask) {
            m = dropout_rng.uniform() < keep ? 1.0 / keep : 0.0;
          }
          mask_ptr = &mask;
        }

        const ForwardState state = forward(model, features, mask_ptr);
        batch_loss += w * bce_term(label, state.prob) * inv_batch;
        backward(model, state, label, w, inv_batch, mask_ptr, grads);
      }

      if (!std::isfinite(batch_loss)) {
        throw numerical_error("training diverged");
      }
      epoch_loss += batch_loss * static_cast<double>(batch_n);

      for (std::size_t l = 0; l < model.layers.size(); ++l) {
        auto& layer = model.layers[l];
        if (layer.frozen) continue;
        for (std::size_t i = 0; i < layer.weights.size(); ++i) {
          layer.weights[i] -= lr * grads.weights[l][i];
        }
        for (std::size_t i = 0; i < layer.bias.size(); ++i) {
          layer.bias[i] -= lr * grads.bias[l][i];
        }
      }
    }
    epoch_loss /= static_cast<double>(n);

    for (const auto& layer : model.layers) {
      for (double wv : layer.weights) {
        if (!std::isfinite(wv)) {
          throw numerical_error("training diverged");
        }
      }
    }

    EpochStats stats;
    stats.train_loss = epoch_loss;
    stats.learning_rate = lr;
    stats.val_loss = validation_loss(model, val_set);
    stats.val_report = validation_report(model, val_set);
    if (!std::isfinite(stats.val_loss)) {
      throw numerical_error("training diverged");
    }
    history.epochs.push_back(stats);
    history.stopped_epoch = epoch;

    if (stats.val_loss < best_val) {
      best_val = stats.val_loss;
      best_epoch = epoch;
      best_model = model;
      no_improve = 0;
    } else {
      ++no_improve;
      if (no_improve >= cfg.patience) {
        history.stop_reason = StopReason::EarlyStop;
        break;
      }
    }
  }
  if (history.stop_reason != StopReason::EarlyStop) {
    history.stop_reason = StopReason::MaxEpochs;
  }
  history.best_epoch = best_epoch;
  return {std::move(best_model), std::move(history)};
}

std::pair<MlpModel, TrainHistory> transfer(MlpModel pretrained,
                                           std::size_t keep_trainable,
                                           const Dataset& target_train,
                                           const Dataset& target_val,
                                           const TrainConfig& cfg) {
  if (keep_trainable == 0) {
    throw input_error("at least one layer must stay trainable");
  }
  if (keep_trainable > pretrained.layers.size()) {
    throw input_error("keep_trainable exceeds layer count");
  }
  const std::size_t frozen_count = pretrained.layers.size() - keep_trainable;
  for (std::size_t l = 0; l < pretrained.layers.size(); ++l) {
    pretrained.layers[l].frozen = l < frozen_count;
  }
  return train(std::move(pretrained), target_train, target_val, cfg);
}

double gradient_check(const MlpModel& model, const Dataset& batch, double eps,
                      const std::optional<ClassWeights>& weights) {
  if (eps < 1e-7 || eps > 1e-3) {
    throw input_error("eps must lie in [1e-7, 1e-3]");
  }
  require_dataset(batch, "gradient-check");

  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  Gradients analytic(model);
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const int label = batch.labels[s];
    const double w = sample_weight(label, weights);
    const ForwardState state = forward(model, batch.features[s], nullptr);
    backward(model, state, label, w, inv_batch, nullptr, analytic);
  }

  auto batch_loss = [&](const MlpModel& m) {
    double total = 0.0;
    for (std::size_t s = 0; s < batch.size(); ++s) {
      const double p = forward(m, batch.features[s], nullptr).prob;
      total += sample_weight(batch.labels[s], weights) *
               bce_term(batch.labels[s], p);
    }
    return total * inv_batch;
  };

  MlpModel probe = model;
  double max_rel = 0.0;
  auto check_param = [&](double& param, double grad) {
    const double saved = param;
    param = saved + eps;
    const double up = batch_loss(probe);
    param = saved - eps;
    const double down = batch_loss(probe);
    param = saved;
    const double numeric = (up - down) / (2.0 * eps);
    const double denom = std::max(1e-8, std::abs(numeric) + std::abs(grad));
    max_rel = std::max(max_rel, std::abs(numeric - grad) / denom);
  };

  for (std::size_t l = 0; l < probe.layers.size(); ++l) {
    if (probe.layers[l].frozen) continue;
    for (std::size_t i = 0; i < probe.layers[l].weights.size(); ++i) {
      check_param(probe.layers[l].weights[i], analytic.weights[l][i]);
    }
    for (std::size_t i = 0; i < probe.layers[l].bias.size(); ++i) {
      check_param(probe.layers[l].bias[i], analytic.bias[l][i]);
    }
  }
  return max_rel;
}

namespace {

constexpr char kModelMagic[4] = {'F', 'M', 'L', 'P'};
constexpr std::uint32_t kModelVersion = 1;

template <typename T>
void write_raw(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_raw(std::ifstream& in, T& value) {
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
}

void write_doubles(std::ofstream& out, const std::vector<double>& v) {
  const auto count = static_cast<std::uint64_t>(v.size());
  write_raw(out, count);
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> read_doubles(std::ifstream& in) {
  std::uint64_t count = 0;
  read_raw(in, count);
  std::vector<double> v(count);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  return v;
}

}  // namespace

void save_model(const MlpModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw input_error("cannot open model file for writing: " + path.string());
  }
  out.write(kModelMagic, sizeof(kModelMagic));
  write_raw(out, kModelVersion);
  write_raw(out, model.dropout_rate);
  write_raw(out, static_cast<std::uint64_t>(model.layers.size()));
  for (const auto& layer : model.layers) {
    write_raw(out, static_cast<std::uint64_t>(layer.in_size));
    write_raw(out, static_cast<std::uint64_t>(layer.out_size));
    write_raw(out, static_cast<std::uint8_t>(layer.frozen ? 1 : 0));
    write_doubles(out, layer.weights);
    write_doubles(out, layer.bias);
  }
  write_doubles(out, model.feature_mean);
  write_doubles(out, model.feature_std);
  if (!out) {
    throw input_error("failed writing model file: " + path.string());
  }
}

MlpModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw input_error("cannot open model file: " + path.string());
  }
  char magic[4] = {};
  in.read(magic, sizeof(magic));
  if (std::memcmp(magic, kModelMagic, sizeof(magic)) != 0) {
    throw input_error("not a model file: " + path.string());
  }
  std::uint32_t version = 0;
  read_raw(in, version);
  if (version != kModelVersion) {
    throw input_error("unsupported model file version");
  }
  MlpModel model;
  read_raw(in, model.dropout_rate);
  std::uint64_t n_layers = 0;
  read_raw(in, n_layers);
  for (std::uint64_t l = 0; l < n_layers; ++l) {
    DenseLayer layer;
    std::uint64_t in_size = 0;
    std::uint64_t out_size = 0;
    std::uint8_t frozen = 0;
    read_raw(in, in_size);
    read_raw(in, out_size);
    read_raw(in, frozen);
    layer.in_size = static_cast<std::size_t>(in_size);
    layer.out_size = static_cast<std::size_t>(out_size);
    layer.frozen = frozen != 0;
    layer.weights = read_doubles(in);
    layer.bias = read_doubles(in);
    if (layer.weights.size() != layer.in_size * layer.out_size ||
        layer.bias.size() != layer.out_size) {
      throw input_error("corrupt model file: " + path.string());
    }
    model.layers.push_back(std::move(layer));
  }
  model.feature_mean = read_doubles(in);
  model.feature_std = read_doubles(in);
  if (!in) {
    throw input_error("corrupt model file: " + path.string());
  }
  return model;
}

}  // namespace fairmit
