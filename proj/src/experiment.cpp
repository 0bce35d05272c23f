#include <cmath>
#include <utility>

#include "fairmit/errors.hpp"
#include "fairmit/harness.hpp"
#include "fairmit/io.hpp"
#include "fairmit/rng.hpp"

namespace fairmit {

namespace {

Dataset subset(const Dataset& data, std::span<const std::size_t> indices) {
  Dataset out;
  out.image_height = data.image_height;
  out.image_width = data.image_width;
  out.image_channels = data.image_channels;
  out.features.reserve(indices.size());
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) {
    out.features.push_back(data.features[i]);
    out.labels.push_back(data.labels[i]);
  }
  return out;
}

template <typename F>
auto with_context(const std::string& ctx, F&& fn) {
  try {
    return fn();
  } catch (const input_error& e) {
    throw input_error(ctx + ": " + e.what());
  } catch (const config_error& e) {
    throw config_error(ctx + ": " + e.what());
  } catch (const numerical_error& e) {
    throw numerical_error(ctx + ": " + e.what());
  }
}

struct PreparedData {
  Dataset target;
  std::optional<Dataset> source;
};

PreparedData prepare_data(const ExperimentConfig& cfg) {
  PreparedData out;
  const bool need_source = cfg.use_transfer;
  const bool need_synth =
      !cfg.target_dir || (need_source && !cfg.source_dir);
  std::optional<SyntheticData> synth;
  if (need_synth) {
    synth = generate_synthetic(cfg.synth);
  }
  out.target = cfg.target_dir ? load_dataset_dir(*cfg.target_dir)
                              : std::move(synth->target);
  if (need_source) {
    out.source = cfg.source_dir ? load_dataset_dir(*cfg.source_dir)
                                : std::move(synth->source);
  }
  return out;
}

std::vector<std::size_t> layer_sizes(const ExperimentConfig& cfg,
                                     std::size_t input_size) {
  std::vector<std::size_t> sizes{input_size};
  sizes.insert(sizes.end(), cfg.hidden_sizes.begin(), cfg.hidden_sizes.end());
  sizes.push_back(1);
  return sizes;
}

MlpModel pretrain_on_source(const ExperimentConfig& cfg, const Dataset& source,
                            std::span<const std::size_t> sizes) {
  const DatasetSplit split = split_dataset(source.size(), SplitRatios{},
                                           mix_seed(cfg.split_seed, 0x50u));
  const Dataset train_set = subset(source, split.train);
  const Dataset val_set = subset(source, split.val);
  TrainConfig tc = cfg.train;
  tc.seed = mix_seed(cfg.train_seed, 0x50u);
  tc.class_weights.reset();
  tc.augment.reset();
  auto [model, history] =
      train(init_model(sizes, mix_seed(cfg.train_seed, 0x111u)), train_set,
            val_set, tc);
  (void)history;
  return model;
}

// Trains one fold or the single split; `tag` keeps the derived seeds apart.
std::pair<MlpModel, TrainHistory> fit_one(
    const ExperimentConfig& cfg, const std::optional<MlpModel>& pretrained,
    std::span<const std::size_t> sizes, const Dataset& train_set,
    const Dataset& val_set, std::uint64_t tag) {
  TrainConfig tc = cfg.train;
  tc.seed = mix_seed(cfg.train_seed, tag);
  if (cfg.use_reweighting) {
    std::size_t male = 0;
    std::size_t female = 0;
    for (int label : train_set.labels) {
      (label == kMale ? male : female) += 1;
    }
    tc.class_weights = class_weights(male, female);
  } else {
    tc.class_weights.reset();
  }
  if (cfg.use_augmentation) {
    AugmentConfig ac = cfg.augment;
    ac.seed = mix_seed(cfg.augment.seed, tag);
    tc.augment = ac;
  } else {
    tc.augment.reset();
  }
  if (pretrained) {
    return transfer(*pretrained, cfg.transfer_trainable_layers, train_set,
                    val_set, tc);
  }
  return train(init_model(sizes, mix_seed(cfg.train_seed, 0x1D0u, tag)),
               train_set, val_set, tc);
}

ValueWithSpread spread_from(const FoldStats& stats) {
  return ValueWithSpread{stats.mean, stats.stddev};
}

ResultRow cross_validated_row(const ExperimentConfig& cfg,
                              const PreparedData& data,
                              const std::optional<MlpModel>& pretrained,
                              std::span<const std::size_t> sizes) {
  const auto folds = kfold(data.target.size(), cfg.folds, cfg.split_seed);
  std::vector<double> acc, dpd, ppd, eood, prpd;
  std::size_t val_total = 0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const MetricReport report =
        with_context("fold " + std::to_string(f), [&] {
          const Dataset train_set = subset(data.target, folds[f].train);
          const Dataset val_set = subset(data.target, folds[f].val);
          auto [model, history] =
              fit_one(cfg, pretrained, sizes, train_set, val_set, f);
          (void)history;
          const auto records = score_dataset(model, val_set);
          return metric_report(confusion_from_scores(records, Threshold(0.5)));
        });
    acc.push_back(report.accuracy * 100.0);
    dpd.push_back(static_cast<double>(report.dpd));
    ppd.push_back(report.ppd);
    eood.push_back(report.eood);
    prpd.push_back(report.prpd);
    val_total += folds[f].val.size();
  }

  ResultRow row;
  row.accuracy = spread_from(aggregate_folds(acc));
  row.dpd = spread_from(aggregate_folds(dpd));
  row.ppd = spread_from(aggregate_folds(ppd));
  row.eood = spread_from(aggregate_folds(eood));
  row.prpd = spread_from(aggregate_folds(prpd));
  // Folds differ by at most one sample; report the typical validation size.
  row.eval_size = static_cast<std::size_t>(std::llround(
      static_cast<double>(val_total) / static_cast<double>(folds.size())));
  return row;
}

ResultRow thresholded_row(const ExperimentConfig& cfg, const PreparedData& data,
                          const std::optional<MlpModel>& pretrained,
                          std::span<const std::size_t> sizes) {
  return with_context("threshold split", [&] {
    const DatasetSplit split =
        split_dataset(data.target.size(), SplitRatios{}, cfg.split_seed);
    const Dataset train_set = subset(data.target, split.train);
    const Dataset val_set = subset(data.target, split.val);
    auto [model, history] =
        fit_one(cfg, pretrained, sizes, train_set, val_set, 0xF17u);
    (void)history;
    const auto records = score_dataset(model, val_set);
    const ThresholdSearchResult search =
        optimize_threshold(records, *cfg.threshold_strategy);
    ResultRow row = row_from_report(cfg.model_tag, search.report_at_t,
                                    val_set.size());
    return row;
  });
}

}  // namespace

ResultRow row_from_report(const std::string& model_tag,
                          const MetricReport& report, std::size_t eval_size) {
  ResultRow row;
  row.model_tag = model_tag;
  row.accuracy = ValueWithSpread{report.accuracy * 100.0, std::nullopt};
  row.dpd = ValueWithSpread{static_cast<double>(report.dpd), std::nullopt};
  row.ppd = ValueWithSpread{report.ppd, std::nullopt};
  row.eood = ValueWithSpread{report.eood, std::nullopt};
  row.prpd = ValueWithSpread{report.prpd, std::nullopt};
  row.eval_size = eval_size;
  return row;
}

ResultRow run_experiment(const ExperimentConfig& cfg) {
  if (cfg.folds < 2) {
    throw config_error("folds must be at least 2");
  }
  if (cfg.hidden_sizes.empty()) {
    throw config_error("at least one hidden layer is required");
  }
  if (cfg.use_transfer &&
      (cfg.transfer_trainable_layers == 0 ||
       cfg.transfer_trainable_layers > cfg.hidden_sizes.size() + 1)) {
    throw config_error("transfer_trainable_layers out of range");
  }

  const PreparedData data = prepare_data(cfg);
  if (!data.target.is_image_data()) {
    throw input_error("target dataset lacks an image shape");
  }
  const auto sizes = layer_sizes(cfg, data.target.features[0].size());

  std::optional<MlpModel> pretrained;
  if (cfg.use_transfer) {
    if (data.source->features[0].size() != data.target.features[0].size()) {
      throw input_error("source and target feature sizes differ");
    }
    pretrained = with_context(
        "pretraining", [&] { return pretrain_on_source(cfg, *data.source, sizes); });
  }

  ResultRow row = cfg.threshold_strategy
                      ? thresholded_row(cfg, data, pretrained, sizes)
                      : cross_validated_row(cfg, data, pretrained, sizes);
  row.model_tag = cfg.model_tag;
  row.transfer = cfg.use_transfer;
  row.threshold = cfg.threshold_strategy;
  row.reweight = cfg.use_reweighting;
  row.augment = cfg.use_augmentation;
  return row;
}

}  // namespace fairmit
