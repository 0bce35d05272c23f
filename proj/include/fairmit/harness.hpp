#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairmit/mitigate.hpp"
#include "fairmit/trainer.hpp"

namespace fairmit {

/// Controls the synthetic source/target pair. The source is balanced; the
/// target is skewed toward Female and carries a group-correlated brightness
/// shift that the class pattern itself does not have.
struct SyntheticSpec {
  std::size_t image_height = 16;
  std::size_t image_width = 16;
  std::size_t image_channels = 1;
  std::size_t source_count = 20000;
  std::size_t target_count = 3128;
  double target_female_fraction = 2061.0 / 3128.0;
  double class_signal_strength = 0.12;
  double group_nuisance_strength = 0.1;
  std::uint64_t seed = 0;
};

struct SyntheticData {
  Dataset source;
  Dataset target;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

/// One experiment row: the mitigation toggles plus data and training knobs.
struct ExperimentConfig {
  std::string model_tag = "mlp";
  bool use_transfer = false;
  std::optional<ThresholdStrategy> threshold_strategy;
  bool use_reweighting = false;
  bool use_augmentation = false;
  std::uint64_t split_seed = 1;
  std::uint64_t train_seed = 1;

  // Data: either directories written by `synth`, or an inline spec.
  std::optional<std::filesystem::path> source_dir;
  std::optional<std::filesystem::path> target_dir;
  SyntheticSpec synth;

  TrainConfig train;
  AugmentConfig augment;
  std::vector<std::size_t> hidden_sizes = {16};
  // Output-side layers left trainable when fine-tuning; the rest freeze.
  std::size_t transfer_trainable_layers = 1;
  std::size_t folds = 5;
};

/// A reported value: single measurement, or mean with spread over folds.
struct ValueWithSpread {
  double value = 0.0;
  std::optional<double> spread;
};

/// One report row. Thresholded rows carry single values (one validation
/// split); unthresholded rows carry mean +/- sample std over the folds.
/// Accuracy is stored in percent space (52.4 not 0.524) so that its mean
/// and spread print directly.
struct ResultRow {
  std::string model_tag;
  bool transfer = false;
  std::optional<ThresholdStrategy> threshold;
  bool reweight = false;
  bool augment = false;
  ValueWithSpread accuracy;
  ValueWithSpread dpd;
  ValueWithSpread ppd;
  ValueWithSpread eood;
  ValueWithSpread prpd;
  std::size_t eval_size = 0;
};

/// Builds a single-value row directly from a metric report.
ResultRow row_from_report(const std::string& model_tag,
                          const MetricReport& report, std::size_t eval_size);

ResultRow run_experiment(const ExperimentConfig& cfg);

enum class ReportFormat { Csv, Markdown };

/// Renders rows in the fixed column order (toggles, accuracy, the four
/// fairness gaps, evaluated-set size). Accuracy renders as a percentage
/// with one decimal, dpd as a signed count, the remaining gaps with three
/// decimals; trailing zeros are trimmed. Spread values render as
/// `mean +/- std`. The numeric strings are identical across formats.
void emit_report(std::span<const ResultRow> rows, std::ostream& out,
                 ReportFormat format);
void write_report(std::span<const ResultRow> rows,
                  const std::filesystem::path& path, ReportFormat format);

/// Reads back a CSV report produced by emit_report, cells verbatim.
struct ReportCells {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
ReportCells parse_report_csv(const std::filesystem::path& path);
void emit_cells(const ReportCells& cells, std::ostream& out,
                ReportFormat format);

// Formatting helpers shared by the report emitters.
std::string format_percent(const ValueWithSpread& v);
std::string format_count(const ValueWithSpread& v);
std::string format_metric(const ValueWithSpread& v);

/// Flat `key = value` config file with dotted sections and `#` comments.
/// `matrix.*` keys hold comma-separated lists that expand to the cross
/// product of experiment rows.
std::vector<ExperimentConfig> load_experiment_configs(
    const std::filesystem::path& path);
SyntheticSpec load_synth_spec(const std::filesystem::path& path);

/// Parsed key/value view of a config file, exposed for reuse and tests.
std::map<std::string, std::string> parse_flat_config(
    const std::filesystem::path& path);

}  // namespace fairmit
