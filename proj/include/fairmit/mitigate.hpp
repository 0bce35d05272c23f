#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "fairmit/metrics.hpp"

namespace fairmit {

/// Objective minimized by the post-processing threshold search.
enum class ThresholdStrategy {
  EqualTrue,         // |TP - TN|
  EqualFalse,        // |FP - FN|
  EqualTotal,        // |(TP+FP) - (TN+FN)|
  EqualOpportunity,  // |TP/(TP+FN) - TN/(TN+FP)|
};

const char* strategy_name(ThresholdStrategy s);
std::optional<ThresholdStrategy> strategy_from_name(std::string_view name);

struct ThresholdSearchResult {
  Threshold t_star;
  double objective_value = 0.0;
  MetricReport report_at_t;
  std::size_t candidates_evaluated = 0;
};

/// Per-class loss weights. The weighted class masses are equal:
/// male * n_male == female * n_female.
struct ClassWeights {
  double male = 1.0;
  double female = 1.0;
};

/// Strategy objective at the given counts; always >= 0.
double threshold_objective(const ConfusionCounts& cc, ThresholdStrategy s);

/// Exhaustive threshold search over {0} u {midpoints between consecutive
/// distinct sorted scores} u {1}. The objective is piecewise constant
/// between consecutive distinct scores, so this candidate set realizes
/// every achievable value and the returned minimum is global over [0,1].
/// Ties are broken by higher accuracy, then proximity to 0.5, then the
/// smaller threshold. Throws input_error unless both classes are present.
ThresholdSearchResult optimize_threshold(std::span<const ScoreRecord> records,
                                         ThresholdStrategy s);

/// Balanced class weights w_c = N / (2 * n_c) with N = n_male + n_female.
/// Throws input_error when either count is zero.
ClassWeights class_weights(std::size_t n_male, std::size_t n_female);

}  // namespace fairmit
