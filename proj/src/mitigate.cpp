#include "fairmit/mitigate.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fairmit/errors.hpp"

namespace fairmit {

const char* strategy_name(ThresholdStrategy s) {
  switch (s) {
    case ThresholdStrategy::EqualTrue:
      return "equal-true";
    case ThresholdStrategy::EqualFalse:
      return "equal-false";
    case ThresholdStrategy::EqualTotal:
      return "equal-total";
    case ThresholdStrategy::EqualOpportunity:
      return "equal-opportunity";
  }
  return "unknown";
}

std::optional<ThresholdStrategy> strategy_from_name(std::string_view name) {
  if (name == "equal-true") return ThresholdStrategy::EqualTrue;
  if (name == "equal-false") return ThresholdStrategy::EqualFalse;
  if (name == "equal-total") return ThresholdStrategy::EqualTotal;
  if (name == "equal-opportunity") return ThresholdStrategy::EqualOpportunity;
  return std::nullopt;
}

double threshold_objective(const ConfusionCounts& cc, ThresholdStrategy s) {
  if (cc.total() <= 0) {
    throw input_error("confusion counts are empty");
  }
  switch (s) {
    case ThresholdStrategy::EqualTrue:
      return static_cast<double>(std::llabs(cc.tp - cc.tn));
    case ThresholdStrategy::EqualFalse:
      return static_cast<double>(std::llabs(cc.fp - cc.fn));
    case ThresholdStrategy::EqualTotal:
      return static_cast<double>(
          std::llabs(cc.predicted_positive() - cc.predicted_negative()));
    case ThresholdStrategy::EqualOpportunity:
      return std::abs(safe_rate(cc.tp, cc.tp + cc.fn) -
                      safe_rate(cc.tn, cc.tn + cc.fp));
  }
  throw input_error("unknown threshold strategy");
}

ThresholdSearchResult optimize_threshold(std::span<const ScoreRecord> records,
                                         ThresholdStrategy s) {
  if (records.empty()) {
    throw input_error("empty input");
  }
  bool has_male = false;
  bool has_female = false;
  for (const auto& r : records) {
    (r.label == kMale ? has_male : has_female) = true;
  }
  if (!has_male || !has_female) {
    throw input_error("threshold optimization requires both classes");
  }

  std::vector<double> scores;
  scores.reserve(records.size());
  for (const auto& r : records) {
    scores.push_back(r.score);
  }
  std::sort(scores.begin(), scores.end());
  scores.erase(std::unique(scores.begin(), scores.end()), scores.end());

  std::vector<double> candidates;
  candidates.reserve(scores.size() + 1);
  candidates.push_back(0.0);
  for (std::size_t i = 1; i < scores.size(); ++i) {
    candidates.push_back(0.5 * (scores[i - 1] + scores[i]));
  }
  candidates.push_back(1.0);

  struct Best {
    double t = 0.0;
    double objective = 0.0;
    double accuracy = 0.0;
    ConfusionCounts counts;
    bool set = false;
  } best;

  for (double t : candidates) {
    const auto cc = confusion_from_scores(records, Threshold(t));
    const double obj = threshold_objective(cc, s);
    const double acc = accuracy(cc);
    bool take = !best.set;
    if (!take && obj < best.objective) take = true;
    if (!take && obj == best.objective) {
      if (acc > best.accuracy) {
        take = true;
      } else if (acc == best.accuracy) {
        const double d_new = std::abs(t - 0.5);
        const double d_old = std::abs(best.t - 0.5);
        if (d_new < d_old || (d_new == d_old && t < best.t)) take = true;
      }
    }
    if (take) {
      best = {t, obj, acc, cc, true};
    }
  }

  ThresholdSearchResult result{Threshold(best.t), best.objective,
                               metric_report(best.counts), candidates.size()};
  return result;
}

ClassWeights class_weights(std::size_t n_male, std::size_t n_female) {
  if (n_male == 0 || n_female == 0) {
    throw input_error("degenerate class distribution");
  }
  const double total = static_cast<double>(n_male + n_female);
  ClassWeights w;
  w.male = total / (2.0 * static_cast<double>(n_male));
  w.female = total / (2.0 * static_cast<double>(n_female));
  return w;
}

}  // namespace fairmit
