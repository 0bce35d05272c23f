#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fairmit {

// Label convention: Female = 0, Male = 1. Male is the positive class, so a
// classifier score leans Male as it approaches 1.
inline constexpr int kFemale = 0;
inline constexpr int kMale = 1;

/// One classifier output: sample id, actual binary label, score in [0,1].
struct ScoreRecord {
  std::string id;
  int label = kFemale;
  double score = 0.0;
};

/// Decision threshold in [0,1]; validated on construction.
class Threshold {
 public:
  explicit Threshold(double t);
  double value() const { return t_; }

 private:
  double t_;
};

/// TP/FP/TN/FN with Male as the positive class.
struct ConfusionCounts {
  long long tp = 0;
  long long fp = 0;
  long long tn = 0;
  long long fn = 0;

  long long total() const { return tp + fp + tn + fn; }
  long long predicted_positive() const { return tp + fp; }
  long long predicted_negative() const { return tn + fn; }
  long long actual_positive() const { return tp + fn; }
  long long actual_negative() const { return tn + fp; }
};

/// Train/validation/test index sets; pairwise disjoint, covering 0..n-1.
struct DatasetSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

/// One cross-validation fold; train is the complement of val.
struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};

/// Mean and sample standard deviation (n-1 denominator) over fold values.
struct FoldStats {
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<double> values;
};

/// Thresholds the scores: predicted Male iff score >= t.
/// Throws input_error on an empty record list.
ConfusionCounts confusion_from_scores(std::span<const ScoreRecord> records,
                                      Threshold threshold);

/// Shuffles 0..n-1 with a seeded Fisher-Yates permutation, then partitions.
/// Set sizes are apportioned by largest remainder, so each size is within
/// one element of its exact ratio share. Requires n >= 10 and ratios
/// summing to 1.
DatasetSplit split_dataset(std::size_t n, const SplitRatios& ratios,
                           std::uint64_t seed);

/// K-fold partition of 0..n-1 after a seeded shuffle. Every index lands in
/// exactly one validation fold; fold sizes differ by at most one.
std::vector<Fold> kfold(std::size_t n, std::size_t k, std::uint64_t seed);

/// Mean and sample standard deviation of per-fold metric values.
/// Throws input_error with fewer than 2 values.
FoldStats aggregate_folds(std::span<const double> values);

}  // namespace fairmit
