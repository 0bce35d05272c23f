#include "fairmit/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairmit/errors.hpp"
#include "fairmit/rng.hpp"

namespace fairmit {

Threshold::Threshold(double t) : t_(t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw input_error("threshold out of range [0,1]");
  }
}

ConfusionCounts confusion_from_scores(std::span<const ScoreRecord> records,
                                      Threshold threshold) {
  if (records.empty()) {
    throw input_error("empty input");
  }
  const double t = threshold.value();
  ConfusionCounts cc;
  for (const auto& r : records) {
    const bool predicted_male = r.score >= t;
    if (r.label == kMale) {
      predicted_male ? ++cc.tp : ++cc.fn;
    } else {
      predicted_male ? ++cc.fp : ++cc.tn;
    }
  }
  return cc;
}

namespace {

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  shuffle_values(idx, rng);
  return idx;
}

// Largest-remainder apportionment of n into the given shares. Every size
// ends up within one element of its exact share; ties go to earlier sets.
std::vector<std::size_t> apportion(std::size_t n,
                                   std::span<const double> shares) {
  std::vector<std::size_t> sizes(shares.size());
  std::vector<double> fractions(shares.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    const double exact = static_cast<double>(n) * shares[i];
    sizes[i] = static_cast<std::size_t>(std::floor(exact));
    fractions[i] = exact - std::floor(exact);
    assigned += sizes[i];
  }
  std::vector<std::size_t> order(shares.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return fractions[a] > fractions[b];
  });
  for (std::size_t i = 0; assigned < n; ++i) {
    ++sizes[order[i % order.size()]];
    ++assigned;
  }
  return sizes;
}

}  // namespace

DatasetSplit split_dataset(std::size_t n, const SplitRatios& ratios,
                           std::uint64_t seed) {
  if (n < 10) {
    throw input_error("dataset too small to split");
  }
  const double sum = ratios.train + ratios.val + ratios.test;
  if (std::abs(sum - 1.0) > 1e-9 || ratios.train <= 0.0 || ratios.val < 0.0 ||
      ratios.test < 0.0) {
    throw input_error("split ratios must be non-negative and sum to 1");
  }
  const double shares[] = {ratios.train, ratios.val, ratios.test};
  const auto sizes = apportion(n, shares);
  const auto idx = shuffled_indices(n, seed);

  DatasetSplit split;
  auto it = idx.begin();
  split.train.assign(it, it + sizes[0]);
  it += sizes[0];
  split.val.assign(it, it + sizes[1]);
  it += sizes[1];
  split.test.assign(it, it + sizes[2]);
  return split;
}

std::vector<Fold> kfold(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) {
    throw input_error("kfold requires k >= 2");
  }
  if (n < k) {
    throw input_error("dataset too small for k folds");
  }
  const auto idx = shuffled_indices(n, seed);

  std::vector<Fold> folds(k);
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  std::size_t start = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t len = base + (f < extra ? 1 : 0);
    folds[f].val.assign(idx.begin() + start, idx.begin() + start + len);
    folds[f].train.reserve(n - len);
    folds[f].train.insert(folds[f].train.end(), idx.begin(),
                          idx.begin() + start);
    folds[f].train.insert(folds[f].train.end(), idx.begin() + start + len,
                          idx.end());
    start += len;
  }
  return folds;
}

FoldStats aggregate_folds(std::span<const double> values) {
  if (values.size() < 2) {
    throw input_error("insufficient folds");
  }
  FoldStats stats;
  stats.values.assign(values.begin(), values.end());
  stats.mean = std::accumulate(values.begin(), values.end(), 0.0) /
               static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) {
    const double d = v - stats.mean;
    ss += d * d;
  }
  stats.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return stats;
}

}  // namespace fairmit
