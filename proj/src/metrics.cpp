#include "fairmit/metrics.hpp"

#include "fairmit/errors.hpp"

namespace fairmit {

namespace {

void require_nonempty(const ConfusionCounts& cc) {
  if (cc.total() <= 0) {
    throw input_error("confusion counts are empty");
  }
}

}  // namespace

double safe_rate(long long num, long long den) {
  if (den == 0) {
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

double accuracy(const ConfusionCounts& cc) {
  require_nonempty(cc);
  return static_cast<double>(cc.tp + cc.tn) / static_cast<double>(cc.total());
}

long long demographic_parity_diff(const ConfusionCounts& cc) {
  require_nonempty(cc);
  return cc.predicted_positive() - cc.predicted_negative();
}

double proportional_parity_diff(const ConfusionCounts& cc) {
  require_nonempty(cc);
  return static_cast<double>(demographic_parity_diff(cc)) /
         static_cast<double>(cc.total());
}

double equality_of_opportunity_diff(const ConfusionCounts& cc) {
  require_nonempty(cc);
  return safe_rate(cc.tp, cc.tp + cc.fn) - safe_rate(cc.tn, cc.tn + cc.fp);
}

double predictive_rate_parity_diff(const ConfusionCounts& cc) {
  require_nonempty(cc);
  return safe_rate(cc.tp, cc.tp + cc.fp) - safe_rate(cc.tn, cc.tn + cc.fn);
}

MetricReport metric_report(const ConfusionCounts& cc) {
  require_nonempty(cc);
  MetricReport report;
  report.accuracy = accuracy(cc);
  report.dpd = demographic_parity_diff(cc);
  report.ppd = proportional_parity_diff(cc);
  report.eood = equality_of_opportunity_diff(cc);
  report.prpd = predictive_rate_parity_diff(cc);
  report.tpr = safe_rate(cc.tp, cc.tp + cc.fn);
  report.tnr = safe_rate(cc.tn, cc.tn + cc.fp);
  report.ppv = safe_rate(cc.tp, cc.tp + cc.fp);
  report.npv = safe_rate(cc.tn, cc.tn + cc.fn);
  return report;
}

}  // namespace fairmit
