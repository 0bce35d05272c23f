#pragma once

#include "fairmit/core.hpp"

namespace fairmit {

/// Accuracy plus the four signed group-fairness gaps and their rate terms.
///
/// All four gaps are computed Male-side minus Female-side, so positive
/// values indicate more (or more favorable) Male predictions. dpd is the
/// raw count difference; ppd is dpd normalized by the evaluated total.
struct MetricReport {
  double accuracy = 0.0;
  long long dpd = 0;   // predicted-Male count minus predicted-Female count
  double ppd = 0.0;    // dpd / total
  double eood = 0.0;   // tpr - tnr
  double prpd = 0.0;   // ppv - npv
  double tpr = 0.0;
  double tnr = 0.0;
  double ppv = 0.0;
  double npv = 0.0;
};

/// num/den with the 0/0 case resolved to 0.
double safe_rate(long long num, long long den);

double accuracy(const ConfusionCounts& cc);
long long demographic_parity_diff(const ConfusionCounts& cc);
double proportional_parity_diff(const ConfusionCounts& cc);
double equality_of_opportunity_diff(const ConfusionCounts& cc);
double predictive_rate_parity_diff(const ConfusionCounts& cc);

/// Bundles all of the above; throws input_error when total() == 0.
MetricReport metric_report(const ConfusionCounts& cc);

}  // namespace fairmit
