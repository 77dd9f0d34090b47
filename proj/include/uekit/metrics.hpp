#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace uekit::metrics {

// Parallel arrays: confidence (higher = more confident) and binary labels.
struct ScoredRecordSet {
  std::vector<double> scores;
  std::vector<int> labels;

  std::size_t size() const { return scores.size(); }
  double accuracy() const;
};

// Throws Error(kDomain) unless lengths match, n >= 1, scores are finite and
// labels are binary.
void validate(const ScoredRecordSet& set);

// P(random positive outscores random negative), ties counted 1/2. Computed
// from tie-averaged rank sums in exact integer arithmetic, so it equals
// brute-force pair counting bit for bit. Throws on one-class input.
double auroc(const ScoredRecordSet& set);

struct RejectionPoint {
  double rejected_fraction = 0.0;
  double accuracy = 0.0;
};

// Points j = 0..n-1: reject the j least-confident records (ties in input
// order) and report the accuracy of the rest.
std::vector<RejectionPoint> rejection_curve(const ScoredRecordSet& set);
// Mean of the curve's accuracies.
double rejection_auc(const ScoredRecordSet& set);

// (AUC - AUC_random) / (AUC_oracle - AUC_random), AUC_random = accuracy,
// oracle scores = labels. Throws when accuracy is 0 or 1.
double prr(const ScoredRecordSet& set);

struct RiskCoveragePoint {
  double threshold = 0.0;
  double coverage = 0.0;
  double risk = 0.0;  // 0 when nothing is covered
};

// Answer iff score > gamma.
RiskCoveragePoint coverage_risk(const ScoredRecordSet& set, double gamma);

// Sentinel below the minimum (min - 1), midpoints between consecutive
// distinct scores, sentinel above the maximum (max + 1); ascending.
std::vector<double> candidate_thresholds(const ScoredRecordSet& set);

// coverage_risk at every candidate threshold, ascending in threshold.
std::vector<RiskCoveragePoint> risk_coverage_curve(const ScoredRecordSet& set);

// Largest coverage over thresholds with risk <= max_risk; thresholds are the
// below-min sentinel and every distinct score (the maximum score acts as the
// abstain-everything threshold). 0 when none qualifies.
double coverage_at_risk(const ScoredRecordSet& set, double max_risk);

// Mean reward: +1 answered and correct, -cost answered and wrong, 0 abstained.
double effective_reliability(const ScoredRecordSet& set, double gamma, double cost = 1.0);

struct Calibration {
  double gamma = 0.0;
  double val_er = 0.0;
};

// argmax of ER over candidate_thresholds; ties go to the larger threshold.
Calibration calibrate_threshold(const ScoredRecordSet& val, double cost = 1.0);

struct EvalReport {
  std::string method;
  std::string dataset;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double accuracy = 0.0;
  double auroc = 0.0;
  double prr = 0.0;
  double threshold = 0.0;
  double er = 0.0;
  double coverage = 0.0;  // at threshold
  double risk = 0.0;      // at threshold
  std::map<double, double> coverage_at_risk;  // risk level -> coverage
  std::vector<RiskCoveragePoint> curve;
};

EvalReport evaluate(const ScoredRecordSet& test, double gamma,
                    const std::vector<double>& risk_levels = {0.10, 0.20},
                    double cost = 1.0);

nlohmann::ordered_json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

// "threshold,coverage,risk" header, one line per point.
std::string curve_to_csv(const std::vector<RiskCoveragePoint>& curve);

}  // namespace uekit::metrics
