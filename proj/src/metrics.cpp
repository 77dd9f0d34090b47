#include "uekit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "uekit/error.hpp"

namespace uekit::metrics {

namespace {

[[noreturn]] void domain(const std::string& what) { throw Error(ErrorKind::kDomain, what); }

// Indices sorted by ascending score; equal scores keep input order.
std::vector<std::size_t> ascending_order(const std::vector<double>& scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  return idx;
}

std::vector<double> distinct_sorted(const std::vector<double>& scores) {
  std::vector<double> v = scores;
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Covered totals (score > gamma) for ascending thresholds, in one pass.
struct Coverage {
  std::size_t covered = 0;
  std::size_t correct = 0;
};

std::vector<Coverage> sweep(const ScoredRecordSet& set, const std::vector<double>& thresholds) {
  const std::vector<std::size_t> order = ascending_order(set.scores);
  const std::size_t n = set.size();
  std::size_t total_correct = 0;
  for (int l : set.labels) total_correct += static_cast<std::size_t>(l);

  std::vector<Coverage> out;
  out.reserve(thresholds.size());
  std::size_t dropped = 0, dropped_correct = 0;
  for (double gamma : thresholds) {
    while (dropped < n && set.scores[order[dropped]] <= gamma) {
      dropped_correct += static_cast<std::size_t>(set.labels[order[dropped]]);
      ++dropped;
    }
    out.push_back({n - dropped, total_correct - dropped_correct});
  }
  return out;
}

RiskCoveragePoint point_of(double gamma, const Coverage& c, std::size_t n) {
  RiskCoveragePoint p;
  p.threshold = gamma;
  p.coverage = static_cast<double>(c.covered) / static_cast<double>(n);
  p.risk = c.covered == 0 ? 0.0
                          : static_cast<double>(c.covered - c.correct) /
                                static_cast<double>(c.covered);
  return p;
}

double er_of(const Coverage& c, std::size_t n, double cost) {
  const auto wrong = static_cast<double>(c.covered - c.correct);
  return (static_cast<double>(c.correct) - cost * wrong) / static_cast<double>(n);
}

}  // namespace

double ScoredRecordSet::accuracy() const {
  double s = 0.0;
  for (int l : labels) s += l;
  return s / static_cast<double>(labels.size());
}

void validate(const ScoredRecordSet& set) {
  if (set.scores.size() != set.labels.size()) {
    domain("scores and labels differ in length (" + std::to_string(set.scores.size()) +
           " vs " + std::to_string(set.labels.size()) + ")");
  }
  if (set.scores.empty()) domain("empty scored set");
  for (double s : set.scores) {
    if (!std::isfinite(s)) domain("non-finite score");
  }
  for (int l : set.labels) {
    if (l != 0 && l != 1) domain("labels must be 0 or 1");
  }
}

double auroc(const ScoredRecordSet& set) {
  validate(set);
  const std::vector<std::size_t> order = ascending_order(set.scores);
  const std::size_t n = set.size();
  std::uint64_t n_pos = 0;
  for (int l : set.labels) n_pos += static_cast<std::uint64_t>(l);
  const std::uint64_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) domain("AUROC undefined on one-class input");

  // Twice the tie-averaged rank sum of positives, in integers.
  std::uint64_t rank_sum2 = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    std::uint64_t pos_in_group = 0;
    while (j < n && set.scores[order[j]] == set.scores[order[i]]) {
      pos_in_group += static_cast<std::uint64_t>(set.labels[order[j]]);
      ++j;
    }
    rank_sum2 += pos_in_group * ((i + 1) + j);  // 2 * mean rank of ranks i+1..j
    i = j;
  }
  const std::uint64_t u2 = rank_sum2 - n_pos * (n_pos + 1);
  return static_cast<double>(u2) / static_cast<double>(2 * n_pos * n_neg);
}

std::vector<RejectionPoint> rejection_curve(const ScoredRecordSet& set) {
  validate(set);
  const std::vector<std::size_t> order = ascending_order(set.scores);
  const std::size_t n = set.size();
  std::size_t correct = 0;
  for (int l : set.labels) correct += static_cast<std::size_t>(l);
  std::vector<RejectionPoint> curve;
  curve.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    curve.push_back({static_cast<double>(j) / static_cast<double>(n),
                     static_cast<double>(correct) / static_cast<double>(n - j)});
    correct -= static_cast<std::size_t>(set.labels[order[j]]);
  }
  return curve;
}

double rejection_auc(const ScoredRecordSet& set) {
  const std::vector<RejectionPoint> curve = rejection_curve(set);
  double s = 0.0;
  for (const auto& p : curve) s += p.accuracy;
  return s / static_cast<double>(curve.size());
}

double prr(const ScoredRecordSet& set) {
  validate(set);
  const double acc = set.accuracy();
  if (acc == 0.0 || acc == 1.0) domain("PRR undefined: oracle equals random");
  ScoredRecordSet oracle{std::vector<double>(set.labels.begin(), set.labels.end()),
                         set.labels};
  const double auc_base = rejection_auc(set);
  const double auc_oracle = rejection_auc(oracle);
  return (auc_base - acc) / (auc_oracle - acc);
}

RiskCoveragePoint coverage_risk(const ScoredRecordSet& set, double gamma) {
  validate(set);
  return point_of(gamma, sweep(set, {gamma}).front(), set.size());
}

std::vector<double> candidate_thresholds(const ScoredRecordSet& set) {
  validate(set);
  const std::vector<double> distinct = distinct_sorted(set.scores);
  std::vector<double> out;
  out.reserve(distinct.size() + 1);
  out.push_back(distinct.front() - 1.0);
  for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
    out.push_back(0.5 * (distinct[i] + distinct[i + 1]));
  }
  out.push_back(distinct.back() + 1.0);
  return out;
}

std::vector<RiskCoveragePoint> risk_coverage_curve(const ScoredRecordSet& set) {
  const std::vector<double> thresholds = candidate_thresholds(set);
  const std::vector<Coverage> cov = sweep(set, thresholds);
  std::vector<RiskCoveragePoint> curve;
  curve.reserve(thresholds.size());
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    curve.push_back(point_of(thresholds[i], cov[i], set.size()));
  }
  return curve;
}

double coverage_at_risk(const ScoredRecordSet& set, double max_risk) {
  validate(set);
  std::vector<double> thresholds = distinct_sorted(set.scores);
  thresholds.insert(thresholds.begin(), thresholds.front() - 1.0);
  double best = 0.0;
  for (const Coverage& c : sweep(set, thresholds)) {
    const RiskCoveragePoint p = point_of(0.0, c, set.size());
    if (c.covered > 0 && p.risk <= max_risk) best = std::max(best, p.coverage);
  }
  return best;
}

double effective_reliability(const ScoredRecordSet& set, double gamma, double cost) {
  validate(set);
  return er_of(sweep(set, {gamma}).front(), set.size(), cost);
}

Calibration calibrate_threshold(const ScoredRecordSet& val, double cost) {
  const std::vector<double> thresholds = candidate_thresholds(val);
  const std::vector<Coverage> cov = sweep(val, thresholds);
  Calibration best{thresholds.front(), er_of(cov.front(), val.size(), cost)};
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    const double er = er_of(cov[i], val.size(), cost);
    if (er >= best.val_er) best = {thresholds[i], er};
  }
  return best;
}

EvalReport evaluate(const ScoredRecordSet& test, double gamma,
                    const std::vector<double>& risk_levels, double cost) {
  validate(test);
  EvalReport r;
  r.n = test.size();
  r.accuracy = test.accuracy();
  r.auroc = auroc(test);
  r.prr = prr(test);
  r.threshold = gamma;
  r.er = effective_reliability(test, gamma, cost);
  const RiskCoveragePoint at = coverage_risk(test, gamma);
  r.coverage = at.coverage;
  r.risk = at.risk;
  for (double level : risk_levels) r.coverage_at_risk[level] = coverage_at_risk(test, level);
  r.curve = risk_coverage_curve(test);
  return r;
}

namespace {

std::string risk_key(double level) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", level);
  return buf;
}

}  // namespace

nlohmann::ordered_json report_to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["method"] = r.method;
  j["dataset"] = r.dataset;
  j["seed"] = r.seed;
  j["n"] = r.n;
  j["accuracy"] = r.accuracy;
  j["auroc"] = r.auroc;
  j["prr"] = r.prr;
  j["threshold"] = r.threshold;
  j["er"] = r.er;
  j["coverage"] = r.coverage;
  j["risk"] = r.risk;
  nlohmann::ordered_json car = nlohmann::ordered_json::object();
  for (const auto& [level, cov] : r.coverage_at_risk) car[risk_key(level)] = cov;
  j["coverage_at_risk"] = std::move(car);
  nlohmann::ordered_json curve = nlohmann::ordered_json::array();
  for (const auto& p : r.curve) curve.push_back({p.threshold, p.coverage, p.risk});
  j["curve"] = std::move(curve);
  return j;
}

EvalReport report_from_json(const nlohmann::json& j) {
  try {
    EvalReport r;
    r.method = j.at("method").get<std::string>();
    r.dataset = j.at("dataset").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.n = j.at("n").get<std::size_t>();
    r.accuracy = j.at("accuracy").get<double>();
    r.auroc = j.at("auroc").get<double>();
    r.prr = j.at("prr").get<double>();
    r.threshold = j.at("threshold").get<double>();
    r.er = j.at("er").get<double>();
    r.coverage = j.at("coverage").get<double>();
    r.risk = j.at("risk").get<double>();
    for (auto it = j.at("coverage_at_risk").begin(); it != j.at("coverage_at_risk").end();
         ++it) {
      r.coverage_at_risk[std::stod(it.key())] = it.value().get<double>();
    }
    for (const auto& p : j.at("curve")) {
      r.curve.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kMalformedInput, std::string("eval report: ") + e.what());
  }
}

std::string curve_to_csv(const std::vector<RiskCoveragePoint>& curve) {
  std::string out = "threshold,coverage,risk\n";
  char buf[96];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.threshold, p.coverage, p.risk);
    out += buf;
  }
  return out;
}

}  // namespace uekit::metrics
