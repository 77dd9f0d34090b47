#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "uekit/error.hpp"
#include "uekit/metrics.hpp"

using namespace uekit;
using namespace uekit::metrics;

namespace {

// Scores drawn from a small grid so ties are frequent.
ScoredRecordSet random_set(std::size_t n, Rng& rng, bool both_classes = true) {
  ScoredRecordSet s;
  for (std::size_t i = 0; i < n; ++i) {
    s.scores.push_back(std::round(rng.uniform() * 20) / 20);
    s.labels.push_back(static_cast<int>(rng.below(2)));
  }
  if (both_classes) {
    s.labels[0] = 1;
    s.labels[n - 1] = 0;
  }
  return s;
}

}  // namespace

TEST(Auroc, Examples) {
  EXPECT_EQ(auroc({{0.9, 0.1}, {1, 0}}), 1.0);
  EXPECT_EQ(auroc({{0.3, 0.3, 0.3}, {1, 0, 1}}), 0.5);
  EXPECT_EQ(auroc({{0.9, 0.8, 0.7, 0.1}, {1, 0, 1, 0}}), 0.75);
  EXPECT_THROW(auroc({{0.1, 0.2}, {1, 1}}), Error);
}

TEST(Auroc, EqualsPairCountingExactly) {
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    const auto s = random_set(2 + rng.below(199), rng);
    EXPECT_EQ(auroc(s), oracle::auroc(s.scores, s.labels));
  }
}

TEST(Auroc, InvariantUnderMonotoneTransforms) {
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    auto s = random_set(100, rng);
    auto mapped = s;
    const double a = rng.uniform(0.1, 5), b = rng.uniform(-3, 3);
    for (double& v : mapped.scores) v = std::exp(a * v) + b;
    EXPECT_EQ(auroc(mapped), auroc(s));
    EXPECT_NEAR(prr(mapped), prr(s), 1e-12);
  }
}

TEST(Rejection, Examples) {
  const auto curve = rejection_curve({{1, 1, 0, 0}, {1, 1, 0, 0}});
  ASSERT_EQ(curve.size(), 4u);
  const double expected[] = {0.5, 2.0 / 3.0, 1.0, 1.0};
  for (int j = 0; j < 4; ++j) {
    EXPECT_NEAR(curve[j].accuracy, expected[j], 1e-15);
    EXPECT_EQ(curve[j].rejected_fraction, j / 4.0);
  }
  const auto single = rejection_curve({{0.3}, {1}});
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0].rejected_fraction, 0.0);
  EXPECT_EQ(single[0].accuracy, 1.0);
}

TEST(Rejection, ConstantScoresRejectInInputOrder) {
  // Ties are broken by input order: the first records go first.
  const auto curve = rejection_curve({{0.5, 0.5, 0.5, 0.5}, {0, 1, 1, 1}});
  EXPECT_EQ(curve[0].accuracy, 0.75);
  EXPECT_EQ(curve[1].accuracy, 1.0);
}

TEST(Prr, Examples) {
  EXPECT_NEAR(prr({{0.9, 0.4, 0.8, 0.1}, {1, 1, 0, 0}}), 0.5714, 1e-4);
  EXPECT_NEAR(prr({{0.9, 0.4, 0.8, 0.1}, {1, 1, 0, 0}}), 4.0 / 7.0, 1e-15);
  EXPECT_EQ(prr({{1, 0, 1, 0, 0}, {1, 0, 1, 0, 0}}), 1.0);
  EXPECT_LT(prr({{0, 1, 0, 1, 1}, {1, 0, 1, 0, 0}}), 0.0);
  try {
    prr({{0.1, 0.2}, {1, 1}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("PRR undefined"), std::string::npos);
  }
}

TEST(Prr, EqualsFullEnumeration) {
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const auto s = random_set(2 + rng.below(49), rng);
    const auto curve = rejection_curve(s);
    const auto ref = oracle::rejection_accuracies(s.scores, s.labels);
    for (std::size_t j = 0; j < ref.size(); ++j) EXPECT_EQ(curve[j].accuracy, ref[j]);
    EXPECT_NEAR(prr(s), oracle::prr(s.scores, s.labels), 1e-12);
  }
}

TEST(Prr, RandomScorerAveragesToZero) {
  double total = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    ScoredRecordSet s;
    for (int i = 0; i < 1000; ++i) {
      s.scores.push_back(rng.uniform());
      s.labels.push_back(rng.bernoulli(0.6));
    }
    total += prr(s);
  }
  EXPECT_LE(std::abs(total / 50), 0.05);
}

TEST(CoverageRisk, Examples) {
  const ScoredRecordSet s{{0.9, 0.6, 0.4, 0.2}, {1, 0, 1, 0}};
  const auto p = coverage_risk(s, 0.5);
  EXPECT_EQ(p.coverage, 0.5);
  EXPECT_EQ(p.risk, 0.5);
  const auto none = coverage_risk(s, 0.9);
  EXPECT_EQ(none.coverage, 0.0);
  EXPECT_EQ(none.risk, 0.0);
  const auto all = coverage_risk(s, 0.1);
  EXPECT_EQ(all.coverage, 1.0);
  EXPECT_EQ(all.risk, 1.0 - s.accuracy());
}

TEST(CoverageRisk, CurveMonotoneAndComplete) {
  Rng rng(4);
  for (int t = 0; t < 30; ++t) {
    const auto s = random_set(60, rng);
    const auto curve = risk_coverage_curve(s);
    const auto cands = candidate_thresholds(s);
    ASSERT_EQ(curve.size(), cands.size());
    for (std::size_t i = 0; i < curve.size(); ++i) {
      if (i > 0) EXPECT_LE(curve[i].coverage, curve[i - 1].coverage);
      const auto direct = coverage_risk(s, cands[i]);
      EXPECT_EQ(curve[i].coverage, direct.coverage);
      EXPECT_EQ(curve[i].risk, direct.risk);
    }
    // Every achievable coverage (number of records above some score) appears.
    for (double g : s.scores) {
      const auto p = coverage_risk(s, g);
      bool found = false;
      for (const auto& c : curve) found |= c.coverage == p.coverage && c.risk == p.risk;
      EXPECT_TRUE(found);
    }
  }
}

TEST(CoverageAtRisk, Examples) {
  ScoredRecordSet perfect;
  for (int i = 0; i < 10; ++i) {
    perfect.labels.push_back(i < 7);
    perfect.scores.push_back(i < 7 ? 0.8 + 0.01 * i : 0.1 * i / 10);
  }
  EXPECT_NEAR(coverage_at_risk(perfect, 0.10), 0.7, 1e-15);
  Rng rng(5);
  const auto s = random_set(40, rng);
  EXPECT_EQ(coverage_at_risk(s, 1.0), 1.0);
  ScoredRecordSet wrong{{0.1, 0.5, 0.9}, {0, 0, 0}};
  EXPECT_EQ(coverage_at_risk(wrong, 0.10), 0.0);
}

TEST(CoverageAtRisk, NonDecreasingInRisk) {
  Rng rng(6);
  for (int t = 0; t < 30; ++t) {
    const auto s = random_set(80, rng);
    double prev = -1;
    for (double r = 0.0; r <= 1.0001; r += 0.05) {
      const double c = coverage_at_risk(s, r);
      EXPECT_GE(c, prev);
      prev = c;
    }
  }
}

TEST(EffectiveReliability, Examples) {
  // answered-correct, answered-wrong, abstained, answered-correct
  const ScoredRecordSet s{{0.9, 0.8, 0.1, 0.7}, {1, 0, 1, 1}};
  EXPECT_DOUBLE_EQ(effective_reliability(s, 0.5), 0.25);
  EXPECT_EQ(effective_reliability(s, 0.95), 0.0);
  const ScoredRecordSet perfect{{0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}};
  EXPECT_EQ(effective_reliability(perfect, 0.5), perfect.accuracy());
  EXPECT_DOUBLE_EQ(effective_reliability(s, 0.5, 2.0), 0.0);
}

TEST(Calibrate, Examples) {
  const ScoredRecordSet right{{0.3, 0.6, 0.9}, {1, 1, 1}};
  const auto c1 = calibrate_threshold(right);
  EXPECT_EQ(c1.gamma, candidate_thresholds(right).front());
  EXPECT_EQ(c1.val_er, 1.0);
  const ScoredRecordSet wrong{{0.3, 0.6, 0.9}, {0, 0, 0}};
  const auto c2 = calibrate_threshold(wrong);
  EXPECT_EQ(c2.gamma, candidate_thresholds(wrong).back());
  EXPECT_EQ(c2.val_er, 0.0);
  EXPECT_DOUBLE_EQ(calibrate_threshold({{0.9, 0.1}, {1, 0}}).gamma, 0.5);
}

TEST(Calibrate, MaximizesOverCandidates) {
  Rng rng(7);
  for (int t = 0; t < 30; ++t) {
    const auto s = random_set(50, rng);
    const auto c = calibrate_threshold(s);
    for (double g : candidate_thresholds(s)) EXPECT_LE(effective_reliability(s, g), c.val_er);
    EXPECT_EQ(effective_reliability(s, c.gamma), c.val_er);
  }
}

TEST(Evaluate, ReportRoundTripAndCsv) {
  Rng rng(8);
  const auto s = random_set(30, rng);
  EvalReport r = evaluate(s, 0.5);
  r.method = "lnc";
  r.dataset = "d";
  EXPECT_EQ(r.n, 30u);
  EXPECT_EQ(r.auroc, auroc(s));
  EXPECT_EQ(r.coverage_at_risk.size(), 2u);
  const auto j = report_to_json(r);
  EXPECT_EQ(report_to_json(report_from_json(nlohmann::json::parse(j.dump()))).dump(), j.dump());
  const std::string csv = curve_to_csv(r.curve);
  EXPECT_EQ(csv.rfind("threshold,coverage,risk\n", 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), r.curve.size() + 1);
}

TEST(Validate, RejectsBadSets) {
  EXPECT_THROW(validate({{0.1}, {1, 0}}), Error);
  EXPECT_THROW(validate({{}, {}}), Error);
  EXPECT_THROW(validate({{NAN}, {1}}), Error);
  EXPECT_THROW(validate({{0.1}, {2}}), Error);
}
