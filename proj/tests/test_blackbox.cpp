#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "uekit/blackbox.hpp"
#include "uekit/error.hpp"

using namespace uekit;

namespace {

GenerationRecord with_probs(std::vector<double> probs) {
  GenerationRecord r;
  r.id = "r";
  r.question_tokens = {"q"};
  r.token_probs = std::move(probs);
  for (std::size_t i = 0; i < r.token_probs.size(); ++i) r.answer_tokens.push_back("t");
  return r;
}

GenerationRecord with_beams(std::vector<Beam> beams, std::optional<std::vector<int>> ids = {}) {
  GenerationRecord r = with_probs({0.5});
  r.beams = BeamSet{std::move(beams), std::move(ids)};
  return r;
}

}  // namespace

TEST(SeqProb, Examples) {
  EXPECT_EQ(blackbox::seq_prob(with_probs({1.0, 1.0})).value, 1.0);
  EXPECT_DOUBLE_EQ(blackbox::seq_prob(with_probs({0.5})).value, 0.5);
  EXPECT_NEAR(blackbox::seq_prob(with_probs({0.9, 0.4, 0.7})).value, 0.252, 1e-12);
}

TEST(SeqProb, LongSequenceStaysInLogDomain) {
  // 10k tokens at 0.5: the product underflows a double, the log does not.
  const std::vector<double> p(10000, 0.5);
  EXPECT_NEAR(blackbox::seq_log_prob(p), 10000 * std::log(0.5), 1e-6);
  EXPECT_NEAR(blackbox::lnc(with_probs(p)).value, 0.5, 1e-12);
}

TEST(Lnc, Examples) {
  EXPECT_DOUBLE_EQ(blackbox::lnc(with_probs({0.5})).value, 0.5);
  EXPECT_NEAR(blackbox::lnc(with_probs({0.9, 0.4, 0.7})).value, 0.6316, 1e-4);
  EXPECT_NEAR(blackbox::lnc(with_probs({0.9, 0.4, 0.7})).value, std::cbrt(0.252), 1e-12);
  for (int len = 1; len < 30; len += 7) {
    EXPECT_NEAR(blackbox::lnc(with_probs(std::vector<double>(len, 0.37))).value, 0.37, 1e-12);
  }
}

TEST(Entropy, Examples) {
  EXPECT_EQ(blackbox::entropy(with_beams({{{"a"}, {1.0}}})).value, 0.0);
  EXPECT_NEAR(blackbox::entropy(with_beams({{{"a"}, {0.5}}, {{"b"}, {0.25}}})).value,
              -0.5 * (std::log(0.5) + std::log(0.25)), 1e-12);
  EXPECT_NEAR(blackbox::entropy(with_beams({{{"a"}, {0.5}}, {{"b"}, {0.25}}})).value, 1.0397,
              1e-4);
  const double e1 = std::exp(-1.0);
  EXPECT_NEAR(blackbox::entropy(with_beams({{{"a"}, {e1}}, {{"b"}, {e1, e1}}, {{"c"}, {e1}}})).value,
              1.0, 1e-12);
  EXPECT_EQ(blackbox::entropy(with_beams({{{"a"}, {0.5}}})).orientation, Orientation::kUncertainty);
}

TEST(Entropy, MissingBeamsIsNamedError) {
  try {
    blackbox::entropy(with_probs({0.5}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kMissingChannel);
    EXPECT_NE(std::string(e.what()).find("requires beams"), std::string::npos);
  }
}

TEST(SemanticEntropy, Examples) {
  // Two identical strings form one cluster of mass 0.6 + 0.3 = 0.9.
  const auto one = with_beams({{{"Red"}, {0.6}}, {{"red"}, {0.3}}});
  EXPECT_NEAR(blackbox::semantic_entropy(one).value, -std::log(0.9), 1e-12);
  const auto two = with_beams({{{"red"}, {0.6}}, {{"blue"}, {0.3}}});
  EXPECT_NEAR(blackbox::semantic_entropy(two).value, 0.8574, 1e-4);
  EXPECT_NEAR(blackbox::semantic_entropy(two, blackbox::SemanticEntropyForm::kAsPrinted).value,
              0.0527, 1e-4);
  // Logged cluster ids take precedence over string matching.
  const auto logged = with_beams({{{"red"}, {0.6}}, {{"blue"}, {0.3}}}, std::vector<int>{0, 0});
  EXPECT_NEAR(blackbox::semantic_entropy(logged).value, -std::log(0.9), 1e-12);
}

TEST(ClusterEntropy, Examples) {
  const Beam a{{"a"}, {0.5}}, b{{"b"}, {0.5}}, c{{"c"}, {0.5}}, d{{"d"}, {0.5}};
  EXPECT_EQ(blackbox::cluster_entropy(with_beams({a, a, a})).value, 0.0);
  EXPECT_NEAR(blackbox::cluster_entropy(with_beams({a, a, b, a})).value, 0.5623, 1e-4);
  EXPECT_NEAR(blackbox::cluster_entropy(with_beams({a, b, c, d})).value, std::log(4.0), 1e-12);
}

TEST(FirstToken, Examples) {
  EXPECT_EQ(blackbox::first_token(with_probs({0.7, 0.01, 0.02})).value, 0.7);
  EXPECT_EQ(blackbox::first_token(with_probs({1.0})).value, 1.0);
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    auto r = oracle::make_record("x", 2, 5, 0, rng);
    const double before = blackbox::first_token(r).value;
    for (std::size_t t = 1; t < r.token_probs.size(); ++t) r.token_probs[t] = rng.uniform(0.01, 1);
    EXPECT_EQ(blackbox::first_token(r).value, before);
  }
}

TEST(SelfEval, PassthroughAndMissing) {
  auto r = with_probs({0.5});
  EXPECT_THROW(blackbox::self_eval(r), Error);
  r.self_eval_conf = 0.83;
  EXPECT_EQ(blackbox::self_eval(r).value, 0.83);
}

TEST(Registry, UnknownMethodAndParallelMatchesSerial) {
  Rng rng(4);
  Dataset d{"d", {}};
  for (int i = 0; i < 300; ++i) {
    auto r = oracle::make_record("r" + std::to_string(i), 3, 1 + rng.below(8), 0, rng);
    r.beams = BeamSet{{{{"x"}, {rng.uniform(0.1, 1)}}, {{"y"}, {rng.uniform(0.1, 1)}}}, {}};
    d.records.push_back(r);
  }
  try {
    score_dataset("nope", d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUnknownMethod);
  }
  for (const auto& m : blackbox_methods()) {
    if (m == "self-eval") continue;
    const auto a = score_dataset(m, d);
    const auto b = score_dataset_serial(m, d);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].value, b[i].value) << m;
  }
  EXPECT_THROW(score_dataset("self-eval", d), Error);
}

TEST(Normalize, CaseAndWhitespace) {
  EXPECT_EQ(blackbox::normalize_answer({"Two ", " Dogs"}), "two dogs");
  EXPECT_EQ(blackbox::normalize_answer({"A\tB"}), "a b");
}
