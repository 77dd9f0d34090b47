#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"
#include "uekit/base64.hpp"
#include "uekit/core.hpp"
#include "uekit/error.hpp"
#include "uekit/rng.hpp"

using namespace uekit;

TEST(TokenToId, InRangeAndRepeatable) {
  const Vocab v{8, 0};
  const auto id = token_to_id("", v);
  EXPECT_LT(id, 8u);
  EXPECT_EQ(id, token_to_id("", v));
}

TEST(TokenToId, MatchesHandRolledFnv) {
  // FNV-1a over 8 little-endian salt bytes then the token bytes.
  const std::uint64_t salt = 0x0102030405060708ULL;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](unsigned char b) {
    h ^= b;
    h *= 0x100000001b3ULL;
  };
  for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>(salt >> (8 * i)));
  for (char c : std::string("banana")) mix(static_cast<unsigned char>(c));
  EXPECT_EQ(token_to_id("banana", Vocab{30000, salt}), h % 30000);
}

TEST(TokenToId, SaltChangesIds) {
  int same = 0;
  for (int i = 0; i < 100; ++i) {
    const std::string t = "tok" + std::to_string(i);
    same += token_to_id(t, {4096, 0}) == token_to_id(t, {4096, 1});
  }
  EXPECT_LT(same, 5);
}

TEST(TokenToId, OneByteMutationCollisionRate) {
  Rng rng(7);
  const Vocab v{30000, 0};
  int collisions = 0;
  for (int i = 0; i < 10000; ++i) {
    std::string t(1 + rng.below(12), 'a');
    for (char& c : t) c = static_cast<char>('a' + rng.below(26));
    std::string u = t;
    const auto pos = rng.below(u.size());
    u[pos] = static_cast<char>(u[pos] == 'z' ? 'a' : u[pos] + 1);
    collisions += token_to_id(t, v) == token_to_id(u, v);
  }
  EXPECT_LT(collisions, 500);
}

Dataset numbered(std::size_t n) {
  Dataset d{"d", {}};
  Rng rng(1);
  for (std::size_t i = 0; i < n; ++i) d.records.push_back(oracle::make_record("r" + std::to_string(i), 2, 2, 0, rng));
  return d;
}

TEST(Split, Sizes) {
  auto [a, b] = split(numbered(10), {0.8, 3});
  EXPECT_EQ(a.size(), 8u);
  EXPECT_EQ(b.size(), 2u);
  auto [c, d] = split(numbered(17), {0.8, 3});
  EXPECT_EQ(c.size(), 14u);  // 13.6 rounds to 14
  EXPECT_EQ(d.size(), 3u);
  auto [e, f] = split(numbered(5), {0.5, 3});
  EXPECT_EQ(e.size(), 2u);  // 2.5 rounds half to even
  auto [g, h] = split(numbered(7), {0.5, 3});
  EXPECT_EQ(g.size(), 4u);  // 3.5 rounds half to even
}

TEST(Split, PartitionAndDeterminism) {
  const Dataset all = numbered(50);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto [a, b] = split(all, {0.7, seed});
    auto [a2, b2] = split(all, {0.7, seed});
    EXPECT_EQ(a, a2);
    EXPECT_EQ(b, b2);
    std::set<std::string> ids;
    for (const auto& r : a.records) ids.insert(r.id);
    for (const auto& r : b.records) EXPECT_TRUE(ids.insert(r.id).second);
    EXPECT_EQ(ids.size(), all.size());
    // Each side preserves input order.
    auto pos = [&](const std::string& id) { return std::stoi(id.substr(1)); };
    for (std::size_t i = 1; i < a.size(); ++i) EXPECT_LT(pos(a.records[i - 1].id), pos(a.records[i].id));
  }
  EXPECT_NE(split(all, {0.7, 1}).first, split(all, {0.7, 2}).first);
}

TEST(Split, EmptyDatasetRejected) {
  EXPECT_THROW(split(Dataset{}, {}), Error);
}

TEST(Validate, Errors) {
  Rng rng(2);
  GenerationRecord r = oracle::make_record("x", 3, 3, 4, rng);
  EXPECT_NO_THROW(validate_record(r));
  auto expect_field = [](const GenerationRecord& bad, const std::string& field) {
    try {
      validate_record(bad);
      FAIL() << "expected rejection of " << field;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kMalformedInput);
      EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
    }
  };
  auto bad = r;
  bad.token_probs[1] = 0.0;
  expect_field(bad, "token_probs");
  bad = r;
  bad.token_probs.pop_back();
  expect_field(bad, "token_probs");
  bad = r;
  bad.correctness = 2;
  expect_field(bad, "correctness");
  bad = r;
  bad.hidden_states->rows = 5;
  expect_field(bad, "hidden_states");
  bad = r;
  bad.self_eval_conf = 1.5;
  expect_field(bad, "self_eval_conf");
  bad = r;
  bad.answer_tokens.clear();
  bad.token_probs.clear();
  bad.hidden_states.reset();
  expect_field(bad, "answer_tokens");
}

TEST(Rng, DeterministicAndBounded) {
  Rng a(5), b(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    EXPECT_EQ(u, b.uniform());
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    const int k = a.range(-3, 3);
    b.range(-3, 3);
    EXPECT_GE(k, -3);
    EXPECT_LE(k, 3);
  }
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
}

TEST(Base64, RoundTrip) {
  EXPECT_EQ(base64::encode(std::vector<std::uint8_t>{'f', 'o', 'o', 'b'}), "Zm9vYg==");
  const auto bytes = base64::decode("Zm9vYmFy");
  EXPECT_EQ(std::string(bytes.begin(), bytes.end()), "foobar");
  EXPECT_THROW(base64::decode("Zm9v!mFy"), Error);
  std::vector<float> v = {1.5f, -0.0f, 3.4028235e38f, 1e-45f};
  const auto back = base64::decode_f32le(base64::encode_f32le(v));
  ASSERT_EQ(back.size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    EXPECT_EQ(std::bit_cast<std::uint32_t>(back[i]), std::bit_cast<std::uint32_t>(v[i]));
  }
}
