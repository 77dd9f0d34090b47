#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "uekit/error.hpp"
#include "uekit/tensor/checkpoint_file.hpp"
#include "uekit/tensor/init.hpp"
#include "uekit/tensor/optim.hpp"

using namespace uekit;
using namespace uekit::tensor;

TEST(Schedule, WarmupAndCosine) {
  const WarmupCosine s{1e-3, 10, 110};
  EXPECT_EQ(s.lr(0), 0.0);
  EXPECT_DOUBLE_EQ(s.lr(5), 5e-4);
  EXPECT_DOUBLE_EQ(s.lr(10), 1e-3);
  EXPECT_NEAR(s.lr(60), 5e-4, 1e-15);
  EXPECT_EQ(s.lr(110), 0.0);
  const auto d = WarmupCosine::with_default_warmup(1e-3, 200);
  EXPECT_EQ(d.warmup_steps, 20u);
  for (std::size_t t = 10; t < 110; ++t) EXPECT_LE(s.lr(t + 1), s.lr(t) + 1e-18);
}

TEST(AdamW, ZeroGradientZeroDecayLeavesParameter) {
  Var p = parameter(Tensor(2, 2, 0.7));
  AdamW opt({p}, AdamWConfig{0.9, 0.999, 1e-8, 0.0}, WarmupCosine{0.1, 0, 100});
  for (int i = 0; i < 10; ++i) {
    opt.zero_grad();
    p->g();
    opt.step();
  }
  for (double v : p->value.data) EXPECT_EQ(v, 0.7);
}

TEST(AdamW, FirstStepMatchesHandComputation) {
  Var p = parameter(Tensor::scalar(2.0));
  const AdamWConfig cfg{0.9, 0.999, 1e-8, 0.01};
  const WarmupCosine sched{0.1, 0, 10};
  AdamW opt({p}, cfg, sched);
  p->g().data[0] = 0.5;
  opt.step();
  // m_hat = g, v_hat = g^2 after bias correction.
  const double expected = 2.0 - 0.1 * (0.5 / (0.5 + 1e-8) + 0.01 * 2.0);
  EXPECT_NEAR(p->value.item(), expected, 1e-15);
  EXPECT_EQ(opt.step_count(), 1u);
}

TEST(AdamW, QuadraticDecreasesMonotonicallyAfterWarmup) {
  Var x = parameter(Tensor::scalar(-5.0));
  AdamW opt({x}, AdamWConfig{0.9, 0.999, 1e-8, 0.0}, WarmupCosine::with_default_warmup(0.02, 200));
  std::vector<double> losses;
  for (int step = 0; step < 200; ++step) {
    opt.zero_grad();
    Var d = sub(x, constant(Tensor::scalar(3.0)));
    Var loss = mul(d, d);
    losses.push_back(loss->value.item());
    backward(loss);
    opt.step();
  }
  for (std::size_t t = 21; t < losses.size(); ++t) EXPECT_LE(losses[t], losses[t - 1] + 1e-6) << t;
  EXPECT_LT(losses.back(), losses.front());
}

TEST(Init, DeterministicBoundedDistinct) {
  Rng a(1), b(1), c(2);
  const Tensor x = init_params(100, 100, InitScheme::kXavierUniform, a);
  EXPECT_EQ(x, init_params(100, 100, InitScheme::kXavierUniform, b));
  EXPECT_NE(x, init_params(100, 100, InitScheme::kXavierUniform, c));
  const double bound = std::sqrt(6.0 / 200.0);
  for (double v : x.data) {
    EXPECT_LE(std::abs(v), bound);
  }
  Rng d(3);
  for (double v : init_params(3, 3, InitScheme::kZeros, d).data) EXPECT_EQ(v, 0.0);
  for (double v : init_params(3, 3, InitScheme::kOnes, d).data) EXPECT_EQ(v, 1.0);
}

TEST(CheckpointFile, RoundTripAndErrors) {
  CheckpointFile f;
  f.metadata["note"] = "x";
  f.tensors.push_back({"a", Tensor(2, 3, 0.25)});
  f.tensors.push_back({"b", Tensor(1, 1, -1.5)});
  const std::string bytes = encode_checkpoint(f);
  const CheckpointFile back = decode_checkpoint(bytes);
  EXPECT_EQ(back.metadata, f.metadata);
  ASSERT_EQ(back.tensors.size(), 2u);
  EXPECT_EQ(back.tensors[0].second, f.tensors[0].second);
  EXPECT_EQ(encode_checkpoint(back), bytes);

  auto expect_error = [](const std::string& b, const std::string& needle) {
    try {
      decode_checkpoint(b);
      FAIL() << needle;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kCheckpoint);
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  expect_error(bytes.substr(0, bytes.size() - 3), "truncated blob");
  expect_error(bytes.substr(0, 5), "corrupt header");
  std::string bumped = bytes;
  const auto pos = bumped.find("\"format_version\":1");
  ASSERT_NE(pos, std::string::npos);
  bumped[pos + 17] = '2';
  expect_error(bumped, "format version mismatch");
}
