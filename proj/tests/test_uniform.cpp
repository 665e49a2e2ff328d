#include <cmath>
#include <limits>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "ptq/uniform.hpp"
#include "test_util.hpp"

using namespace ptq;

TEST(UniformParams, UnsignedEightBit) {
  auto p = make_uniform_params(8, 0.0, 255.0, false);
  EXPECT_EQ(p.scale, 1.0);
  EXPECT_EQ(p.offset, 0.0);
  EXPECT_EQ(p.levels, 256);
  EXPECT_EQ(p.code_min(), 0);
  EXPECT_EQ(p.code_max(), 255);
  EXPECT_FALSE(p.degenerate);
}

TEST(UniformParams, SignedTwoBit) {
  auto p = make_uniform_params(2, -1.0, 1.0, true);
  EXPECT_DOUBLE_EQ(p.scale, 2.0 / 3.0);
  EXPECT_EQ(p.offset, 0.0);
  EXPECT_EQ(p.code_min(), -2);
  EXPECT_EQ(p.code_max(), 1);
}

TEST(UniformParams, UnsignedOffsetIsLowerBound) {
  auto p = make_uniform_params(4, -3.0, 12.0, false);
  EXPECT_EQ(p.offset, -3.0);
  EXPECT_EQ(p.scale, 1.0);
}

TEST(UniformParams, DegenerateRange) {
  auto p = make_uniform_params(8, 5.0, 5.0, false);
  EXPECT_TRUE(p.degenerate);
  EXPECT_EQ(p.scale, 0.0);
  EXPECT_EQ(quantize(123.0, p), 0);
  EXPECT_EQ(quantize(-7.0, p), 0);
  EXPECT_EQ(dequantize(0, p), 5.0);
  EXPECT_PTQ_ERROR(dequantize(1, p), Errc::CodeOutOfDomain);
}

TEST(UniformParams, Errors) {
  EXPECT_PTQ_ERROR(make_uniform_params(1, 0, 1, false), Errc::InvalidBitWidth);
  EXPECT_PTQ_ERROR(make_uniform_params(32, 0, 1, false), Errc::InvalidBitWidth);
  EXPECT_PTQ_ERROR(make_uniform_params(8, 1, 0, false), Errc::InvertedRange);
  EXPECT_PTQ_ERROR(make_uniform_params(8, 0, std::numeric_limits<double>::infinity(), false),
                   Errc::InvertedRange);
}

TEST(Rounding, HalfToEven) {
  EXPECT_EQ(round_half_even(0.5), 0.0);
  EXPECT_EQ(round_half_even(1.5), 2.0);
  EXPECT_EQ(round_half_even(2.5), 2.0);
  EXPECT_EQ(round_half_even(-0.5), 0.0);
  EXPECT_EQ(round_half_even(-1.5), -2.0);
  EXPECT_EQ(round_half_even(-2.5), -2.0);
  EXPECT_EQ(round_half_even(2.4999), 2.0);
  EXPECT_EQ(round_half_even(-3.7), -4.0);
}

TEST(Quantize, SpecExamples) {
  auto u8 = make_uniform_params(8, 0.0, 255.0, false);
  EXPECT_EQ(quantize(3.4, u8), 3);
  EXPECT_EQ(quantize(300.0, u8), 255);
  EXPECT_EQ(quantize(2.5, u8), 2);
  EXPECT_EQ(quantize(3.5, u8), 4);
  EXPECT_EQ(dequantize(3, u8), 3.0);
  EXPECT_EQ(dequantize(255, u8), 255.0);
  EXPECT_PTQ_ERROR(dequantize(256, u8), Errc::CodeOutOfDomain);
  EXPECT_PTQ_ERROR(dequantize(-1, u8), Errc::CodeOutOfDomain);
}

TEST(Quantize, SignedTwoBitMatchesBruteForceNearestLevel) {
  auto p = make_uniform_params(2, -1.0, 1.0, true);
  // Oracle: nearest of the four signed levels to the clamped input.
  auto nearest = [&](double r) {
    double c = std::clamp(r, -1.0, 1.0);
    std::int64_t best = -2;
    for (std::int64_t code = -2; code <= 1; ++code) {
      if (std::abs(code * p.scale - c) < std::abs(best * p.scale - c)) best = code;
    }
    return best;
  };
  EXPECT_EQ(nearest(0.9), 1);
  EXPECT_EQ(quantize(0.9, p), 1);
  EXPECT_DOUBLE_EQ(dequantize(1, p), 2.0 / 3.0);
  for (double r : {-0.9, -0.2, 0.1, 0.3, 0.6}) EXPECT_EQ(quantize(r, p), nearest(r)) << r;
}

TEST(FakeQuantize, OnGridValuesUnchanged) {
  auto p = make_uniform_params(6, -2.0, 4.3, false);
  std::vector<double> grid;
  for (std::int64_t c = 0; c < p.levels; ++c) grid.push_back(dequantize(c, p));
  Tensor t = Tensor::vector(grid);
  EXPECT_EQ(fake_quantize_tensor(t, p), t);
}

TEST(FakeQuantize, ClampsIntoRange) {
  auto p = make_uniform_params(8, 0.0, 255.0, false);
  Tensor out = fake_quantize_tensor(Tensor::vector({-5.0, 5.0}), p);
  EXPECT_EQ(out[0], 0.0);
  EXPECT_EQ(out[1], 5.0);
}

TEST(FakeQuantize, PreservesShape) {
  auto p = make_uniform_params(4, -1.0, 1.0, true);
  Tensor t({2, 1, 3}, {0.1, -0.4, 0.9, 0.2, 0.3, -1.0});
  EXPECT_EQ(fake_quantize_tensor(t, p).shape(), t.shape());
}

TEST(FakeQuantize, GaussianMseNearUniformNoiseBound) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  std::vector<double> xs(10000);
  for (auto& x : xs) x = normal(rng);
  auto p = make_uniform_params(8, -4.0, 4.0, true);
  Tensor q = fake_quantize_tensor(Tensor::vector(xs), p);
  double mse = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) mse += (q[i] - xs[i]) * (q[i] - xs[i]);
  mse /= static_cast<double>(xs.size());
  const double s = 8.0 / 255.0;
  EXPECT_LE(mse, s * s / 12.0 * 1.10);
}

// Property checks over random (bits, range, input) triples.
class UniformProperty : public ::testing::Test {
 protected:
  std::mt19937_64 rng{99};

  UniformParams random_params(bool is_signed) {
    std::uniform_int_distribution<int> bits(2, 12);
    std::uniform_real_distribution<double> centre(-50.0, 50.0);
    std::uniform_real_distribution<double> log_width(-3.0, 3.0);
    double lo = centre(rng);
    double hi = lo + std::pow(10.0, log_width(rng));
    return make_uniform_params(bits(rng), lo, hi, is_signed);
  }
};

TEST_F(UniformProperty, UnsignedInRangeErrorAtMostHalfStep) {
  for (int trial = 0; trial < 2000; ++trial) {
    auto p = random_params(false);
    std::uniform_real_distribution<double> in(p.r_l, p.r_u);
    for (int j = 0; j < 5; ++j) {
      double r = in(rng);
      double err = std::abs(fake_quantize(r, p) - r);
      double slack = 1e-12 * std::max({std::abs(p.r_l), std::abs(p.r_u), p.scale});
      ASSERT_LE(err, p.scale / 2 + slack) << "bits=" << p.bits << " r=" << r;
      double out = fake_quantize(r, p);
      ASSERT_GE(out, p.r_l);
      ASSERT_LE(out, p.r_u);
    }
  }
}

TEST_F(UniformProperty, SignedErrorBoundedBySaturationMisalignment) {
  for (int trial = 0; trial < 2000; ++trial) {
    auto p = random_params(true);
    // Reachable grid span after saturation; in-range inputs beyond it pay the gap.
    double lo_grid = p.scale * static_cast<double>(p.code_min());
    double hi_grid = p.scale * static_cast<double>(p.code_max());
    double misalign = std::max({0.0, lo_grid - p.r_l, p.r_u - hi_grid});
    std::uniform_real_distribution<double> in(p.r_l, p.r_u);
    double r = in(rng);
    double slack = 1e-12 * std::max({std::abs(p.r_l), std::abs(p.r_u), p.scale});
    ASSERT_LE(std::abs(fake_quantize(r, p) - r), p.scale / 2 + misalign + slack);
  }
}

TEST_F(UniformProperty, IdempotentMonotoneAndLevelBounded) {
  for (int trial = 0; trial < 500; ++trial) {
    bool is_signed = trial % 2 == 0;
    auto p = random_params(is_signed);
    std::uniform_real_distribution<double> in(p.r_l - (p.r_u - p.r_l), p.r_u + (p.r_u - p.r_l));
    std::vector<double> xs(200);
    for (auto& x : xs) x = in(rng);
    std::sort(xs.begin(), xs.end());
    Tensor once = fake_quantize_tensor(Tensor::vector(xs), p);
    Tensor twice = fake_quantize_tensor(once, p);
    ASSERT_EQ(once, twice);
    std::set<double> distinct;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i > 0) ASSERT_LE(once[i - 1], once[i]);
      distinct.insert(once[i]);
    }
    ASSERT_LE(distinct.size(), static_cast<std::size_t>(p.levels));
  }
}

TEST(UniformExhaustive, EveryCodeReachableForSmallBits) {
  for (int bits = 2; bits <= 6; ++bits) {
    auto p = make_uniform_params(bits, -1.25, 3.5, false);
    std::set<std::int64_t> seen;
    for (std::int64_t c = p.code_min(); c <= p.code_max(); ++c) {
      seen.insert(quantize(dequantize(c, p), p));
    }
    EXPECT_EQ(seen.size(), static_cast<std::size_t>(p.levels));
  }
}
