#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "sve/linalg.hpp"
#include "sve/rng.hpp"
#include "sve/stats.hpp"

using namespace sve;

TEST(Philox, KnownAnswerVectors) {
  // Reference outputs of Philox4x32-10 from the Random123 distribution.
  using A4 = std::array<std::uint32_t, 4>;
  using A2 = std::array<std::uint32_t, 2>;
  EXPECT_EQ(rng::philox4x32(A4{0, 0, 0, 0}, A2{0, 0}), (A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(rng::philox4x32(A4{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, A2{0xffffffff, 0xffffffff}),
            (A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(rng::philox4x32(A4{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, A2{0xa4093822, 0x299f31d0}),
            (A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Rng, SameKeySameDraws) {
  std::vector<double> a(37), b(37), c(5);
  rng::fill_normals(StreamKey{1, 2, 3, 4}, a);
  rng::fill_normals(StreamKey{1, 2, 3, 4}, b);
  rng::fill_normals(StreamKey{1, 2, 3, 4}, c);
  EXPECT_EQ(a, b);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(a[i], c[i]);
  rng::fill_normals(StreamKey{1, 2, 3, 5}, b);
  EXPECT_NE(a, b);
}

TEST(Rng, NormalMomentsAndUniformRange) {
  std::vector<double> z(100000);
  rng::fill_normals(StreamKey{42, 0, 0, 0}, z);
  EXPECT_LT(std::abs(stats::mean(z)), 4.0 / std::sqrt(1e5));
  EXPECT_NEAR(stats::variance(z), 1.0, 4.0 * std::sqrt(2.0 / 1e5));
  std::vector<double> u(10000);
  rng::fill_uniforms(StreamKey{42, 0, 0, 0}, u);
  for (double v : u) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
  EXPECT_NEAR(stats::mean(u), 0.5, 4.0 * std::sqrt(1.0 / 12 / 1e4));
}

TEST(Rng, DistinctKeysUncorrelated) {
  const std::size_t N = 50000;
  std::vector<double> prod(N);
  for (const auto& other : {StreamKey{7, 1, 0, 0}, StreamKey{7, 0, 1, 0}, StreamKey{7, 0, 0, 1}, StreamKey{8, 0, 0, 0}}) {
    std::vector<double> a(N), b(N);
    rng::fill_normals(StreamKey{7, 0, 0, 0}, a);
    rng::fill_normals(other, b);
    for (std::size_t i = 0; i < N; ++i) prod[i] = a[i] * b[i];
    const auto ci = stats::mean_ci(prod);
    EXPECT_LT(std::abs(ci.estimate), 4.0 * ci.half_width / stats::kZ95);
  }
}

TEST(Cholesky, HandTwoByTwo) {
  // [[4, 2], [2, 5]] = L L^T with L = [[2, 0], [1, 2]].
  for (auto fn : {&linalg::cholesky_serial, &linalg::cholesky_omp}) {
    std::vector<double> a{4, 2, 2, 5};
    const auto out = fn(a, 2);
    ASSERT_TRUE(out.ok);
    EXPECT_DOUBLE_EQ(a[0], 2.0);
    EXPECT_DOUBLE_EQ(a[1], 0.0);
    EXPECT_DOUBLE_EQ(a[2], 1.0);
    EXPECT_DOUBLE_EQ(a[3], 2.0);
    EXPECT_DOUBLE_EQ(out.pivots[0], 4.0);
    EXPECT_DOUBLE_EQ(out.pivots[1], 4.0);
  }
}

TEST(Cholesky, ReportsFirstNonPositivePivot) {
  std::vector<double> a{1, 2, 2, 1};
  const auto out = linalg::cholesky_serial(a, 2);
  EXPECT_FALSE(out.ok);
  EXPECT_EQ(out.failed_at, 1u);
  EXPECT_DOUBLE_EQ(out.failed_pivot, -3.0);
}

TEST(Cholesky, SerialAndParallelBitIdentical) {
  const std::size_t n = 150;
  std::vector<double> a(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] = 1.0 / (1.0 + std::abs(double(i) - double(j))) + (i == j);
  }
  auto b = a;
  ASSERT_TRUE(linalg::cholesky_serial(a, n).ok);
  ASSERT_TRUE(linalg::cholesky_omp(b, n).ok);
  EXPECT_EQ(a, b);
}
