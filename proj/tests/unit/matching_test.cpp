#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "test_util.hpp"
#include "varflow/matching.hpp"

using namespace varflow;

namespace {

FeatureMap one_hot(std::size_t w, std::size_t h, std::size_t channels, auto&& index) {
  FeatureMap f(w, h, channels);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) f.at(x, y, index(x, y)) = 1.0;
  return f;
}

FeatureMap random_features(std::size_t w, std::size_t h, std::size_t ch, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  FeatureMap f(w, h, ch);
  for (double& v : f.values()) v = d(rng);
  return f;
}

}  // namespace

TEST(Correlate, OrthonormalIdentity) {
  const std::size_t w = 5, h = 4, d = 2;
  const FeatureMap f = one_hot(w, h, w * h, [&](std::size_t x, std::size_t y) { return y * w + x; });
  const CostVolumes cv = correlate(f, f, d);
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 2; ++i) {
      const CostVolume& v = cv.cor[j][i];
      ASSERT_EQ(v.slots(), 2 * d);
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
          const auto s = v.scores(x, y);
          EXPECT_EQ(s[d], -1.0);
          for (std::size_t k = 0; k < s.size(); ++k)
            if (k != d) EXPECT_GE(s[k], 0.0);
        }
      }
    }
  }
  const FlowField u = argmin_flow(cv.cor[0][0], cv.cor[0][1]);
  for (std::size_t i = 0; i < u.u0.size(); ++i) {
    EXPECT_EQ(u.u0[i], 0.0);
    EXPECT_EQ(u.u1[i], 0.0);
  }
}

TEST(Correlate, PureShift) {
  const std::size_t w = 8, h = 5, d = 3;
  const FeatureMap f0 = one_hot(w, h, 2 * w * h, [&](std::size_t x, std::size_t y) { return y * w + x; });
  const FeatureMap f1 = one_hot(w, h, 2 * w * h, [&](std::size_t x, std::size_t y) {
    return x >= 2 ? y * w + (x - 2) : w * h + y * w + x;
  });
  const CostVolumes cv = correlate(f0, f1, d);
  const FlowField u = argmin_flow(cv.cor[0][0], cv.cor[0][1]);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x + 2 < w; ++x) {
      EXPECT_EQ(u.u0(x, y), 2.0);
      EXPECT_EQ(u.u1(x, y), 0.0);
    }
  }
}

TEST(Correlate, OutOfGridScoresSentinel) {
  std::mt19937_64 rng(1);
  const FeatureMap f = random_features(3, 3, 2, rng);
  const CostVolumes cv = correlate(f, f, 4);
  // Pixel (0, 0) cannot look 4 pixels left.
  EXPECT_EQ(cv.cor[0][0].scores(0, 0)[0], 1e30);
}

TEST(Correlate, Errors) {
  std::mt19937_64 rng(1);
  const FeatureMap a = random_features(3, 3, 2, rng), b = random_features(3, 2, 2, rng);
  EXPECT_EQ(testutil::error_code_of([&] { correlate(a, a, 0); }), ErrorCode::NonPositiveRange);
  EXPECT_EQ(testutil::error_code_of([&] { correlate(a, b, 2); }), ErrorCode::DimMismatch);
}

TEST(Correlate, SwapSymmetry) {
  std::mt19937_64 rng(4);
  const FeatureMap f0 = random_features(6, 5, 3, rng), f1 = random_features(6, 5, 3, rng);
  const CostVolumes a = correlate(f0, f1, 2), b = correlate(f1, f0, 2);
  for (int i = 0; i < 2; ++i) {
    EXPECT_EQ(a.cor[1][i], b.cor[0][i]);
    EXPECT_EQ(a.cor[0][i], b.cor[1][i]);
  }
}

TEST(Correlate, MinProjectionMatchesBruteForce) {
  std::mt19937_64 rng(9);
  int checked = 0;
  while (checked < 30) {
    const std::size_t w = 2 + rng() % 5, h = 2 + rng() % 5;
    const FeatureMap f0 = random_features(w, h, 3, rng), f1 = random_features(w, h, 3, rng);
    const CostVolumes cv = correlate(f0, f1, 2);
    const FlowField u = argmin_flow(cv.cor[0][0], cv.cor[0][1]);
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const auto ref = oracle::brute_argmin(f0, f1, x, y, 2);
        if (!ref.unique) continue;
        EXPECT_EQ(u.u0(x, y), ref.u0);
        EXPECT_EQ(u.u1(x, y), ref.u1);
      }
    }
    ++checked;
  }
}

TEST(ArgminFlow, TiesGoToSmallestDisplacement) {
  const CostVolume v(4, 3, 3);
  const FlowField u = argmin_flow(v, v);
  for (std::size_t i = 0; i < u.u0.size(); ++i) {
    EXPECT_EQ(u.u0[i], -3.0);
    EXPECT_EQ(u.u1[i], -3.0);
  }
}

TEST(Softmax, UniformScores) {
  const ScalarMap p = softmax_prob(CostVolume(3, 2, 2));
  ASSERT_EQ(p.channels(), 4u);
  for (double v : p.values()) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(Softmax, SumsToOne) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-5.0, 5.0);
  CostVolume v(5, 4, 3);
  for (std::size_t y = 0; y < 4; ++y)
    for (std::size_t x = 0; x < 5; ++x)
      for (double& s : v.scores(x, y)) s = d(rng);
  const ScalarMap p = softmax_prob(v);
  for (std::size_t y = 0; y < 4; ++y) {
    for (std::size_t x = 0; x < 5; ++x) {
      double sum = 0.0;
      for (double e : p.pixel(x, y)) {
        EXPECT_GE(e, 0.0);
        EXPECT_LE(e, 1.0);
        sum += e;
      }
      EXPECT_NEAR(sum, 1.0, 1e-6);
    }
  }
}

TEST(Softmax, Dominance) {
  CostVolume v(1, 1, 2);
  v.scores(0, 0)[2] = -100.0;
  const ScalarMap p = softmax_prob(v);
  EXPECT_GE(p.at(0, 0, 2), 1.0 - 1e-40);
  EXPECT_LT(p.at(0, 0, 0), 1e-40);
}

TEST(Softmax, OutOfGridUnderflows) {
  std::mt19937_64 rng(2);
  const FeatureMap f = random_features(3, 3, 2, rng);
  const ScalarMap p = softmax_prob(correlate(f, f, 4).cor[0][0]);
  EXPECT_EQ(p.at(0, 0, 0), 0.0);
}
