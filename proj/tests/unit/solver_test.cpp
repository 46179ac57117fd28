#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"
#include "varflow/solver.hpp"

using namespace varflow;

TEST(TSequence, FirstTerms) {
  const auto t = fista_t_sequence(3);
  ASSERT_EQ(t.size(), 4u);
  EXPECT_EQ(t[0], 1.0);
  EXPECT_NEAR(t[1], (1.0 + std::sqrt(5.0)) / 2.0, 1e-15);
  EXPECT_NEAR(t[1], 1.618034, 1e-6);
  EXPECT_NEAR(t[2], 2.1935270853, 1e-10);
}

TEST(TSequence, Monotone) {
  const auto t = fista_t_sequence(500);
  for (std::size_t k = 1; k < t.size(); ++k) {
    EXPECT_GE(t[k], t[k - 1]);
    EXPECT_GE(t[k], 1.0);
  }
  const auto g = fista_momentum(500);
  ASSERT_EQ(g.size(), 500u);
  EXPECT_EQ(g[0], 0.0);
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_NEAR(g[k], (t[k] - 1.0) / t[k + 1], 0.0);
}

TEST(Checkpoints, SqrtModeCount) {
  for (std::size_t K = 1; K <= 2000; K += (K < 50 ? 1 : 37)) {
    const auto idx = checkpoint_indices(K, CheckpointMode::sqrt);
    const auto r = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(K))));
    ASSERT_FALSE(idx.empty());
    EXPECT_EQ(idx.front(), 0u);
    EXPECT_GE(idx.size(), r) << "K=" << K;
    EXPECT_LE(idx.size(), r + 2) << "K=" << K;
    for (std::size_t i = 1; i < idx.size(); ++i) EXPECT_LT(idx[i - 1], idx[i]);
    EXPECT_LT(idx.back(), K);
  }
}

TEST(Checkpoints, FullModeStoresEveryStep) {
  const auto idx = checkpoint_indices(17, CheckpointMode::full);
  ASSERT_EQ(idx.size(), 17u);
  for (std::size_t k = 0; k < 17; ++k) EXPECT_EQ(idx[k], k);
}

TEST(Prox, Branches) {
  const Field uhat(3, 1, 0.0), c(3, 1, 0.5);
  Field uh(3, 1);
  uh[0] = 2.0;
  uh[1] = 0.3;
  uh[2] = -2.0;
  const Field out = prox_data(uh, uhat, c);
  EXPECT_EQ(out[0], 1.5);
  EXPECT_EQ(out[1], 0.0);
  EXPECT_EQ(out[2], -1.5);
  EXPECT_EQ(prox_branch(2.0, 0.0, 0.5), ProxBranch::shrink_down);
  EXPECT_EQ(prox_branch(-2.0, 0.0, 0.5), ProxBranch::shrink_up);
  EXPECT_EQ(prox_branch(0.3, 0.0, 0.5), ProxBranch::clamp);
}

TEST(Prox, TiesGoToUhat) {
  EXPECT_EQ(prox_branch(1.5, 1.0, 0.5), ProxBranch::clamp);
  EXPECT_EQ(prox_branch(0.5, 1.0, 0.5), ProxBranch::clamp);
  EXPECT_EQ(prox_branch(3.0, 3.0, 0.0), ProxBranch::clamp);
}

TEST(SolverConfig, Validation) {
  SolverConfig cfg;
  cfg.delta = 0.0;
  EXPECT_EQ(testutil::error_code_of([&] { cfg.validate(); }), ErrorCode::NonPositiveDelta);
  cfg.delta = 0.1;
  cfg.iters = 0;
  EXPECT_EQ(testutil::error_code_of([&] { cfg.validate(); }), ErrorCode::IterBudgetZero);
}
