#include <gtest/gtest.h>

#include <vector>

#include "cqrlab/error.hpp"
#include "cqrlab/losses.hpp"
#include "cqrlab/rng.hpp"

namespace cqrlab {
namespace {

TEST(Huber, Branches) {
  EXPECT_EQ(huber(0.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(huber(0.5, 1.0), 0.125);
  EXPECT_DOUBLE_EQ(huber(2.0, 1.0), 1.5);
  EXPECT_DOUBLE_EQ(huber(-2.0, 1.0), 1.5);
  EXPECT_DOUBLE_EQ(huber(1.0, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(huber_derivative(0.3, 1.0), 0.3);
  EXPECT_DOUBLE_EQ(huber_derivative(-4.0, 1.0), -1.0);
  EXPECT_DOUBLE_EQ(huber_derivative(4.0, 0.5), 0.5);
}

TEST(QuantileMidpoints, Values) {
  const auto t = quantile_midpoints(4);
  ASSERT_EQ(t.size(), 4u);
  EXPECT_DOUBLE_EQ(t[0], 0.125);
  EXPECT_DOUBLE_EQ(t[3], 0.875);
  EXPECT_THROW(quantile_midpoints(0), InvalidArgument);
}

// The loss compares every quantile with every target sample, so it vanishes
// exactly when all pairwise residuals do.
TEST(QuantileHuber, ZeroIffAllResidualsVanish) {
  const std::vector<double> c(4, 3.0);
  EXPECT_EQ(quantile_huber_loss(c, c, quantile_midpoints(4), 1.0), 0.0);
  const std::vector<double> one{2.5};
  EXPECT_EQ(quantile_huber_loss(one, one, quantile_midpoints(1), 1.0), 0.0);
  const std::vector<double> spread{-1.0, 0.5, 2.0, 7.0};
  EXPECT_GT(quantile_huber_loss(spread, spread, quantile_midpoints(4), 1.0), 0.0);
}

TEST(QuantileHuber, SingleQuantileHandComputed) {
  const std::vector<double> pred{0.0}, target{2.0}, tau{0.5};
  EXPECT_DOUBLE_EQ(quantile_huber_loss(pred, target, tau, 1.0), 0.75);
}

TEST(QuantileHuber, Asymmetry) {
  const std::vector<double> pred{0.0}, tau{0.9};
  const double above = quantile_huber_loss(pred, std::vector<double>{1.0}, tau, 1.0);
  const double below = quantile_huber_loss(pred, std::vector<double>{-1.0}, tau, 1.0);
  EXPECT_NEAR(above, 9.0 * below, 1e-12);
}

TEST(QuantileHuber, GradientMatchesFiniteDifferences) {
  Rng rng(21);
  const auto taus = quantile_midpoints(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> pred(5), target(5);
    for (auto& v : pred) v = rng.uniform(-3, 3);
    for (auto& v : target) v = rng.uniform(-3, 3);
    const double kappa = rng.uniform(0.2, 2.0);
    const auto lg = quantile_huber_loss_with_grad(pred, target, taus, kappa);
    EXPECT_DOUBLE_EQ(lg.loss, quantile_huber_loss(pred, target, taus, kappa));
    for (int i = 0; i < 5; ++i) {
      const double h = 1e-6;
      auto up = pred, down = pred;
      up[i] += h;
      down[i] -= h;
      const double fd = (quantile_huber_loss(up, target, taus, kappa) -
                         quantile_huber_loss(down, target, taus, kappa)) / (2 * h);
      EXPECT_NEAR(lg.grad_pred[i], fd, 1e-6);
    }
  }
}

// With a small kappa the tau = 0.5 minimiser sits at the median, not the mean.
TEST(QuantileHuber, MedianRecoveredOnSkewedSamples) {
  const std::vector<double> samples{0, 0, 0, 0, 10};
  const std::vector<double> tau{0.5};
  const double kappa = 0.1;
  double p = 2.0;  // sample mean as the start
  for (int it = 0; it < 20000; ++it) {
    double g = 0.0;
    for (double s : samples) {
      g += quantile_huber_loss_with_grad(std::vector<double>{p}, std::vector<double>{s}, tau, kappa).grad_pred[0];
    }
    p -= 0.01 * g;
  }
  EXPECT_NEAR(p, 0.0, 0.05);
}

TEST(QuantileHuber, Validation) {
  const std::vector<double> a{0.0, 1.0}, b{0.0};
  EXPECT_THROW(quantile_huber_loss(a, b, quantile_midpoints(2), 1.0), DimensionError);
  EXPECT_THROW(quantile_huber_loss(a, a, std::vector<double>{0.5}, 1.0), DimensionError);
  EXPECT_THROW(quantile_huber_loss(a, a, std::vector<double>{0.0, 0.5}, 1.0), InvalidArgument);
  EXPECT_THROW(quantile_huber_loss(a, a, std::vector<double>{0.7, 0.3}, 1.0), InvalidArgument);
  EXPECT_THROW(quantile_huber_loss(a, a, quantile_midpoints(2), 0.0), InvalidArgument);
}

}  // namespace
}  // namespace cqrlab
