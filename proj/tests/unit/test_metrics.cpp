#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "scou/errors.hpp"
#include "scou/evaluation.hpp"

namespace {

TEST(Rmse, Basics) {
  const std::vector<double> a{1.0, 2.0, 3.0};
  EXPECT_EQ(scou::rmse(a, a), 0.0);
  EXPECT_DOUBLE_EQ(scou::rmse(std::vector<double>(5, 1.0), std::vector<double>(5, 0.0)), 1.0);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  std::vector<double> p(100), t(100);
  double ss = 0.0;
  for (int i = 0; i < 100; ++i) {
    p[i] = z(rng);
    t[i] = z(rng);
    ss += (p[i] - t[i]) * (p[i] - t[i]);
  }
  EXPECT_NEAR(scou::rmse(p, t), std::sqrt(ss / 100.0), 1e-15);
  EXPECT_THROW(scou::rmse(a, std::vector<double>{1.0}), scou::ValidationError);
}

TEST(Coverage, Basics) {
  const std::vector<double> truth{0.0, 1.0, 2.0};
  EXPECT_EQ(scou::coverage_rate(std::vector<double>(3, -INFINITY), std::vector<double>(3, INFINITY), truth), 1.0);
  EXPECT_EQ(scou::coverage_rate(truth, truth, truth), 1.0);
  EXPECT_DOUBLE_EQ(scou::coverage_rate(std::vector<double>{0.5, 0.5, 0.5}, std::vector<double>{1.5, 1.5, 1.5}, truth),
                   1.0 / 3.0);
}

TEST(Median, EvenAndOdd) {
  EXPECT_EQ(scou::median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(scou::median({4.0, 1.0, 2.0, 3.0}), 2.5);
  EXPECT_THROW(scou::median({}), scou::ValidationError);
}

TEST(Auc, SeparatedAndSingleClass) {
  const std::vector<double> s{0.1, 0.2, 0.8, 0.9};
  const std::vector<int> l{0, 0, 1, 1};
  EXPECT_EQ(scou::rank_auc(s, l), 1.0);
  const std::vector<int> one{1, 1, 1, 1};
  EXPECT_THROW(scou::rank_auc(s, one), scou::ValidationError);
  EXPECT_THROW(scou::roc_auc(s, one), scou::ValidationError);
}

TEST(Auc, TiesUseMidranks) {
  const std::vector<double> s{0.5, 0.5, 0.5, 0.5};
  const std::vector<int> l{0, 1, 0, 1};
  EXPECT_DOUBLE_EQ(scou::rank_auc(s, l), 0.5);
  const std::vector<double> s2{0.1, 0.5, 0.5, 0.9};
  const std::vector<int> l2{0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(scou::rank_auc(s2, l2), 0.875);
}

TEST(Auc, RankEqualsTrapezoid) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> coarse(0, 20);
  std::bernoulli_distribution b(0.1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> s(2000);
    std::vector<int> l(2000);
    for (std::size_t i = 0; i < s.size(); ++i) {
      l[i] = b(rng);
      s[i] = (coarse(rng) + 5 * l[i]) / 25.0;
    }
    const auto curve = scou::roc_curve(s, l);
    EXPECT_NEAR(scou::rank_auc(s, l), scou::trapezoid_auc(curve), 1e-12);
    EXPECT_EQ(curve.front().fpr, 0.0);
    EXPECT_EQ(curve.back().tpr, 1.0);
  }
}

TEST(Auc, IndependentScoresNearHalf) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u;
  std::bernoulli_distribution b(0.2);
  std::vector<double> s(20000);
  std::vector<int> l(20000);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = u(rng);
    l[i] = b(rng);
  }
  const auto est = scou::roc_auc(s, l, 200, 5);
  EXPECT_NEAR(est.auc, 0.5, 0.02);
  EXPECT_GT(est.standard_error, 0.0);
  EXPECT_LT(est.standard_error, 0.02);
  const auto again = scou::roc_auc(s, l, 200, 5);
  EXPECT_EQ(est.standard_error, again.standard_error);
}

TEST(SignTest, ExactBinomialTail) {
  const std::vector<double> d{-1, -1, -1, -1, -1, -1, -1, -1, -1, 1};
  const auto t = scou::paired_sign_test(d);
  EXPECT_EQ(t.negative, 9u);
  EXPECT_EQ(t.positive, 1u);
  EXPECT_NEAR(t.p_value, 2.0 * 11.0 / 1024.0, 1e-12);
  const std::vector<double> even{-1, 1, 0, -1, 1};
  const auto e = scou::paired_sign_test(even);
  EXPECT_EQ(e.ties, 1u);
  EXPECT_DOUBLE_EQ(e.p_value, 1.0);
}

}  // namespace
