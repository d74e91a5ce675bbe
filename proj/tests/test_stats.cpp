#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "liftcheck/stats.hpp"

using namespace liftcheck;

namespace {

// Plain Pearson product-moment correlation.
double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST(SemanticScore, PercentRendering) {
  EXPECT_EQ(semantic_score(338, 1024).percent_string(), "33.01%");
  EXPECT_EQ(semantic_score(643, 1024).percent_string(), "62.79%");
  EXPECT_EQ(semantic_score(0, 1024).percent_string(), "0.00%");
  EXPECT_EQ(semantic_score(338, 1024).ratio_string(2), "0.33");
  EXPECT_EQ(semantic_score(643, 1024).ratio_string(2), "0.63");
  EXPECT_EQ(semantic_score(20, 20).ratio_string(), "1.0000");
}

TEST(SemanticScore, RoundsHalfUp) {
  EXPECT_EQ(render_fraction(1, 8, 2), "0.13");   // 0.125
  EXPECT_EQ(render_fraction(1, 200, 2), "0.01");  // 0.005
  EXPECT_EQ(render_fraction(2, 3, 3), "0.667");
  EXPECT_EQ(render_fraction(5, 5, 0), "1");
}

TEST(SemanticScore, RejectsInvalid) {
  EXPECT_THROW(semantic_score(0, 0), StatsError);
  EXPECT_THROW(semantic_score(5, 4), StatsError);
}

TEST(StudentT, MatchesReferenceValues) {
  struct Case {
    double t, df, p;
  };
  // Two-tailed survival function values, computed offline.
  const Case cases[] = {
      {2.0, 10, 0.07338803477074039},   {0.5, 48, 0.6193596576930802},
      {3.5, 1022, 0.0004853267724736307}, {1.0, 1, 0.49999999999999956},
      {-2.5, 5, 0.054490099342376204},  {0.0, 20, 1.0},
      {12.0, 30, 5.580185415199261e-13},
  };
  for (const auto& c : cases) {
    const double got = student_t_two_tailed(c.t, c.df);
    EXPECT_NEAR(got, c.p, 1e-10 * std::max(1.0, c.p)) << c.t << " df=" << c.df;
    EXPECT_NEAR(got / c.p, 1.0, 1e-8) << c.t << " df=" << c.df;
  }
  EXPECT_EQ(student_t_two_tailed(INFINITY, 10), 0.0);
}

TEST(IncompleteBeta, MatchesReferenceValues) {
  EXPECT_NEAR(regularized_incomplete_beta(2, 3, 0.4), 0.5248, 1e-12);
  EXPECT_NEAR(regularized_incomplete_beta(0.5, 0.5, 0.3), 0.36901011956554536, 1e-12);
  EXPECT_NEAR(regularized_incomplete_beta(10, 20, 0.25), 0.16630494959787945, 1e-12);
  EXPECT_NEAR(regularized_incomplete_beta(1, 1, 0.7), 0.7, 1e-12);
  EXPECT_NEAR(regularized_incomplete_beta(24, 0.5, 0.9), 0.025268888792003633, 1e-12);
  EXPECT_EQ(regularized_incomplete_beta(2, 3, 0.0), 0.0);
  EXPECT_EQ(regularized_incomplete_beta(2, 3, 1.0), 1.0);
}

TEST(PointBiserial, ReferenceDataset) {
  const std::vector<double> s{0.12, 0.55, 0.31, 0.78, 0.42, 0.66, 0.29, 0.91, 0.05, 0.47};
  const std::vector<bool> l{false, true, false, true, false, true, true, true, false, false};
  const auto r = point_biserial(s, l);
  EXPECT_NEAR(r.r, 0.6930429761482829, 1e-12);
  EXPECT_NEAR(r.p_value, 0.026283464519268166, 1e-10);
  EXPECT_EQ(r.n_pass, 5u);
  EXPECT_EQ(r.n_fail, 5u);
  EXPECT_NEAR(r.pass_mean, (0.55 + 0.78 + 0.66 + 0.29 + 0.91) / 5, 1e-15);
  EXPECT_NEAR(r.fail_mean, (0.12 + 0.31 + 0.42 + 0.05 + 0.47) / 5, 1e-15);
}

TEST(PointBiserial, EqualsPearsonOnRandomData) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s(40);
    std::vector<bool> l(40);
    std::vector<double> y(40);
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = u(rng);
      l[i] = i < 2 ? i == 0 : u(rng) < 0.4 + 0.2 * s[i];
      y[i] = l[i] ? 1.0 : 0.0;
    }
    EXPECT_NEAR(point_biserial(s, l).r, pearson(s, y), 1e-12);
  }
}

TEST(PointBiserial, SignFollowsPassGroup) {
  const std::vector<double> s{0.9, 0.8, 0.1, 0.2};
  EXPECT_GT(point_biserial(s, {true, true, false, false}).r, 0);
  EXPECT_LT(point_biserial(s, {false, false, true, true}).r, 0);
}

TEST(PointBiserial, Errors) {
  EXPECT_THROW(point_biserial(std::vector<double>{0.1, 0.2, 0.3}, {true, true, true}), StatsError);
  EXPECT_THROW(point_biserial(std::vector<double>{0.5, 0.5, 0.5}, {true, false, true}), StatsError);
  EXPECT_THROW(point_biserial(std::vector<double>{0.1, 0.2}, {true, false}), StatsError);
  EXPECT_THROW(point_biserial(std::vector<double>{0.1, 0.2, 0.3}, {true, false}), StatsError);
}

TEST(Stars, Thresholds) {
  EXPECT_EQ(significance_stars(0.0009), "***");
  EXPECT_EQ(significance_stars(0.001), "**");
  EXPECT_EQ(significance_stars(0.0099), "**");
  EXPECT_EQ(significance_stars(0.01), "*");
  EXPECT_EQ(significance_stars(0.0499), "*");
  EXPECT_EQ(significance_stars(0.05), "");
  EXPECT_EQ(significance_stars(0.7), "");
}

TEST(Distribution, LinearQuartiles) {
  const std::vector<double> a{3, 1, 4, 1, 5, 9, 2, 6};
  const auto d = distribution_summary(a);
  EXPECT_DOUBLE_EQ(d.min, 1);
  EXPECT_DOUBLE_EQ(d.q1, 1.75);
  EXPECT_DOUBLE_EQ(d.median, 3.5);
  EXPECT_DOUBLE_EQ(d.q3, 5.25);
  EXPECT_DOUBLE_EQ(d.max, 9);
  EXPECT_DOUBLE_EQ(d.mean, 3.875);
  EXPECT_EQ(d.count, 8u);
}

TEST(Distribution, SingleAndEmpty) {
  const auto d = distribution_summary(std::vector<double>{0.4});
  EXPECT_DOUBLE_EQ(d.q1, 0.4);
  EXPECT_DOUBLE_EQ(d.q3, 0.4);
  EXPECT_THROW(distribution_summary(std::vector<double>{}), StatsError);
}

TEST(Distribution, OrderingInvariant) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  for (int n = 1; n < 40; ++n) {
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    const auto d = distribution_summary(v);
    EXPECT_LE(d.min, d.q1);
    EXPECT_LE(d.q1, d.median);
    EXPECT_LE(d.median, d.q3);
    EXPECT_LE(d.q3, d.max);
  }
}
