#include "kmarket/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace kmarket::stats;

TEST(Stats, MeanAndVariance) {
    const std::vector<double> x{2, 4, 4, 4, 5, 5, 7, 9};
    EXPECT_DOUBLE_EQ(mean(x), 5);
    EXPECT_DOUBLE_EQ(population_variance(x), 4);
    EXPECT_DOUBLE_EQ(sample_variance(x), 32.0 / 7);
}

TEST(Stats, VarianceIsStableUnderLargeOffset) {
    std::vector<double> x;
    for (int i = 0; i < 10; ++i) x.push_back(1e9 + i);
    EXPECT_NEAR(population_variance(x), 8.25, 1e-6);
}

TEST(Stats, OlsExactLine) {
    const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
    auto f = ols(x, y);
    EXPECT_DOUBLE_EQ(f.slope, 2);
    EXPECT_DOUBLE_EQ(f.intercept, 1);
    EXPECT_DOUBLE_EQ(f.r_squared, 1);
    EXPECT_DOUBLE_EQ(f.r, 1);
    auto down = ols(x, std::vector<double>{9, 7, 5, 3});
    EXPECT_DOUBLE_EQ(down.r, -1);
    EXPECT_TRUE(std::isnan(ols(x, std::vector<double>{1, 1, 1, 1}).r_squared));
    EXPECT_TRUE(std::isnan(ols(std::vector<double>{2, 2, 2}, std::vector<double>{1, 2, 3}).slope));
}

TEST(Stats, PairedTTestAgainstHandFormula) {
    const std::vector<double> a{1.2, 2.3, 3.1, 4.8, 5.0}, b{1.5, 2.1, 3.9, 5.6, 5.2};
    // d = 0.3, -0.2, 0.8, 0.8, 0.2 ; mean 0.38
    const double d[] = {0.3, -0.2, 0.8, 0.8, 0.2};
    double m = 0;
    for (double v : d) m += v / 5;
    double ss = 0;
    for (double v : d) ss += (v - m) * (v - m);
    const double sd = std::sqrt(ss / 4);
    const double t = m / (sd / std::sqrt(5.0));
    // closed-form Student t CDF for 4 degrees of freedom
    const double u = 1 + t * t / 4;
    const double cdf = 0.5 + 3.0 / 8 * (t / std::sqrt(u)) * (1 - t * t / (12 * u));
    const double p = 2 * (1 - cdf);
    auto r = paired_t_test(a, b);
    EXPECT_NEAR(r.mean_difference, 0.38, 1e-12);
    EXPECT_NEAR(r.t, t, 1e-12);
    EXPECT_NEAR(r.p_value, p, 1e-12);
    EXPECT_EQ(r.dof, 4);
    // below the tabulated two-sided 5% critical value 2.776
    EXPECT_GT(p, 0.05);
    EXPECT_NEAR(t, 1.9917, 1e-3);
}

TEST(Stats, PairedTTestEdgeCases) {
    const std::vector<double> a{1, 2, 3};
    auto same = paired_t_test(a, a);
    EXPECT_EQ(same.t, 0);
    EXPECT_EQ(same.p_value, 1);
    auto shifted = paired_t_test(a, std::vector<double>{2, 3, 4});
    EXPECT_TRUE(std::isinf(shifted.t));
    EXPECT_EQ(shifted.p_value, 0);
}

TEST(Stats, QuantileType7) {
    const std::vector<double> x{7, 1, 3, 5};
    EXPECT_DOUBLE_EQ(quantile(x, 0), 1);
    EXPECT_DOUBLE_EQ(quantile(x, 1), 7);
    EXPECT_DOUBLE_EQ(quantile(x, 0.5), 4);
    EXPECT_DOUBLE_EQ(quantile(x, 0.25), 2.5);
}

TEST(Stats, LetterValues) {
    std::vector<double> x(100);
    std::iota(x.begin(), x.end(), 1.0);
    auto lv = letter_values(x);
    ASSERT_GE(lv.size(), 2u);
    EXPECT_EQ(lv[0].letter, 'M');
    EXPECT_DOUBLE_EQ(lv[0].depth, 50.5);
    EXPECT_DOUBLE_EQ(lv[0].lower, 50.5);
    EXPECT_DOUBLE_EQ(lv[0].upper, 50.5);
    EXPECT_EQ(lv[1].letter, 'F');
    // fourth depth (floor(50.5) + 1) / 2 = 25.5
    EXPECT_DOUBLE_EQ(lv[1].depth, 25.5);
    EXPECT_DOUBLE_EQ(lv[1].lower, 25.5);
    EXPECT_DOUBLE_EQ(lv[1].upper, 75.5);
    // floor(log2 100) - 3 = 3 letters
    EXPECT_EQ(lv.size(), 3u);
    for (std::size_t i = 1; i < lv.size(); ++i) {
        EXPECT_LE(lv[i].lower, lv[i - 1].lower);
        EXPECT_GE(lv[i].upper, lv[i - 1].upper);
    }
}
