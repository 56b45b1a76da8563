#pragma once

#include <span>
#include <vector>

namespace kmarket::stats {

double mean(std::span<const double> x);
/// Divides by n.
double population_variance(std::span<const double> x);
/// Divides by n - 1.
double sample_variance(std::span<const double> x);

struct LinearFit {
    double slope = 0;
    double intercept = 0;
    double r = 0;          // signed Pearson correlation; NaN when x or y is constant
    double r_squared = 0;  // 1 - SSE/SST clipped to [0, 1]; NaN when y is constant
};

/// Ordinary least squares of y on x. Slope and intercept are NaN when x is constant.
LinearFit ols(std::span<const double> x, std::span<const double> y);

struct PairedTTest {
    double mean_difference = 0;  // mean(b - a)
    double t = 0;
    double p_value = 1;          // two-sided
    int dof = 0;
};

/// Paired t-test on b - a. A zero-variance difference gives t = ±inf, p = 0,
/// or t = 0, p = 1 when every difference is zero.
PairedTTest paired_t_test(std::span<const double> a, std::span<const double> b);

/// Linear-interpolation quantile (Hyndman-Fan type 7) of an unsorted sample.
double quantile(std::vector<double> x, double q);

struct LetterValue {
    char letter = 'M';  // M, F, E, D, C, B, A, Z, Y, ...
    double depth = 0;
    double lower = 0;
    double upper = 0;
};

/// Tukey letter values down to depth floor(log2 n) - 3 (at least median and fourths).
std::vector<LetterValue> letter_values(std::vector<double> x);

}  // namespace kmarket::stats
