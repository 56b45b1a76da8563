#include "kmarket/stats.hpp"

#include "kmarket/error.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace kmarket::stats {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

double mean(std::span<const double> x) {
    require(!x.empty(), "mean of empty sample");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double population_variance(std::span<const double> x) {
    const double m = mean(x);
    double ss = 0;
    for (double v : x) ss += (v - m) * (v - m);
    return ss / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
    require(x.size() >= 2, "sample variance needs two values");
    return population_variance(x) * static_cast<double>(x.size()) / static_cast<double>(x.size() - 1);
}

LinearFit ols(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size() && x.size() >= 2, "ols needs paired samples of length >= 2");
    const double mx = mean(x), my = mean(y);
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LinearFit fit;
    if (sxx == 0) {
        fit.slope = fit.intercept = fit.r = kNaN;
        fit.r_squared = syy == 0 ? kNaN : 0.0;
        return fit;
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (syy == 0) {
        fit.r = fit.r_squared = kNaN;
        return fit;
    }
    fit.r = sxy / std::sqrt(sxx * syy);
    double sse = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (fit.intercept + fit.slope * x[i]);
        sse += e * e;
    }
    fit.r_squared = std::clamp(1.0 - sse / syy, 0.0, 1.0);
    return fit;
}

PairedTTest paired_t_test(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), "paired t-test needs equal-length samples");
    require(a.size() >= 2, "paired t-test needs at least two pairs");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = b[i] - a[i];
    PairedTTest out;
    out.dof = static_cast<int>(d.size()) - 1;
    out.mean_difference = mean(d);
    const double sd = std::sqrt(sample_variance(d));
    if (sd == 0) {
        if (out.mean_difference == 0) {
            out.t = 0;
            out.p_value = 1;
        } else {
            out.t = std::copysign(std::numeric_limits<double>::infinity(), out.mean_difference);
            out.p_value = 0;
        }
        return out;
    }
    out.t = out.mean_difference / (sd / std::sqrt(static_cast<double>(d.size())));
    const boost::math::students_t dist(out.dof);
    out.p_value = 2 * boost::math::cdf(boost::math::complement(dist, std::abs(out.t)));
    return out;
}

double quantile(std::vector<double> x, double q) {
    require(!x.empty(), "quantile of empty sample");
    require(q >= 0 && q <= 1, "quantile level outside [0, 1]");
    std::ranges::sort(x);
    const double h = (static_cast<double>(x.size()) - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, x.size() - 1);
    return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

std::vector<LetterValue> letter_values(std::vector<double> x) {
    require(!x.empty(), "letter values of empty sample");
    std::ranges::sort(x);
    const auto n = static_cast<double>(x.size());
    // value at a (possibly half-integer) depth counted from either end, 1-based
    auto at_depth = [&](double depth, bool from_top) {
        const double pos = from_top ? n + 1 - depth : depth;
        const auto lo = static_cast<std::size_t>(std::floor(pos)) - 1;
        const auto hi = static_cast<std::size_t>(std::ceil(pos)) - 1;
        return 0.5 * (x[lo] + x[hi]);
    };
    static constexpr char kLetters[] = "MFEDCBAZYXWVUTS";
    const int levels = std::max(2, static_cast<int>(std::floor(std::log2(n))) - 3);
    std::vector<LetterValue> out;
    double depth = (n + 1) / 2;
    for (int i = 0; i < levels && i < 15 && depth >= 1; ++i) {
        out.push_back({kLetters[i], depth, at_depth(depth, false), at_depth(depth, true)});
        const double next = (std::floor(depth) + 1) / 2;
        if (next >= depth) break;
        depth = next;
    }
    return out;
}

}  // namespace kmarket::stats
