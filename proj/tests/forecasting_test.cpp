#include "kmarket/error.hpp"
#include "kmarket/forecasting.hpp"
#include "kmarket/synth.hpp"

#include "markets.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace kmarket;

TEST(Forecast, NoiselessMarketIsExact) {
    auto s = synth::generate(kmtest::forecast_config(1, 0)).series;
    for (auto c : {ContentType::Question, ContentType::Answer, ContentType::Comment}) {
        auto r = forecast(s, c);
        EXPECT_LT(r.nrmse, 1e-6) << to_string(c);
        EXPECT_EQ(r.actual.size(), 12u);
        EXPECT_EQ(r.test_first, r.train_last + 1);
        EXPECT_EQ(r.train_last - r.train_first, 11);
        EXPECT_EQ(r.fit.observations, 12u);
    }
}

TEST(Forecast, DefaultWindowsFollowProtocol) {
    auto s = synth::generate(kmtest::forecast_config(1, 0)).series;
    auto r = forecast(s, ContentType::Answer);
    EXPECT_EQ(r.train_first, s.first_period);
    EXPECT_EQ(r.test_first, s.first_period + 12);
    EXPECT_EQ(r.test_last, s.first_period + 23);
}

TEST(Forecast, TestWindowDoesNotLeakIntoFit) {
    auto s = synth::generate(kmtest::forecast_config(2, 0.05)).series;
    auto base = forecast(s, ContentType::Answer);
    auto altered = s;
    for (std::size_t t = 12; t < altered.size(); ++t) {
        altered.rows[t].answers *= 3;
        altered.rows[t].questions += 1000;
    }
    auto r = forecast(altered, ContentType::Question);
    EXPECT_EQ(r.fit.spec.theta, forecast(s, ContentType::Question).fit.spec.theta);
    auto a = forecast(altered, ContentType::Answer);
    // the answer model's test inputs changed, but its fitted parameters did not
    EXPECT_EQ(a.fit.spec.theta, base.fit.spec.theta);
    EXPECT_NE(a.predicted, base.predicted);
}

TEST(Forecast, ShortSeriesNamesRequiredLength) {
    auto c = kmtest::forecast_config(1, 0);
    c.months = 20;
    auto s = synth::generate(c).series;
    try {
        forecast(s, ContentType::Answer);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), "series-too-short");
        EXPECT_NE(std::string(e.what()).find("24"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("got 20"), std::string::npos);
    }
}

TEST(Forecast, QuarterWindows) {
    auto c = kmtest::forecast_config(3, 0);
    c.months = 96;
    auto q = coarsen_to_quarters(synth::generate(c).series);
    ASSERT_EQ(q.size(), 32u);
    ForecastOptions o;
    o.train = 4;
    o.horizon = 4;
    auto r = forecast(q, ContentType::Question, o);
    EXPECT_EQ(r.granularity, Granularity::Quarter);
    EXPECT_EQ(r.train_last - r.train_first + 1, 4);
    EXPECT_EQ(r.test_last - r.test_first + 1, 4);
    EXPECT_EQ(r.actual.size(), 4u);
}

TEST(Forecast, WeeklyAndMonthlyAgreeForExactLinearModel) {
    // N_q = 3 U_q is additive, so summing weekly predictions equals predicting on summed inputs.
    MarketSeries weekly;
    weekly.granularity = Granularity::Week;
    weekly.first_period = 2000;
    MarketSeries monthly;
    monthly.granularity = Granularity::Month;
    monthly.first_period = 2010 * 12;
    for (int m = 0; m < 24; ++m) {
        PeriodCounts month;
        for (int w = 0; w < 4; ++w) {
            PeriodCounts row;
            row.askers = 40 + 3 * m + 2 * w + (m * w) % 5;
            row.questions = 3 * row.askers;
            row.users = row.answerers = row.commenters = row.askers;
            weekly.rows.push_back(row);
            month.askers += row.askers;
            month.questions += row.questions;
        }
        month.users = month.answerers = month.commenters = month.askers;
        monthly.rows.push_back(month);
    }
    ForecastOptions wo;
    wo.train = 48;
    wo.horizon = 48;
    auto w = forecast(weekly, ContentType::Question, wo);
    auto m = forecast(monthly, ContentType::Question);
    ASSERT_EQ(w.predicted.size(), 4 * m.predicted.size());
    std::vector<double> summed;
    for (std::size_t i = 0; i < m.predicted.size(); ++i)
        summed.push_back(w.predicted[4 * i] + w.predicted[4 * i + 1] + w.predicted[4 * i + 2] + w.predicted[4 * i + 3]);
    for (std::size_t i = 0; i < summed.size(); ++i) EXPECT_NEAR(summed[i], m.predicted[i], 1e-6 * m.predicted[i]);
    auto actual = m.actual;
    double sse = 0;
    for (std::size_t i = 0; i < summed.size(); ++i) sse += (summed[i] - actual[i]) * (summed[i] - actual[i]);
    const double range = *std::ranges::max_element(actual) - *std::ranges::min_element(actual);
    EXPECT_NEAR(std::sqrt(sse / static_cast<double>(summed.size())) / range, m.nrmse, 1e-6);
}

TEST(BatchForecast, SingletonAndPair) {
    auto one = batch_forecast({synth::generate(kmtest::forecast_config(1, 0.05)).series});
    for (const auto& [content, s] : one.summary) {
        EXPECT_EQ(s.sites, 1u);
        EXPECT_EQ(s.variance, 0);
        for (const auto& r : one.reports)
            if (r.content == content) EXPECT_DOUBLE_EQ(s.mean, r.nrmse);
    }
}

TEST(BatchForecast, SummaryMatchesTwoPassRecomputation) {
    std::vector<MarketSeries> sites;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto s = synth::generate(kmtest::forecast_config(seed, 0.05)).series;
        s.site_id = "site" + std::to_string(seed);
        sites.push_back(s);
    }
    auto short_cfg = kmtest::forecast_config(99, 0);
    short_cfg.months = 10;
    auto short_site = synth::generate(short_cfg).series;
    short_site.site_id = "short";
    sites.push_back(short_site);

    auto b = batch_forecast(sites);
    ASSERT_EQ(b.skipped.size(), 1u);
    EXPECT_EQ(b.skipped[0].first, "short");
    for (const auto& [content, s] : b.summary) {
        std::vector<double> v;
        for (const auto& r : b.reports)
            if (r.content == content) v.push_back(r.nrmse);
        ASSERT_EQ(v.size(), 10u);
        double m = 0;
        for (double x : v) m += x;
        m /= 10;
        double ss = 0;
        for (double x : v) ss += (x - m) * (x - m);
        EXPECT_NEAR(s.mean, m, 1e-12);
        EXPECT_NEAR(s.variance, ss / 10, 1e-12);
    }
    EXPECT_THROW(batch_forecast({short_site}), Error);
}

TEST(BatchForecast, MeanOfTwo) {
    // two sites whose answer NRMSE we read back, then check the arithmetic of the summary
    std::vector<MarketSeries> sites{synth::generate(kmtest::forecast_config(5, 0.05)).series,
                                    synth::generate(kmtest::forecast_config(6, 0.10)).series};
    auto b = batch_forecast(sites);
    std::vector<double> v;
    for (const auto& r : b.reports)
        if (r.content == ContentType::Answer) v.push_back(r.nrmse);
    ASSERT_EQ(v.size(), 2u);
    EXPECT_NEAR(b.summary.at(ContentType::Answer).mean, (v[0] + v[1]) / 2, 1e-15);
}
