#include "kmarket/calendar.hpp"

#include <gtest/gtest.h>

using namespace kmarket;

TEST(Calendar, ParsesArchiveTimestamps) {
    EXPECT_EQ(parse_timestamp("1970-01-01T00:00:00"), 0);
    EXPECT_EQ(parse_timestamp("2010-01-05T10:00:00.123"), 1262685600);
    EXPECT_EQ(parse_timestamp("2010-01-05T10:00:00Z"), 1262685600);
    EXPECT_FALSE(parse_timestamp("2010-13-05T10:00:00"));
    EXPECT_FALSE(parse_timestamp("2010-02-30T10:00:00"));
    EXPECT_FALSE(parse_timestamp("yesterday"));
    EXPECT_EQ(parse_timestamp("2012-02-29T00:00:00"), 1330473600);
}

TEST(Calendar, MonthBoundaryIsUtc) {
    const auto jan = *parse_timestamp("2010-01-31T23:59:59");
    const auto feb = *parse_timestamp("2010-02-01T00:00:01");
    EXPECT_EQ(period_of(jan, Granularity::Month), 2010 * 12);
    EXPECT_EQ(period_of(feb, Granularity::Month), 2010 * 12 + 1);
    EXPECT_EQ(period_start(2010 * 12 + 1, Granularity::Month), *parse_timestamp("2010-02-01T00:00:00"));
}

TEST(Calendar, QuartersAndWeeks) {
    const auto t = *parse_timestamp("2011-08-17T12:00:00");
    EXPECT_EQ(period_of(t, Granularity::Quarter), 2011 * 4 + 2);
    EXPECT_EQ(period_label(2011 * 4 + 2, Granularity::Quarter), "2011Q3");
    // 2011-08-15 is a Monday
    const auto w = period_of(t, Granularity::Week);
    EXPECT_EQ(period_label(w, Granularity::Week), "2011-08-15");
    EXPECT_EQ(period_start(w, Granularity::Week), *parse_timestamp("2011-08-15T00:00:00"));
    EXPECT_EQ(period_of(*parse_timestamp("2011-08-14T23:59:59"), Granularity::Week), w - 1);
    EXPECT_EQ(period_of(0, Granularity::Week), 0);
    EXPECT_EQ(period_of(*parse_timestamp("1969-12-29T00:00:00"), Granularity::Week), 0);
}

TEST(Calendar, LabelsRoundTrip) {
    for (auto g : {Granularity::Week, Granularity::Month, Granularity::Quarter}) {
        for (std::int64_t p : {0L, 1L, 500L, 2017L * 4, 2017L * 12 + 11}) {
            const auto back = parse_period_label(period_label(p, g));
            ASSERT_TRUE(back) << period_label(p, g);
            EXPECT_EQ(back->first, p);
            EXPECT_EQ(back->second, g);
        }
    }
    EXPECT_EQ(period_label(2010 * 12, Granularity::Month), "2010-01");
    EXPECT_FALSE(parse_period_label("2010-1"));
    EXPECT_EQ(parse_granularity("quarter"), Granularity::Quarter);
    EXPECT_FALSE(parse_granularity("year"));
}
