#include "kmarket/error.hpp"
#include "kmarket/io.hpp"
#include "kmarket/synth.hpp"

#include "markets.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>

using namespace kmarket;

TEST(Io, DoublesRoundTrip) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> mant(-1, 1);
    std::uniform_int_distribution<int> ex(-300, 300);
    for (int i = 0; i < 2000; ++i) {
        const double v = std::ldexp(mant(rng), ex(rng));
        EXPECT_EQ(io::parse_double(io::format_double(v)), v);
    }
    EXPECT_EQ(io::format_double(NAN), "NA");
    EXPECT_EQ(io::format_double(INFINITY), "inf");
    EXPECT_EQ(io::format_double(2.0), "2");
    EXPECT_EQ(io::format_double(0.1), "0.1");
    EXPECT_TRUE(std::isnan(io::parse_double("NA")));
    EXPECT_THROW(io::parse_double("1.2.3"), Error);
}

TEST(Io, TinyFixtureGoldenCsv) {
    auto d = parse_dump_files(KMARKET_FIXTURE_DIR "/tiny/Posts.xml", KMARKET_FIXTURE_DIR "/tiny/Comments.xml");
    auto s = aggregate_monthly(d.posts, d.comments, 0, "tiny");
    EXPECT_EQ(io::series_csv(s), io::read_file(KMARKET_FIXTURE_DIR "/tiny/series.csv"));
}

TEST(Io, SeriesRoundTrips) {
    auto s = synth::generate(kmtest::base_config(3, 0.05)).series;
    s.cohorts.assign(s.size(), QuestionCohort{5, 4, 3, 2, 1});
    EXPECT_EQ(io::parse_series_csv(io::series_csv(s), s.site_id), s);
    EXPECT_EQ(io::series_from_json(io::to_json(s)), s);
    auto q = coarsen_to_quarters(s);
    EXPECT_EQ(io::parse_series_csv(io::series_csv(q), q.site_id), q);
}

TEST(Io, MalformedSeries) {
    const std::string gap = "month,U,U_q,U_a,U_c,N_q,N_a,N_cq,N_ca,N_c\n"
                            "2010-01,1,1,0,0,1,0,0,0,0\n"
                            "2010-03,1,1,0,0,1,0,0,0,0\n";
    try {
        io::parse_series_csv(gap);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), "malformed-series");
    }
    EXPECT_THROW(io::parse_series_csv("month,U\n2010-01,1\n"), Error);
    const std::string bad_sum = "month,U,U_q,U_a,U_c,N_q,N_a,N_cq,N_ca,N_c\n2010-01,1,1,0,0,1,0,1,1,3\n";
    EXPECT_THROW(io::parse_series_csv(bad_sum), Error);
}

TEST(Io, ActivityRoundTrip) {
    std::vector<UserPeriodActivity> recs{{1, 2010 * 12, 1, 0, 2}, {4, 2010 * 12 + 1, 0, 3, 0}};
    Granularity g = Granularity::Week;
    auto back = io::parse_activity_csv(io::activity_csv(recs, Granularity::Month), &g);
    EXPECT_EQ(back, recs);
    EXPECT_EQ(g, Granularity::Month);
}

TEST(Io, SpecRoundTripWithInfiniteBounds) {
    auto s = synth::generate(kmtest::base_config(1, 0)).series;
    for (auto b : kBasisKinds) {
        auto t = make_template(ContentType::Comment, b, InteractionKind::Substitutable, s);
        t.theta.assign(t.bounds.size(), 0.25);
        const auto j = io::to_json(t);
        EXPECT_TRUE(j["bounds"][0][1].is_null());
        EXPECT_EQ(io::spec_from_json(j), t);
    }
    EXPECT_THROW(io::spec_from_json(io::json{{"content_type", "answer"}}), Error);
}

TEST(Io, FitReportRoundTrip) {
    auto s = synth::generate(kmtest::base_config(2, 0.05)).series;
    auto r = fit(make_template(ContentType::Answer, BasisKind::Power, InteractionKind::InteractiveEssential, s), s);
    const auto j = io::to_json(r, &s);
    EXPECT_TRUE(j.contains("cobb_douglas"));
    auto back = io::fit_report_from_json(j);
    EXPECT_EQ(back.spec, r.spec);
    EXPECT_EQ(back.metrics.aic, r.metrics.aic);
    EXPECT_EQ(back.residuals, r.residuals);
}

TEST(Io, SynthConfigRoundTrip) {
    auto c = kmtest::base_config(42, 0.07);
    auto back = io::synth_config_from_json(io::to_json(c));
    EXPECT_EQ(synth::generate(back).series, synth::generate(c).series);
}

TEST(Io, ConfigHashIsFnv1a) {
    // reference value from an independent FNV-1a 64 implementation over the compact dump
    const io::json j = {{"a", 1}, {"b", {true, nullptr}}};
    EXPECT_EQ(j.dump(), R"({"a":1,"b":[true,null]})");
    EXPECT_EQ(io::config_hash(j), "595cf28929e773ea");
}

TEST(Io, ManifestUsesSourceDateEpoch) {
    ::setenv("SOURCE_DATE_EPOCH", "1262304000", 1);
    EXPECT_EQ(io::timestamp_now(), "2010-01-01T00:00:00Z");
    auto m = io::manifest("fit", {"series.csv"}, io::json{{"seed", 1}}, 1, 10);
    EXPECT_EQ(m["created"], "2010-01-01T00:00:00Z");
    EXPECT_EQ(m["schema_version"], io::kSchemaVersion);
    EXPECT_TRUE(m["decisions"].contains("ramp_threshold"));
    ::unsetenv("SOURCE_DATE_EPOCH");
}

TEST(Io, DumpXmlRoundTrip) {
    auto market = synth::generate(kmtest::base_config(6, 0.05)).series;
    synth::DumpConfig dc;
    dc.seed = 6;
    auto dump = synth::generate_dump(market, dc);
    std::istringstream p(io::posts_xml(dump)), c(io::comments_xml(dump));
    auto back = parse_dump(p, c);
    EXPECT_EQ(back.posts, dump.posts);
    EXPECT_EQ(back.comments, dump.comments);
}

TEST(Io, FileErrors) {
    try {
        io::read_file("/nonexistent/file.csv");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), "input-not-found");
    }
    const auto dir = std::filesystem::temp_directory_path() / "kmarket_io_test" / "nested";
    std::filesystem::remove_all(dir.parent_path());
    io::write_file((dir / "x.txt").string(), "hello\n");
    EXPECT_EQ(io::read_file((dir / "x.txt").string()), "hello\n");
    std::filesystem::remove_all(dir.parent_path());
}
