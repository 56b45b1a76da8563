#include "kmarket/io.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using kmarket::io::json;
using kmarket::io::read_file;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("kmarket_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    // Runs the CLI with stderr captured; returns the exit code.
    int run(const std::string& args) {
        const std::string cmd = std::string(KMARKET_CLI) + " " + args + " > " + (dir_ / "stdout.txt").string() +
                                " 2> " + (dir_ / "stderr.txt").string();
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }
    std::string err() const { return read_file((dir_ / "stderr.txt").string()); }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

std::size_t lines(const std::string& text) {
    std::size_t n = 0;
    for (char c : text) n += c == '\n';
    return n;
}

}  // namespace

TEST_F(Cli, MissingInputIsFatal) {
    EXPECT_EQ(run("ingest --posts /nonexistent/Posts.xml --comments /nonexistent/Comments.xml --out " + path("o")), 2);
    const auto e = json::parse(err());
    EXPECT_EQ(e["error"]["kind"], "input-not-found");
    EXPECT_EQ(run("fit --series /nonexistent/series.csv --out " + path("o")), 2);
    EXPECT_EQ(json::parse(err())["error"]["kind"], "input-not-found");
}

TEST_F(Cli, UsageErrors) {
    EXPECT_EQ(run("fit --out " + path("o")), 2);
    EXPECT_EQ(json::parse(err())["error"]["kind"], "usage");
    EXPECT_EQ(run("frobnicate"), 2);
}

TEST_F(Cli, IngestMatchesGoldenCsv) {
    const std::string fx = KMARKET_FIXTURE_DIR "/tiny/";
    ASSERT_EQ(run("ingest --posts " + fx + "Posts.xml --comments " + fx + "Comments.xml --ramp-threshold 0 --out " +
                  path("ing")),
              0)
        << err();
    EXPECT_EQ(read_file(path("ing/series.csv")), read_file(fx + "series.csv"));
    const auto stats = json::parse(read_file(path("ing/ingest_stats.json")));
    EXPECT_EQ(stats["dangling_comments"], 1);
    const auto manifest = json::parse(read_file(path("ing/manifest.json")));
    EXPECT_EQ(manifest["command"], "ingest");
    EXPECT_TRUE(manifest.contains("decisions"));
    EXPECT_TRUE(fs::exists(path("ing/activity.csv")));
    EXPECT_TRUE(fs::exists(path("ing/series.json")));
}

TEST_F(Cli, FamilyFilterAndGridWinner) {
    ASSERT_EQ(run("synth --out " + path("syn") + " --noise 0 --seed 3"), 0) << err();
    ASSERT_EQ(run("fit --series " + path("syn/series.csv") + " --family power:interactive_essential --out " +
                  path("one")),
              0)
        << err();
    EXPECT_EQ(lines(read_file(path("one/grid.csv"))), 4u);  // header + q, a, c

    ASSERT_EQ(run("fit --series " + path("syn/series.csv") + " --grid --out " + path("all")), 0) << err();
    const auto grid = json::parse(read_file(path("all/grid.json")));
    EXPECT_EQ(grid["winners"]["answer"]["basis"], "power");
    EXPECT_EQ(grid["winners"]["answer"]["interaction"], "interactive_essential");
    std::istringstream csv(read_file(path("all/grid.csv")));
    std::string line;
    int winners = 0;
    while (std::getline(csv, line)) {
        std::vector<std::string> cols;
        std::istringstream row(line);
        for (std::string c; std::getline(row, c, ',');) cols.push_back(c);
        if (cols.size() > 10 && cols[0] == "answer" && cols[10] == "true") {
            ++winners;
            EXPECT_EQ(cols[1] + "/" + cols[2], "power/interactive_essential");
        }
    }
    EXPECT_EQ(winners, 1);
}

TEST_F(Cli, QuarterForecastWindows) {
    ASSERT_EQ(run("synth --out " + path("syn") + " --months 96 --seed 2"), 0) << err();
    ASSERT_EQ(run("forecast --series " + path("syn/series.csv") +
                  " --granularity quarter --train 4 --horizon 4 --content question --out " + path("fc")),
              0)
        << err();
    const auto r = json::parse(read_file(path("fc/forecast_question.json")));
    EXPECT_EQ(r["granularity"], "quarter");
    EXPECT_EQ(r["actual"].size(), 4u);
    EXPECT_EQ(r["fit"]["observations"], 4);
}

TEST_F(Cli, ForecastDefaultsAndShortSeries) {
    ASSERT_EQ(run("synth --out " + path("syn") + " --months 20"), 0) << err();
    EXPECT_EQ(run("forecast --series " + path("syn/series.csv") + " --out " + path("fc")), 2);
    const auto e = json::parse(err());
    EXPECT_EQ(e["error"]["kind"], "series-too-short");
    EXPECT_NE(e["error"]["message"].get<std::string>().find("24"), std::string::npos);
}

TEST_F(Cli, BatchForecastSummary) {
    for (int s = 1; s <= 3; ++s)
        ASSERT_EQ(run("synth --out " + path("sites/s" + std::to_string(s)) + " --seed " + std::to_string(s) +
                      " --noise 0.05 --site s" + std::to_string(s)),
                  0)
            << err();
    // batch mode reads every series file in one directory
    fs::create_directories(path("batch"));
    for (int s = 1; s <= 3; ++s)
        fs::copy_file(path("sites/s" + std::to_string(s) + "/series.json"), path("batch/s" + std::to_string(s) + ".json"));
    ASSERT_EQ(run("forecast --batch " + path("batch") + " --out " + path("bf")), 0) << err();
    const auto b = json::parse(read_file(path("bf/batch_forecast.json")));
    EXPECT_EQ(b["summary"]["answer"]["sites"], 3);
    EXPECT_TRUE(fs::exists(path("bf/batch_forecast.csv")));
}

TEST_F(Cli, AnalyzeDependencies) {
    ASSERT_EQ(run("synth --out " + path("syn") + " --dump --seed 4"), 0) << err();
    ASSERT_EQ(run("ingest --posts " + path("syn/Posts.xml") + " --comments " + path("syn/Comments.xml") + " --out " +
                  path("ing")),
              0)
        << err();
    EXPECT_EQ(run("analyze --series " + path("ing/series.csv") + " --out " + path("an")), 1);
    const auto summary = json::parse(read_file(path("an/summary.json")));
    EXPECT_EQ(summary["reports"]["diseconomies"], "skipped: needs fit");
    EXPECT_EQ(summary["reports"]["tenure"], "skipped: needs activity");
    EXPECT_EQ(summary["reports"]["roles"], "ok");
    EXPECT_EQ(summary["reports"]["health"], "ok");
}

TEST_F(Cli, AnalyzeFullPipeline) {
    ASSERT_EQ(run("synth --out " + path("syn") + " --dump --seed 5"), 0) << err();
    ASSERT_EQ(run("ingest --posts " + path("syn/Posts.xml") + " --comments " + path("syn/Comments.xml") + " --out " +
                  path("ing")),
              0)
        << err();
    ASSERT_EQ(run("fit --series " + path("ing/series.csv") + " --out " + path("fit")), 0) << err();
    ASSERT_EQ(run("analyze --series " + path("ing/series.json") + " --activity " + path("ing/activity.csv") +
                  " --grid " + path("fit/grid.json") + " --out " + path("an")),
              0)
        << err();
    for (const auto* name : {"roles", "powerlaw", "health", "exchangeability", "tenure", "diseconomies"}) {
        EXPECT_TRUE(fs::exists(path(std::string("an/") + name + ".json"))) << name;
        EXPECT_TRUE(fs::exists(path(std::string("an/") + name + ".csv"))) << name;
    }
    const auto health = json::parse(read_file(path("an/health.json")));
    for (const auto& row : health["rows"]) {
        if (row["h1"].is_null()) continue;
        EXPECT_LE(row["h2"].get<double>(), row["h1"].get<double>());
    }
}

TEST_F(Cli, HealthWithEmptyMonth) {
    std::ofstream(path("s.csv")) << "month,U,U_q,U_a,U_c,N_q,N_a,N_cq,N_ca,N_c,asked,answered,accepted,"
                                    "answered_same_period,accepted_same_period\n"
                                    "2010-01,3,1,1,1,2,1,1,0,1,2,1,1,1,1\n"
                                    "2010-02,1,0,1,0,0,1,0,0,0,0,0,0,0,0\n"
                                    "2010-03,2,1,1,0,1,1,0,0,0,1,1,0,1,0\n";
    ASSERT_EQ(run("analyze --series " + path("s.csv") + " --reports health --out " + path("an")), 0) << err();
    const auto csv = read_file(path("an/health.csv"));
    EXPECT_NE(csv.find("2010-02,1,NA,NA,NA"), std::string::npos) << csv;
}
