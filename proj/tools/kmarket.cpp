// kmarket: ingest, fit, forecast, analyze and synthesize knowledge-market series.

#include "kmarket/analysis.hpp"
#include "kmarket/error.hpp"
#include "kmarket/fitting.hpp"
#include "kmarket/forecasting.hpp"
#include "kmarket/ingest.hpp"
#include "kmarket/io.hpp"
#include "kmarket/synth.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>

namespace fs = std::filesystem;
using kmarket::Error;
using kmarket::io::json;

namespace {

constexpr std::uint64_t kDefaultSeed = 20171001;

enum Exit { kOk = 0, kPartial = 1, kFatal = 2 };

std::uint64_t default_seed() {
    if (const char* env = std::getenv("KMARKET_SEED"); env && *env) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw Error("bad-environment", std::string("KMARKET_SEED is not an unsigned integer: ") + env);
        }
    }
    return kDefaultSeed;
}

int report_error(const std::string& kind, const std::string& message) {
    std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
    return kFatal;
}

std::string path_in(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void write_json(const std::string& path, const json& j) { kmarket::io::write_file(path, j.dump(2) + "\n"); }

void write_pair(const std::string& dir, const std::string& stem, const json& j, const std::string& csv) {
    write_json(path_in(dir, stem + ".json"), j);
    kmarket::io::write_file(path_in(dir, stem + ".csv"), csv);
}

// ---- ingest -------------------------------------------------------------

struct IngestArgs {
    std::string posts, comments, out, site, granularity = "month";
    double ramp_threshold = 10;
};

int cmd_ingest(const IngestArgs& a) {
    const auto g = kmarket::parse_granularity(a.granularity);
    if (!g) throw Error("bad-argument", "unknown granularity " + a.granularity);
    const auto dump = kmarket::parse_dump_files(a.posts, a.comments);
    const std::string site = a.site.empty() ? fs::path(a.posts).parent_path().filename().string() : a.site;
    const auto series = kmarket::aggregate(dump.posts, dump.comments, a.ramp_threshold, *g, site);
    std::int64_t excluded = 0;
    auto activity = kmarket::user_period_activity(dump.posts, dump.comments, *g, &excluded);
    const auto first = series.first_period;
    std::erase_if(activity, [&](const kmarket::UserPeriodActivity& r) { return r.period < first; });

    kmarket::io::write_file(path_in(a.out, "series.csv"), kmarket::io::series_csv(series));
    write_json(path_in(a.out, "series.json"), kmarket::io::to_json(series));
    kmarket::io::write_file(path_in(a.out, "activity.csv"), kmarket::io::activity_csv(activity, *g));
    auto stats = kmarket::io::to_json(dump.stats);
    stats["ownerless_activity_events"] = excluded;
    stats["periods"] = series.size();
    stats["first_period"] = series.label(0);
    write_json(path_in(a.out, "ingest_stats.json"), stats);
    const json config{{"ramp_threshold", a.ramp_threshold}, {"granularity", a.granularity}, {"site", site}};
    write_json(path_in(a.out, "manifest.json"),
               kmarket::io::manifest("ingest", {a.posts, a.comments}, config, 0, a.ramp_threshold));
    return kOk;
}

// ---- fit ----------------------------------------------------------------

struct FitArgs {
    std::string series, out, family;
    bool grid = false;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

kmarket::FamilyFilter parse_family(const std::string& text) {
    kmarket::FamilyFilter f;
    const auto colon = text.find(':');
    const auto basis = text.substr(0, colon);
    f.basis = kmarket::parse_basis(basis);
    if (!f.basis) throw Error("bad-argument", "unknown basis '" + basis + "'");
    if (colon != std::string::npos) {
        const auto inter = text.substr(colon + 1);
        f.interaction = kmarket::parse_interaction(inter);
        if (!f.interaction) throw Error("bad-argument", "unknown interaction '" + inter + "'");
    }
    return f;
}

int cmd_fit(const FitArgs& a) {
    const auto series = kmarket::io::load_series(a.series);
    kmarket::GridOptions options;
    options.fit.seed = a.seed;
    options.threads = a.threads;
    if (!a.family.empty()) options.filter = parse_family(a.family);
    const auto grid = kmarket::fit_grid(series, options);

    write_pair(a.out, "grid", kmarket::io::to_json(grid), kmarket::io::grid_csv(grid));
    const json config{{"family", a.family.empty() ? "all" : a.family}, {"restarts", options.fit.restarts}};
    write_json(path_in(a.out, "manifest.json"), kmarket::io::manifest("fit", {a.series}, config, a.seed, 0));

    bool question_converged = false, any_failed = false;
    for (const auto& c : grid.cells) {
        if (!c.report) any_failed = true;
        if (c.content == kmarket::ContentType::Question && c.report && c.report->converged) question_converged = true;
    }
    if (!question_converged) {
        std::cerr << json{{"warning", {{"kind", "question-not-converged"},
                                       {"message", "no question model converged"}}}}.dump()
                  << '\n';
        return kPartial;
    }
    return any_failed ? kPartial : kOk;
}

// ---- forecast -----------------------------------------------------------

struct ForecastArgs {
    std::string series, batch, out, granularity = "month", content = "all";
    std::size_t train = 12, horizon = 12;
    std::uint64_t seed = 0;
};

kmarket::MarketSeries at_granularity(const kmarket::MarketSeries& s, kmarket::Granularity g) {
    if (s.granularity == g) return s;
    if (s.granularity == kmarket::Granularity::Month && g == kmarket::Granularity::Quarter)
        return kmarket::coarsen_to_quarters(s);
    throw Error("granularity-unavailable", "cannot derive a " + std::string(kmarket::to_string(g)) + " series from a " +
                                               std::string(kmarket::to_string(s.granularity)) +
                                               " series; ingest with --granularity " + std::string(kmarket::to_string(g)));
}

std::vector<kmarket::ContentType> contents_of(const std::string& text) {
    if (text == "all") return {kmarket::ContentType::Question, kmarket::ContentType::Answer, kmarket::ContentType::Comment};
    const auto c = kmarket::parse_content_type(text);
    if (!c) throw Error("bad-argument", "unknown content type " + text);
    return {*c};
}

int cmd_forecast(const ForecastArgs& a) {
    const auto g = kmarket::parse_granularity(a.granularity);
    if (!g) throw Error("bad-argument", "unknown granularity " + a.granularity);
    kmarket::ForecastOptions options;
    options.train = a.train;
    options.horizon = a.horizon;
    options.fit.seed = a.seed;
    const json config{{"train", a.train}, {"horizon", a.horizon}, {"granularity", a.granularity},
                      {"content", a.content}, {"test_factor_inputs", "observed"}};

    if (!a.batch.empty()) {
        if (!fs::is_directory(a.batch)) throw Error("input-not-found", "no such directory: " + a.batch);
        std::vector<std::string> paths;
        for (const auto& e : fs::directory_iterator(a.batch)) {
            const auto ext = e.path().extension().string();
            if (e.is_regular_file() && (ext == ".csv" || ext == ".json")) paths.push_back(e.path().string());
        }
        std::ranges::sort(paths);
        std::vector<kmarket::MarketSeries> sites;
        std::vector<std::pair<std::string, std::string>> unreadable;
        for (const auto& p : paths) {
            try {
                auto s = at_granularity(kmarket::io::load_series(p), *g);
                if (s.site_id.empty()) s.site_id = fs::path(p).stem().string();
                sites.push_back(std::move(s));
            } catch (const Error& e) {
                unreadable.emplace_back(p, e.kind() + ": " + e.what());
            }
        }
        auto batch = kmarket::batch_forecast(sites, options);
        batch.skipped.insert(batch.skipped.end(), unreadable.begin(), unreadable.end());
        write_pair(a.out, "batch_forecast", kmarket::io::to_json(batch), kmarket::io::batch_csv(batch));
        write_json(path_in(a.out, "manifest.json"), kmarket::io::manifest("forecast", paths, config, a.seed, 0));
        return batch.skipped.empty() ? kOk : kPartial;
    }

    const auto series = at_granularity(kmarket::io::load_series(a.series), *g);
    for (auto content : contents_of(a.content)) {
        const auto report = kmarket::forecast(series, content, options);
        write_pair(a.out, "forecast_" + std::string(kmarket::to_string(content)), kmarket::io::to_json(report),
                   kmarket::io::forecast_csv(report));
    }
    write_json(path_in(a.out, "manifest.json"), kmarket::io::manifest("forecast", {a.series}, config, a.seed, 0));
    return kOk;
}

// ---- analyze ------------------------------------------------------------

struct AnalyzeArgs {
    std::string series, activity, grid, out, reports = "all", activity_kind = "total";
    bool unsmoothed = false;
};

const std::vector<std::string> kReports{"roles", "powerlaw", "health", "exchangeability", "tenure", "diseconomies"};

const kmarket::FitReport* grid_report(const kmarket::ModelGridResult& g, kmarket::ContentType c,
                                      std::optional<kmarket::InteractionKind> i) {
    const auto* cell = g.find(c, kmarket::BasisKind::Power, i);
    return cell && cell->report ? &*cell->report : nullptr;
}

kmarket::ModelGridResult load_grid(const std::string& path) {
    const auto j = json::parse(kmarket::io::read_file(path));
    kmarket::ModelGridResult g;
    g.site_id = j.value("site_id", "");
    for (const auto& c : j.at("cells")) {
        if (c.at("status") != "ok") continue;
        auto r = kmarket::io::fit_report_from_json(c.at("report"));
        g.cells.push_back({r.spec.content, r.spec.basis, r.spec.interaction, r, {}, 0});
    }
    return g;
}

int cmd_analyze(const AnalyzeArgs& a) {
    std::set<std::string> wanted;
    if (a.reports == "all") wanted.insert(kReports.begin(), kReports.end());
    else {
        std::stringstream ss(a.reports);
        for (std::string r; std::getline(ss, r, ',');) {
            if (std::ranges::find(kReports, r) == kReports.end()) throw Error("bad-argument", "unknown report " + r);
            wanted.insert(r);
        }
    }
    const auto kind = kmarket::parse_activity_kind(a.activity_kind);
    if (!kind) throw Error("bad-argument", "unknown activity kind " + a.activity_kind);

    const auto series = kmarket::io::load_series(a.series);
    std::optional<std::vector<kmarket::UserPeriodActivity>> activity;
    kmarket::Granularity ag = series.granularity;
    if (!a.activity.empty()) activity = kmarket::io::parse_activity_csv(kmarket::io::read_file(a.activity), &ag);

    json status = json::object();
    bool partial = false;
    for (const auto& name : kReports) {
        if (!wanted.contains(name)) continue;
        auto skip = [&](const std::string& why) {
            status[name] = "skipped: " + why;
            partial = true;
        };
        try {
            if (name == "roles") {
                const auto r = kmarket::regress_roles(series);
                write_pair(a.out, "roles", kmarket::io::to_json(r), kmarket::io::roles_csv(r));
            } else if (name == "health") {
                if (series.cohorts.size() != series.size()) {
                    skip("needs question cohorts");
                    continue;
                }
                const auto h = kmarket::health_series(series);
                write_pair(a.out, "health", kmarket::io::to_json(h), kmarket::io::health_csv(h));
            } else if (name == "diseconomies") {
                if (a.grid.empty()) {
                    skip("needs fit");
                    continue;
                }
                const auto grid = load_grid(a.grid);
                const auto* q = grid_report(grid, kmarket::ContentType::Question, std::nullopt);
                const auto* ans = grid_report(grid, kmarket::ContentType::Answer, kmarket::InteractionKind::InteractiveEssential);
                if (!q || !ans) {
                    skip("needs fit");
                    continue;
                }
                const auto roles = kmarket::regress_roles(series);
                const auto users = series.column(kmarket::SeriesField::Users);
                const auto d = kmarket::diseconomies_curve(q->spec, ans->spec, roles.askers.slope,
                                                           roles.answerers.slope, users);
                write_pair(a.out, "diseconomies", kmarket::io::to_json(d), kmarket::io::diseconomies_csv(d));
            } else {
                if (!activity) {
                    skip("needs activity");
                    continue;
                }
                if (name == "powerlaw") {
                    const auto r = kmarket::size_dependence(*activity, *kind);
                    write_pair(a.out, "powerlaw", kmarket::io::to_json(r, ag), kmarket::io::size_dependence_csv(r, ag));
                } else if (name == "tenure") {
                    const auto t = kmarket::tenure_analysis(*activity);
                    write_pair(a.out, "tenure", kmarket::io::to_json(t), kmarket::io::tenure_csv(t));
                } else if (name == "exchangeability") {
                    std::set<std::int64_t> periods;
                    for (const auto& r : *activity) periods.insert(r.period);
                    std::vector<kmarket::ExchangeabilityResult> rows;
                    for (auto p : periods) rows.push_back(kmarket::exchangeability(*activity, p, !a.unsmoothed));
                    write_pair(a.out, "exchangeability", kmarket::io::to_json(rows, ag, !a.unsmoothed),
                               kmarket::io::exchangeability_csv(rows, ag));
                }
            }
            status[name] = "ok";
        } catch (const Error& e) {
            status[name] = "failed: " + e.kind() + ": " + e.what();
            partial = true;
        } catch (const std::invalid_argument& e) {
            status[name] = std::string("failed: ") + e.what();
            partial = true;
        }
    }
    write_json(path_in(a.out, "summary.json"), json{{"reports", status}});
    std::vector<std::string> inputs{a.series};
    if (!a.activity.empty()) inputs.push_back(a.activity);
    if (!a.grid.empty()) inputs.push_back(a.grid);
    const json config{{"reports", a.reports}, {"activity_kind", a.activity_kind}, {"smoothed", !a.unsmoothed}};
    write_json(path_in(a.out, "manifest.json"), kmarket::io::manifest("analyze", inputs, config, 0, 0));
    return partial ? kPartial : kOk;
}

// ---- synth --------------------------------------------------------------

struct SynthArgs {
    std::string config, out, site;
    std::optional<std::size_t> months;
    std::optional<double> noise;
    std::uint64_t seed = 0;
    bool dump = false;
    double acceptance = 0.5;
};

kmarket::ModelSpec power_ie(kmarket::ContentType c, std::vector<double> theta) {
    kmarket::ModelSpec s;
    s.content = c;
    s.basis = kmarket::BasisKind::Power;
    if (c != kmarket::ContentType::Question) s.interaction = kmarket::InteractionKind::InteractiveEssential;
    s.theta = std::move(theta);
    return s;
}

kmarket::synth::SynthConfig default_synth_config() {
    kmarket::synth::SynthConfig c;
    c.users = {kmarket::synth::TrajectoryKind::Logistic, 200, 3000, 18, 0.25};
    c.modulation = 0.15;
    c.question = power_ie(kmarket::ContentType::Question, {1.5, 0.9});
    c.answer = power_ie(kmarket::ContentType::Answer, {2.0, 0.5, 0.5});
    c.comment = power_ie(kmarket::ContentType::Comment, {0.5, 0.6, 0.4, 0.3, 0.5, 0.5});
    return c;
}

int cmd_synth(const SynthArgs& a) {
    auto config = default_synth_config();
    if (!a.config.empty()) {
        try {
            config = kmarket::io::synth_config_from_json(json::parse(kmarket::io::read_file(a.config)));
        } catch (const json::parse_error& e) {
            throw Error("malformed-config", a.config + ": " + e.what());
        }
    }
    config.seed = a.seed;
    if (a.months) config.months = *a.months;
    if (a.noise) config.noise = *a.noise;
    if (!a.site.empty()) config.site_id = a.site;
    const auto result = kmarket::synth::generate(config);

    kmarket::io::write_file(path_in(a.out, "series.csv"), kmarket::io::series_csv(result.series));
    write_json(path_in(a.out, "series.json"), kmarket::io::to_json(result.series));
    write_json(path_in(a.out, "truth.json"), kmarket::io::to_json(result.truth));
    if (a.dump) {
        kmarket::synth::DumpConfig dc;
        dc.acceptance = a.acceptance;
        dc.seed = a.seed;
        const auto dump = kmarket::synth::generate_dump(result.series, dc);
        kmarket::io::write_file(path_in(a.out, "Posts.xml"), kmarket::io::posts_xml(dump));
        kmarket::io::write_file(path_in(a.out, "Comments.xml"), kmarket::io::comments_xml(dump));
    }
    std::vector<std::string> inputs;
    if (!a.config.empty()) inputs.push_back(a.config);
    auto cfg = kmarket::io::to_json(config);
    cfg["dump"] = a.dump;
    write_json(path_in(a.out, "manifest.json"), kmarket::io::manifest("synth", inputs, cfg, a.seed, 0));
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Knowledge-market production modelling"};
    app.set_version_flag("--version", KMARKET_VERSION);
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    try {
        seed = default_seed();
    } catch (const Error& e) {
        return report_error(e.kind(), e.what());
    }

    IngestArgs ia;
    auto* ingest = app.add_subcommand("ingest", "Aggregate Posts.xml and Comments.xml into a period series");
    ingest->add_option("--posts", ia.posts, "Posts.xml")->required();
    ingest->add_option("--comments", ia.comments, "Comments.xml")->required();
    ingest->add_option("--out", ia.out, "output directory")->required();
    ingest->add_option("--ramp-threshold", ia.ramp_threshold, "questions+answers that end the ramp-up")
        ->capture_default_str();
    ingest->add_option("--granularity", ia.granularity, "month, week or quarter")->capture_default_str();
    ingest->add_option("--site", ia.site, "site id (defaults to the posts directory name)");

    FitArgs fa;
    fa.seed = seed;
    auto* fitc = app.add_subcommand("fit", "Fit production models and select winners by AIC");
    fitc->add_option("--series", fa.series, "series .csv or .json")->required();
    fitc->add_option("--out", fa.out, "output directory")->required();
    auto* grid_flag = fitc->add_flag("--grid", fa.grid, "fit every family (default)");
    fitc->add_option("--family", fa.family, "basis[:interaction], e.g. power:interactive_essential")->excludes(grid_flag);
    fitc->add_option("--seed", fa.seed, "multi-start seed (default $KMARKET_SEED)");
    fitc->add_option("--threads", fa.threads, "worker threads, 0 = hardware");

    ForecastArgs fo;
    fo.seed = seed;
    auto* fc = app.add_subcommand("forecast", "Train on the first periods and score the following ones");
    auto* fc_series = fc->add_option("--series", fo.series, "series .csv or .json");
    auto* fc_batch = fc->add_option("--batch", fo.batch, "directory of series files");
    fc_series->excludes(fc_batch);
    fc->add_option("--out", fo.out, "output directory")->required();
    fc->add_option("--train", fo.train)->capture_default_str();
    fc->add_option("--horizon", fo.horizon)->capture_default_str();
    fc->add_option("--granularity", fo.granularity, "month, week or quarter")->capture_default_str();
    fc->add_option("--content", fo.content, "question, answer, comment or all")->capture_default_str();
    fc->add_option("--seed", fo.seed);

    AnalyzeArgs aa;
    auto* an = app.add_subcommand("analyze", "Scale and health diagnostics");
    an->add_option("--series", aa.series, "series .csv or .json")->required();
    an->add_option("--activity", aa.activity, "activity.csv from ingest");
    an->add_option("--grid", aa.grid, "grid.json from fit");
    an->add_option("--out", aa.out, "output directory")->required();
    an->add_option("--reports", aa.reports, "all or a comma list of roles,powerlaw,health,exchangeability,tenure,diseconomies")
        ->capture_default_str();
    an->add_option("--activity-kind", aa.activity_kind, "total, questions, answers or comments")->capture_default_str();
    an->add_flag("--unsmoothed", aa.unsmoothed, "rank exchangeability on raw answers/questions");

    SynthArgs sa;
    sa.seed = seed;
    auto* sy = app.add_subcommand("synth", "Generate a synthetic market from known models");
    sy->add_option("--config", sa.config, "synth config JSON (default: a Cobb-Douglas market)");
    sy->add_option("--out", sa.out, "output directory")->required();
    sy->add_option("--months", sa.months);
    sy->add_option("--noise", sa.noise, "log-normal sigma on outputs");
    sy->add_option("--site", sa.site);
    sy->add_option("--seed", sa.seed);
    sy->add_flag("--dump", sa.dump, "also write Posts.xml and Comments.xml");
    sy->add_option("--acceptance", sa.acceptance, "chance an answered question has an accepted answer")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error("usage", e.what());
    }

    try {
        if (*ingest) return cmd_ingest(ia);
        if (*fitc) return cmd_fit(fa);
        if (*fc) {
            if (fo.series.empty() && fo.batch.empty()) return report_error("usage", "forecast needs --series or --batch");
            return cmd_forecast(fo);
        }
        if (*an) return cmd_analyze(aa);
        if (*sy) return cmd_synth(sa);
    } catch (const Error& e) {
        return report_error(e.kind(), e.what());
    } catch (const json::exception& e) {
        return report_error("malformed-input", e.what());
    } catch (const std::invalid_argument& e) {
        return report_error("invalid-argument", e.what());
    } catch (const std::exception& e) {
        return report_error("internal", e.what());
    }
    return kFatal;
}
