#include "kmarket/io.hpp"

#include "kmarket/error.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace kmarket::io {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

constexpr const char* kSeriesColumns[] = {"U", "U_q", "U_a", "U_c", "N_q", "N_a", "N_cq", "N_ca", "N_c"};
constexpr SeriesField kSeriesFields[] = {SeriesField::Users,     SeriesField::Askers,
                                         SeriesField::Answerers, SeriesField::Commenters,
                                         SeriesField::Questions, SeriesField::Answers,
                                         SeriesField::QuestionComments, SeriesField::AnswerComments,
                                         SeriesField::Comments};
constexpr const char* kCohortColumns[] = {"asked", "answered", "accepted", "answered_same_period",
                                          "accepted_same_period"};

double& field_ref(PeriodCounts& r, SeriesField f) {
    switch (f) {
        case SeriesField::Users: return r.users;
        case SeriesField::Askers: return r.askers;
        case SeriesField::Answerers: return r.answerers;
        case SeriesField::Commenters: return r.commenters;
        case SeriesField::Questions: return r.questions;
        case SeriesField::Answers: return r.answers;
        case SeriesField::QuestionComments: return r.question_comments;
        case SeriesField::AnswerComments: return r.answer_comments;
        case SeriesField::Comments: return r.comments;
    }
    return r.users;
}

std::int64_t* cohort_fields(QuestionCohort& c, std::size_t i) {
    std::int64_t* f[] = {&c.asked, &c.answered, &c.accepted, &c.answered_same_period, &c.accepted_same_period};
    return f[i];
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    for (;;) {
        const auto next = line.find(sep, pos);
        out.push_back(line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> out;
    for (auto line : split(text, '\n')) {
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

std::int64_t parse_int(std::string_view text, const char* kind) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw Error(kind, "not an integer: '" + std::string(text) + "'");
    return v;
}

std::string iso_utc(UtcSeconds t) {
    using namespace std::chrono;
    const sys_seconds tp{seconds{t}};
    const auto day = floor<days>(tp);
    const year_month_day ymd{day};
    const hh_mm_ss hms{tp - day};
    char buf[96];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ld.000", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                  static_cast<long>(hms.seconds().count()));
    return buf;
}

std::string period_column(Granularity g) { return std::string(to_string(g)); }

json optional_interaction(const std::optional<InteractionKind>& i) {
    return i ? json(std::string(to_string(*i))) : json(nullptr);
}

std::string csv_join(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    out += '\n';
    return out;
}

json fit_to_json(const stats::LinearFit& f) {
    return {{"slope", number(f.slope)}, {"intercept", number(f.intercept)}, {"r", number(f.r)},
            {"r_squared", number(f.r_squared)}};
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "NA";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0) return "0";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
    if (text == "NA" || text == "nan") return kNaN;
    if (text == "inf") return kInf;
    if (text == "-inf") return -kInf;
    double v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw Error("malformed-number", "not a number: '" + std::string(text) + "'");
    return v;
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        if (!std::filesystem::exists(path)) throw Error("input-not-found", "no such file: " + path);
        throw Error("input-unreadable", "cannot open " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    const std::filesystem::path p(path);
    std::error_code ec;
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("output-unwritable", "cannot write " + path);
    out << content;
    if (!out) throw Error("output-unwritable", "write failed for " + path);
}

// ---- series -------------------------------------------------------------

std::string series_csv(const MarketSeries& s) {
    const bool cohorts = s.cohorts.size() == s.size() && !s.cohorts.empty();
    std::vector<std::string> header{period_column(s.granularity)};
    for (auto c : kSeriesColumns) header.emplace_back(c);
    if (cohorts)
        for (auto c : kCohortColumns) header.emplace_back(c);
    std::string out = csv_join(header);
    for (std::size_t i = 0; i < s.size(); ++i) {
        std::vector<std::string> row{s.label(i)};
        for (auto f : kSeriesFields) row.push_back(format_double(value_of(s.rows[i], f)));
        if (cohorts) {
            auto c = s.cohorts[i];
            for (std::size_t k = 0; k < 5; ++k) row.push_back(std::to_string(*cohort_fields(c, k)));
        }
        out += csv_join(row);
    }
    return out;
}

MarketSeries parse_series_csv(std::string_view text, std::string site_id) {
    const auto lines = lines_of(text);
    if (lines.empty()) throw Error("malformed-series", "series CSV is empty");
    const auto header = split(lines[0], ',');
    const auto g = parse_granularity(header[0]);
    if (!g) throw Error("malformed-series", "first column must be month, week or quarter");
    bool cohorts = false;
    if (header.size() == 15) cohorts = true;
    else if (header.size() != 10) throw Error("malformed-series", "series CSV needs 10 or 15 columns");
    for (std::size_t i = 0; i < 9; ++i)
        if (header[i + 1] != kSeriesColumns[i])
            throw Error("malformed-series", "unexpected column '" + std::string(header[i + 1]) + "'");

    MarketSeries s;
    s.site_id = std::move(site_id);
    s.granularity = *g;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto cells = split(lines[li], ',');
        const auto where = " on line " + std::to_string(li + 1);
        if (cells.size() != header.size()) throw Error("malformed-series", "wrong column count" + where);
        const auto label = parse_period_label(cells[0]);
        if (!label || label->second != *g) throw Error("malformed-series", "bad period label" + where);
        if (li == 1) s.first_period = label->first;
        else if (label->first != s.period(s.size()))
            throw Error("malformed-series", "periods are not consecutive" + where);
        PeriodCounts row;
        try {
            for (std::size_t i = 0; i < 9; ++i) field_ref(row, kSeriesFields[i]) = parse_double(cells[i + 1]);
            if (cohorts) {
                QuestionCohort c;
                for (std::size_t k = 0; k < 5; ++k) *cohort_fields(c, k) = parse_int(cells[10 + k], "malformed-series");
                s.cohorts.push_back(c);
            }
        } catch (const Error& e) {
            throw Error("malformed-series", e.what() + where);
        }
        s.rows.push_back(row);
    }
    validate(s);
    return s;
}

json to_json(const MarketSeries& s) {
    json rows = json::array();
    for (std::size_t i = 0; i < s.size(); ++i) {
        json r{{"period", s.label(i)}};
        for (std::size_t k = 0; k < 9; ++k) r[kSeriesColumns[k]] = number(value_of(s.rows[i], kSeriesFields[k]));
        if (s.cohorts.size() == s.size()) {
            auto c = s.cohorts[i];
            json cj;
            for (std::size_t k = 0; k < 5; ++k) cj[kCohortColumns[k]] = *cohort_fields(c, k);
            r["cohort"] = cj;
        }
        rows.push_back(r);
    }
    return {{"schema_version", kSchemaVersion},
            {"site_id", s.site_id},
            {"granularity", std::string(to_string(s.granularity))},
            {"rows", rows}};
}

MarketSeries series_from_json(const json& j) {
    try {
        MarketSeries s;
        s.site_id = j.value("site_id", "");
        const auto g = parse_granularity(j.at("granularity").get<std::string>());
        if (!g) throw Error("malformed-series", "unknown granularity");
        s.granularity = *g;
        bool first = true;
        for (const auto& r : j.at("rows")) {
            const auto label = parse_period_label(r.at("period").get<std::string>());
            if (!label || label->second != *g) throw Error("malformed-series", "bad period label");
            if (first) s.first_period = label->first;
            else if (label->first != s.period(s.size())) throw Error("malformed-series", "periods are not consecutive");
            first = false;
            PeriodCounts row;
            for (std::size_t k = 0; k < 9; ++k) field_ref(row, kSeriesFields[k]) = number_from(r.at(kSeriesColumns[k]));
            s.rows.push_back(row);
            if (r.contains("cohort")) {
                QuestionCohort c;
                for (std::size_t k = 0; k < 5; ++k) *cohort_fields(c, k) = r["cohort"].at(kCohortColumns[k]).get<std::int64_t>();
                s.cohorts.push_back(c);
            }
        }
        validate(s);
        return s;
    } catch (const json::exception& e) {
        throw Error("malformed-series", std::string("series JSON: ") + e.what());
    }
}

MarketSeries load_series(const std::string& path) {
    const auto text = read_file(path);
    const auto ext = std::filesystem::path(path).extension().string();
    if (ext == ".json") {
        json j;
        try {
            j = json::parse(text);
        } catch (const json::exception& e) {
            throw Error("malformed-series", path + ": " + e.what());
        }
        return series_from_json(j);
    }
    return parse_series_csv(text, std::filesystem::path(path).stem().string());
}

json to_json(const IngestStats& s) {
    return {{"post_rows", s.post_rows},
            {"comment_rows", s.comment_rows},
            {"skipped_post_types", s.skipped_post_types},
            {"malformed_posts", s.malformed_posts},
            {"malformed_comments", s.malformed_comments},
            {"dangling_comments", s.dangling_comments},
            {"ownerless_posts", s.ownerless_posts},
            {"ownerless_comments", s.ownerless_comments}};
}

std::string activity_csv(std::span<const UserPeriodActivity> records, Granularity g) {
    std::string out = csv_join({"user_id", period_column(g), "questions", "answers", "comments"});
    for (const auto& r : records)
        out += csv_join({std::to_string(r.user_id), period_label(r.period, g), std::to_string(r.questions),
                         std::to_string(r.answers), std::to_string(r.comments)});
    return out;
}

std::vector<UserPeriodActivity> parse_activity_csv(std::string_view text, Granularity* granularity) {
    const auto lines = lines_of(text);
    if (lines.empty()) throw Error("malformed-activity", "activity CSV is empty");
    const auto header = split(lines[0], ',');
    if (header.size() != 5 || header[0] != "user_id" || !parse_granularity(header[1]))
        throw Error("malformed-activity", "activity CSV header must be user_id,<granularity>,questions,answers,comments");
    const auto g = *parse_granularity(header[1]);
    if (granularity) *granularity = g;
    std::vector<UserPeriodActivity> out;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto cells = split(lines[li], ',');
        const auto where = " on line " + std::to_string(li + 1);
        if (cells.size() != 5) throw Error("malformed-activity", "wrong column count" + where);
        const auto label = parse_period_label(cells[1]);
        if (!label || label->second != g) throw Error("malformed-activity", "bad period label" + where);
        UserPeriodActivity r{parse_int(cells[0], "malformed-activity"), label->first,
                             parse_int(cells[2], "malformed-activity"), parse_int(cells[3], "malformed-activity"),
                             parse_int(cells[4], "malformed-activity")};
        if (r.questions < 0 || r.answers < 0 || r.comments < 0)
            throw Error("malformed-activity", "negative count" + where);
        out.push_back(r);
    }
    return out;
}

std::string posts_xml(const ParsedDump& dump) {
    std::string out = "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<posts>\n";
    for (const auto& p : dump.posts) {
        out += "  <row Id=\"" + std::to_string(p.id) + "\" PostTypeId=\"" +
               (p.type == PostType::Question ? "1" : "2") + "\"";
        if (p.parent) out += " ParentId=\"" + std::to_string(*p.parent) + "\"";
        if (p.accepted_answer) out += " AcceptedAnswerId=\"" + std::to_string(*p.accepted_answer) + "\"";
        out += " CreationDate=\"" + iso_utc(p.created) + "\"";
        if (p.owner) out += " OwnerUserId=\"" + std::to_string(*p.owner) + "\"";
        out += " />\n";
    }
    return out + "</posts>\n";
}

std::string comments_xml(const ParsedDump& dump) {
    std::string out = "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<comments>\n";
    for (const auto& c : dump.comments) {
        out += "  <row Id=\"" + std::to_string(c.id) + "\" PostId=\"" + std::to_string(c.post_id) +
               "\" CreationDate=\"" + iso_utc(c.created) + "\"";
        if (c.owner) out += " OwnerUserId=\"" + std::to_string(*c.owner) + "\"";
        out += " />\n";
    }
    return out + "</comments>\n";
}

// ---- models and fits ----------------------------------------------------

json to_json(const ModelSpec& spec) {
    json bounds = json::array();
    for (const auto& b : spec.bounds) bounds.push_back({number(b.lo), number(b.hi)});
    json theta = json::array();
    for (double v : spec.theta) theta.push_back(number(v));
    return {{"content_type", std::string(to_string(spec.content))},
            {"basis", std::string(to_string(spec.basis))},
            {"interaction", optional_interaction(spec.interaction)},
            {"parameter_names", parameter_names(spec.content, spec.basis, spec.interaction)},
            {"theta", theta},
            {"bounds", bounds}};
}

ModelSpec spec_from_json(const json& j) {
    try {
        ModelSpec spec;
        const auto c = parse_content_type(j.at("content_type").get<std::string>());
        const auto b = parse_basis(j.at("basis").get<std::string>());
        if (!c || !b) throw Error("malformed-spec", "unknown content type or basis");
        spec.content = *c;
        spec.basis = *b;
        if (j.contains("interaction") && !j["interaction"].is_null()) {
            const auto i = parse_interaction(j["interaction"].get<std::string>());
            if (!i) throw Error("malformed-spec", "unknown interaction");
            spec.interaction = *i;
        }
        for (const auto& v : j.at("theta")) spec.theta.push_back(number_from(v));
        if (j.contains("bounds"))
            for (const auto& b : j["bounds"]) {
                const double lo = b.at(0).is_null() ? -kInf : b.at(0).get<double>();
                const double hi = b.at(1).is_null() ? kInf : b.at(1).get<double>();
                spec.bounds.push_back({lo, hi});
            }
        try {
            check_spec(spec);
        } catch (const ContractViolation& e) {
            throw Error("malformed-spec", e.what());
        }
        return spec;
    } catch (const json::exception& e) {
        throw Error("malformed-spec", std::string("model spec JSON: ") + e.what());
    }
}

json to_json(const FitMetrics& m) {
    return {{"rmse", number(m.rmse)}, {"nrmse", number(m.nrmse)}, {"evs", number(m.evs)},
            {"aic", number(m.aic)},   {"sse", number(m.sse)}};
}

json to_json(const FitReport& r, const MarketSeries* observed) {
    json params = json::object();
    const auto names = parameter_names(r.spec.content, r.spec.basis, r.spec.interaction);
    for (std::size_t i = 0; i < names.size() && i < r.spec.theta.size(); ++i) params[names[i]] = number(r.spec.theta[i]);
    json predicted = json::array(), residuals = json::array(), starts = json::array();
    for (double v : r.predicted) predicted.push_back(number(v));
    for (double v : r.residuals) residuals.push_back(number(v));
    for (double v : r.start_sse) starts.push_back(number(v));
    json out{{"site_id", r.site_id},
             {"family", family_name(r.spec)},
             {"spec", to_json(r.spec)},
             {"parameters", params},
             {"metrics", to_json(r.metrics)},
             {"observations", r.observations},
             {"k", r.parameters},
             {"converged", r.converged},
             {"termination", r.termination},
             {"iterations", r.iterations},
             {"restarts_used", r.restarts_used},
             {"best_start", r.best_start},
             {"start_sse", starts},
             {"predicted", predicted},
             {"residuals", residuals}};
    try {
        const auto cd = cobb_douglas_summary(r.spec);
        out["cobb_douglas"] = {{"total_factor_productivity", number(cd.total_factor_productivity)},
                               {"elasticities", cd.elasticities},
                               {"returns_to_scale", number(cd.returns_to_scale)},
                               {"classification", std::string(to_string(cd.classification))},
                               {"admissible", cd.admissible}};
    } catch (const Error&) {
    }
    if (observed) {
        json periods = json::array();
        for (std::size_t i = 0; i < observed->size(); ++i) periods.push_back(observed->label(i));
        out["periods"] = periods;
    }
    return out;
}

FitReport fit_report_from_json(const json& j) {
    try {
        FitReport r;
        r.site_id = j.value("site_id", "");
        r.spec = spec_from_json(j.at("spec"));
        const auto& m = j.at("metrics");
        r.metrics = {number_from(m.at("rmse")), number_from(m.at("nrmse")), number_from(m.at("evs")),
                     number_from(m.at("aic")), number_from(m.at("sse"))};
        r.observations = j.value("observations", std::size_t{0});
        r.parameters = j.value("k", std::size_t{0});
        r.converged = j.value("converged", false);
        r.termination = j.value("termination", "");
        r.iterations = j.value("iterations", 0);
        r.restarts_used = j.value("restarts_used", 0);
        r.best_start = j.value("best_start", 0);
        auto numbers = [&](const char* key) {
            std::vector<double> v;
            if (j.contains(key))
                for (const auto& x : j.at(key)) v.push_back(number_from(x));
            return v;
        };
        r.start_sse = numbers("start_sse");
        r.predicted = numbers("predicted");
        r.residuals = numbers("residuals");
        return r;
    } catch (const json::exception& e) {
        throw Error("malformed-fit", std::string("fit report JSON: ") + e.what());
    }
}

json to_json(const ModelGridResult& g) {
    json cells = json::array();
    for (std::size_t i = 0; i < g.cells.size(); ++i) {
        const auto& c = g.cells[i];
        json cell{{"content_type", std::string(to_string(c.content))},
                  {"basis", std::string(to_string(c.basis))},
                  {"interaction", optional_interaction(c.interaction)},
                  {"status", c.report ? "ok" : "failed"}};
        const auto w = g.winners.find(c.content);
        cell["winner"] = w != g.winners.end() && w->second == i;
        if (c.report) {
            cell["delta_aic"] = number(c.delta_aic);
            cell["report"] = to_json(*c.report);
        } else {
            cell["error"] = c.error;
        }
        cells.push_back(cell);
    }
    json winners = json::object();
    for (const auto& [content, i] : g.winners) {
        const auto& c = g.cells[i];
        winners[std::string(to_string(content))] = {{"family", family_name(c.report->spec)},
                                                    {"basis", std::string(to_string(c.basis))},
                                                    {"interaction", optional_interaction(c.interaction)}};
    }
    return {{"schema_version", kSchemaVersion}, {"site_id", g.site_id}, {"winners", winners}, {"cells", cells}};
}

std::string grid_csv(const ModelGridResult& g) {
    std::string out = csv_join({"content", "basis", "interaction", "k", "rmse", "nrmse", "evs", "aic", "delta_aic",
                                "converged", "winner", "error"});
    for (std::size_t i = 0; i < g.cells.size(); ++i) {
        const auto& c = g.cells[i];
        const auto w = g.winners.find(c.content);
        const bool winner = w != g.winners.end() && w->second == i;
        std::vector<std::string> row{std::string(to_string(c.content)), std::string(to_string(c.basis)),
                                     c.interaction ? std::string(to_string(*c.interaction)) : "NA"};
        if (c.report) {
            const auto& m = c.report->metrics;
            row.insert(row.end(), {std::to_string(c.report->parameters), format_double(m.rmse), format_double(m.nrmse),
                                   format_double(m.evs), format_double(m.aic), format_double(c.delta_aic),
                                   c.report->converged ? "true" : "false", winner ? "true" : "false", ""});
        } else {
            std::string err = c.error;
            for (auto& ch : err)
                if (ch == ',' || ch == '\n') ch = ';';
            row.insert(row.end(), {"NA", "NA", "NA", "NA", "NA", "NA", "false", "false", err});
        }
        out += csv_join(row);
    }
    return out;
}

json to_json(const std::vector<MetricComparison>& comparisons) {
    json out = json::array();
    for (const auto& c : comparisons)
        out.push_back({{"metric", std::string(to_string(c.metric))},
                       {"pairs", c.pairs},
                       {"mean_difference", number(c.test.mean_difference)},
                       {"t", number(c.test.t)},
                       {"p_value", number(c.test.p_value)},
                       {"dof", c.test.dof},
                       {"significant", c.significant},
                       {"favors", c.favors}});
    return out;
}

// ---- forecasts ----------------------------------------------------------

json to_json(const ForecastReport& r) {
    json actual = json::array(), predicted = json::array();
    for (double v : r.actual) actual.push_back(number(v));
    for (double v : r.predicted) predicted.push_back(number(v));
    return {{"site_id", r.site_id},
            {"content_type", std::string(to_string(r.content))},
            {"granularity", std::string(to_string(r.granularity))},
            {"train_window", {period_label(r.train_first, r.granularity), period_label(r.train_last, r.granularity)}},
            {"test_window", {period_label(r.test_first, r.granularity), period_label(r.test_last, r.granularity)}},
            {"test_factor_inputs", "observed"},
            {"actual", actual},
            {"predicted", predicted},
            {"nrmse", number(r.nrmse)},
            {"fit", to_json(r.fit)}};
}

std::string forecast_csv(const ForecastReport& r) {
    std::string out = csv_join({period_column(r.granularity), "actual", "predicted"});
    for (std::size_t i = 0; i < r.actual.size(); ++i)
        out += csv_join({period_label(r.test_first + static_cast<std::int64_t>(i), r.granularity),
                         format_double(r.actual[i]), format_double(r.predicted[i])});
    return out;
}

json to_json(const BatchForecast& b) {
    json summary = json::object();
    for (const auto& [content, s] : b.summary)
        summary[std::string(to_string(content))] = {{"sites", s.sites}, {"mean", number(s.mean)},
                                                   {"variance", number(s.variance)}};
    json sites = json::array();
    for (const auto& r : b.reports)
        sites.push_back({{"site_id", r.site_id}, {"content_type", std::string(to_string(r.content))},
                         {"nrmse", number(r.nrmse)}});
    json skipped = json::array();
    for (const auto& [site, why] : b.skipped) skipped.push_back({{"site_id", site}, {"reason", why}});
    return {{"schema_version", kSchemaVersion}, {"summary", summary}, {"sites", sites}, {"skipped", skipped},
            {"variance", "population"}};
}

std::string batch_csv(const BatchForecast& b) {
    std::string out = csv_join({"content", "sites", "mean", "variance"});
    for (const auto& [content, s] : b.summary)
        out += csv_join({std::string(to_string(content)), std::to_string(s.sites), format_double(s.mean),
                         format_double(s.variance)});
    return out;
}

// ---- analyses -----------------------------------------------------------

json to_json(const RoleRegressionReport& r) {
    return {{"periods", r.periods},
            {"askers", fit_to_json(r.askers)},
            {"answerers", fit_to_json(r.answerers)},
            {"commenters", fit_to_json(r.commenters)}};
}

std::string roles_csv(const RoleRegressionReport& r) {
    std::string out = csv_join({"role", "slope", "intercept", "r", "r_squared"});
    for (const auto& [name, f] : {std::pair{"askers", r.askers}, {"answerers", r.answerers}, {"commenters", r.commenters}})
        out += csv_join({name, format_double(f.slope), format_double(f.intercept), format_double(f.r),
                         format_double(f.r_squared)});
    return out;
}

json to_json(const SizeDependenceReport& r, Granularity g) {
    json months = json::array();
    for (const auto& f : r.months)
        months.push_back({{"period", period_label(f.period, g)},
                          {"n_participants", f.n},
                          {"alpha", number(f.alpha)},
                          {"log_likelihood", number(f.log_likelihood)},
                          {"xmin", f.xmin},
                          {"skipped", f.skipped},
                          {"degenerate", f.degenerate}});
    return {{"months", months},
            {"valid_months", r.valid_months},
            {"regression", fit_to_json(r.regression)},
            {"strength", std::string(to_string(r.strength))},
            {"big", r.big}};
}

std::string size_dependence_csv(const SizeDependenceReport& r, Granularity g) {
    std::string out = csv_join({period_column(g), "n_participants", "alpha", "log_likelihood", "skipped", "degenerate"});
    for (const auto& f : r.months)
        out += csv_join({period_label(f.period, g), std::to_string(f.n), format_double(f.alpha),
                         format_double(f.log_likelihood), f.skipped ? "true" : "false",
                         f.degenerate ? "true" : "false"});
    return out;
}

json to_json(const HealthSeries& h) {
    json rows = json::array();
    for (const auto& r : h.rows)
        rows.push_back({{"period", period_label(r.period, h.granularity)},
                        {"U", number(r.users)},
                        {"answers_per_question", number(r.answers_per_question)},
                        {"h1", number(r.h1)},
                        {"h2", number(r.h2)},
                        {"h1_same_period", number(r.h1_same_period)},
                        {"h2_same_period", number(r.h2_same_period)}});
    return {{"site_id", h.site_id}, {"attribution", "question creation period, answers as of dump time"}, {"rows", rows}};
}

std::string health_csv(const HealthSeries& h) {
    std::string out = csv_join({period_column(h.granularity), "U", "answers_per_question", "h1", "h2",
                                "h1_same_period", "h2_same_period"});
    for (const auto& r : h.rows)
        out += csv_join({period_label(r.period, h.granularity), format_double(r.users),
                         format_double(r.answers_per_question), format_double(r.h1), format_double(r.h2),
                         format_double(r.h1_same_period), format_double(r.h2_same_period)});
    return out;
}

json to_json(std::span<const ExchangeabilityResult> e, Granularity g, bool smoothed) {
    json rows = json::array();
    for (const auto& r : e)
        rows.push_back({{"period", period_label(r.period, g)},
                        {"contributors", r.contributors},
                        {"slice", r.slice},
                        {"skipped", r.skipped},
                        {"e1", number(r.e1)},
                        {"e2", number(r.e2)},
                        {"top_score", number(r.top_score)},
                        {"median_score", number(r.median_score)},
                        {"bottom_score", number(r.bottom_score)}});
    return {{"ranking", smoothed ? "answers/questions, (answers+1)/(questions+1) for non-askers"
                                 : "answers/questions, non-askers excluded"},
            {"distance", "euclidean"},
            {"rows", rows}};
}

std::string exchangeability_csv(std::span<const ExchangeabilityResult> e, Granularity g) {
    std::string out = csv_join({period_column(g), "contributors", "slice", "skipped", "e1", "e2", "top_score",
                                "median_score", "bottom_score"});
    for (const auto& r : e)
        out += csv_join({period_label(r.period, g), std::to_string(r.contributors), std::to_string(r.slice),
                         r.skipped ? "true" : "false", format_double(r.e1), format_double(r.e2),
                         format_double(r.top_score), format_double(r.median_score), format_double(r.bottom_score)});
    return out;
}

json to_json(const TenureBinReport& t) {
    json bins = json::array();
    for (std::size_t i = 0; i < t.bins.size(); ++i) {
        const auto& b = t.bins[i];
        json lv = json::array();
        for (const auto& v : b.letter_values)
            lv.push_back({{"letter", std::string(1, v.letter)}, {"depth", v.depth}, {"lower", number(v.lower)},
                          {"upper", number(v.upper)}});
        json q = b.quartiles ? json{number((*b.quartiles)[0]), number((*b.quartiles)[1]), number((*b.quartiles)[2])}
                             : json(nullptr);
        bins.push_back({{"level", i + 1}, {"lo", number(b.lo)}, {"hi", number(b.hi)}, {"users", b.users.size()},
                        {"quartiles", q}, {"letter_values", lv}});
    }
    return {{"users", t.users}, {"contribution", "answers per active period"}, {"bins", bins}};
}

std::string tenure_csv(const TenureBinReport& t) {
    std::string out = csv_join({"level", "lo", "hi", "users", "q1", "median", "q3"});
    for (std::size_t i = 0; i < t.bins.size(); ++i) {
        const auto& b = t.bins[i];
        const auto q = b.quartiles.value_or(std::array{kNaN, kNaN, kNaN});
        out += csv_join({std::to_string(i + 1), format_double(b.lo), format_double(b.hi), std::to_string(b.users.size()),
                         format_double(q[0]), format_double(q[1]), format_double(q[2])});
    }
    return out;
}

json to_json(const DiseconomiesCurve& d) {
    json points = json::array();
    for (const auto& p : d.points) points.push_back({{"U", number(p.users)}, {"ratio", number(p.ratio)}});
    return {{"elasticity", number(d.elasticity)},
            {"percent_per_percent", number(d.percent_per_percent)},
            {"classification", d.diseconomies ? "diseconomies" : "economies"},
            {"constant", number(d.constant)},
            {"composed_elasticity", number(d.composed_elasticity)},
            {"points", points}};
}

std::string diseconomies_csv(const DiseconomiesCurve& d) {
    std::string out = csv_join({"U", "ratio"});
    for (const auto& p : d.points) out += csv_join({format_double(p.users), format_double(p.ratio)});
    return out;
}

// ---- synth config -------------------------------------------------------

json to_json(const synth::SynthConfig& c) {
    return {{"site_id", c.site_id},
            {"months", c.months},
            {"first_period", period_label(c.first_period, Granularity::Month)},
            {"users",
             {{"kind", std::string(synth::to_string(c.users.kind))},
              {"start", c.users.start},
              {"end", c.users.end},
              {"midpoint", c.users.midpoint},
              {"rate", c.users.rate}}},
            {"roles", {{"askers", c.roles.askers}, {"answerers", c.roles.answerers}, {"commenters", c.roles.commenters}}},
            {"modulation", c.modulation},
            {"modulation_period", c.modulation_period},
            {"question", to_json(c.question)},
            {"answer", to_json(c.answer)},
            {"comment", to_json(c.comment)},
            {"noise", c.noise},
            {"seed", c.seed}};
}

synth::SynthConfig synth_config_from_json(const json& j) {
    try {
        synth::SynthConfig c;
        c.site_id = j.value("site_id", c.site_id);
        c.months = j.value("months", c.months);
        if (j.contains("first_period")) {
            const auto p = parse_period_label(j["first_period"].get<std::string>());
            if (!p || p->second != Granularity::Month) throw Error("malformed-config", "first_period must be YYYY-MM");
            c.first_period = p->first;
        }
        if (j.contains("users")) {
            const auto& u = j["users"];
            const auto kind = synth::parse_trajectory(u.value("kind", "constant"));
            if (!kind) throw Error("malformed-config", "unknown user trajectory");
            c.users = {*kind, u.value("start", 100.0), u.value("end", u.value("start", 100.0)),
                       u.value("midpoint", 0.0), u.value("rate", 0.3)};
        }
        if (j.contains("roles")) {
            const auto& r = j["roles"];
            c.roles = {r.value("askers", c.roles.askers), r.value("answerers", c.roles.answerers),
                       r.value("commenters", c.roles.commenters)};
        }
        c.modulation = j.value("modulation", c.modulation);
        c.modulation_period = j.value("modulation_period", c.modulation_period);
        c.question = spec_from_json(j.at("question"));
        c.answer = spec_from_json(j.at("answer"));
        c.comment = spec_from_json(j.at("comment"));
        c.noise = j.value("noise", c.noise);
        c.seed = j.value("seed", c.seed);
        return c;
    } catch (const json::exception& e) {
        throw Error("malformed-config", std::string("synth config JSON: ") + e.what());
    }
}

// ---- manifest -----------------------------------------------------------

std::string config_hash(const json& config) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : config.dump()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json decision_ledger(double ramp_threshold) {
    return {{"content_attribution", "creation period"},
            {"ramp_threshold", ramp_threshold},
            {"ramp_rule", "first month whose question+answer total reaches the threshold"},
            {"users", "distinct union of askers, answerers and commenters per period"},
            {"non_participants", "community user -1 and ownerless posts count as content only"},
            {"substitutable_weights", "fixed at 1"},
            {"comment_model", "two sub-models with independent U_c exponents, fit jointly on N_c"},
            {"exponent_upper_bound", 1.5},
            {"exponential_base_bounds", {1e-12, 2.0}},
            {"min_max_tie_gradient", "first argument"},
            {"aic_log_floor", kAicLogFloor},
            {"multistart", "16 rotated Halton starts, best SSE"},
            {"significance_alpha", 0.01},
            {"forecast_test_inputs", "observed factors"},
            {"forecast_variance", "population"},
            {"power_law_xmin", 1},
            {"power_law_min_size", kPowerLawMinSize},
            {"exchangeability_smoothing", "(answers+1)/(questions+1) when questions = 0"},
            {"exchangeability_distance", "euclidean"},
            {"exchangeability_min_contributors", kExchangeabilityMinUsers},
            {"health_attribution", "question creation period, answers and acceptances as of dump time"},
            {"tenure", "distinct active periods, five equal-width bins"},
            {"strength_classes", "r^2 of alpha on participants: strong >= 0.5, moderate >= 0.3"}};
}

std::string timestamp_now() {
    std::int64_t t;
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env && *env) {
        t = parse_int(env, "bad-environment");
    } else {
        t = std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
                .count();
    }
    auto s = iso_utc(t);
    return s.substr(0, 19) + "Z";
}

json manifest(const std::string& command, const std::vector<std::string>& inputs, const json& config,
              std::uint64_t seed, double ramp_threshold) {
    return {{"schema_version", kSchemaVersion},
            {"tool", "kmarket"},
            {"version", KMARKET_VERSION},
            {"command", command},
            {"inputs", inputs},
            {"config", config},
            {"config_hash", config_hash(config)},
            {"seed", seed},
            {"created", timestamp_now()},
            {"decisions", decision_ledger(ramp_threshold)}};
}

}  // namespace kmarket::io
