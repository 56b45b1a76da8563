#include "kmarket/ingest.hpp"

#include "kmarket/error.hpp"

#include <expat.h>

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

namespace kmarket {
namespace {

std::optional<std::int64_t> parse_id(const char* text) {
    if (text == nullptr || *text == '\0') return std::nullopt;
    std::int64_t v = 0;
    const char* end = text + std::strlen(text);
    auto [ptr, ec] = std::from_chars(text, end, v);
    if (ec != std::errc{} || ptr != end) return std::nullopt;
    return v;
}

struct RowAttributes {
    const char* id = nullptr;
    const char* post_type = nullptr;
    const char* created = nullptr;
    const char* owner = nullptr;
    const char* parent = nullptr;
    const char* accepted = nullptr;
    const char* post_id = nullptr;
};

RowAttributes collect(const XML_Char** attrs) {
    RowAttributes row;
    for (int i = 0; attrs[i] != nullptr; i += 2) {
        const std::string_view name = attrs[i];
        const char* value = attrs[i + 1];
        if (name == "Id") row.id = value;
        else if (name == "PostTypeId") row.post_type = value;
        else if (name == "CreationDate") row.created = value;
        else if (name == "OwnerUserId") row.owner = value;
        else if (name == "UserId" && row.owner == nullptr) row.owner = value;  // archive comments
        else if (name == "ParentId") row.parent = value;
        else if (name == "AcceptedAnswerId") row.accepted = value;
        else if (name == "PostId") row.post_id = value;
    }
    return row;
}

// Optional integer attribute: absent is fine, present-but-garbage is malformed.
bool optional_id(const char* text, std::optional<std::int64_t>& out) {
    if (text == nullptr || *text == '\0') return true;
    out = parse_id(text);
    return out.has_value();
}

struct PostSink {
    std::vector<RawPost>* posts;
    IngestStats* stats;

    void on_row(const XML_Char** attrs) {
        ++stats->post_rows;
        const auto row = collect(attrs);
        const auto type = parse_id(row.post_type);
        if (type && *type != 1 && *type != 2) {
            ++stats->skipped_post_types;
            return;
        }
        RawPost p;
        const auto id = parse_id(row.id);
        const auto created = row.created ? parse_timestamp(row.created) : std::nullopt;
        if (!type || !id || !created || !optional_id(row.owner, p.owner)) {
            ++stats->malformed_posts;
            return;
        }
        p.id = *id;
        p.created = *created;
        if (*type == 1) {
            p.type = PostType::Question;
            if (!optional_id(row.accepted, p.accepted_answer)) {
                ++stats->malformed_posts;
                return;
            }
        } else {
            p.type = PostType::Answer;
            if (!optional_id(row.parent, p.parent) || !p.parent) {
                ++stats->malformed_posts;
                return;
            }
        }
        if (!is_participant(p.owner)) ++stats->ownerless_posts;
        posts->push_back(p);
    }
};

struct CommentSink {
    std::vector<RawComment>* comments;
    IngestStats* stats;

    void on_row(const XML_Char** attrs) {
        ++stats->comment_rows;
        const auto row = collect(attrs);
        RawComment c;
        const auto id = parse_id(row.id);
        const auto post = parse_id(row.post_id);
        const auto created = row.created ? parse_timestamp(row.created) : std::nullopt;
        if (!id || !post || !created || !optional_id(row.owner, c.owner)) {
            ++stats->malformed_comments;
            return;
        }
        c.id = *id;
        c.post_id = *post;
        c.created = *created;
        comments->push_back(c);
    }
};

template <typename Sink>
void on_start(void* user, const XML_Char* name, const XML_Char** attrs) {
    if (std::strcmp(name, "row") == 0) static_cast<Sink*>(user)->on_row(attrs);
}

template <typename Sink>
void stream_rows(std::istream& in, Sink& sink, const char* what) {
    std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> parser(
        XML_ParserCreate("UTF-8"), &XML_ParserFree);
    if (!parser) throw Error("internal", "cannot allocate XML parser");
    XML_SetUserData(parser.get(), &sink);
    XML_SetStartElementHandler(parser.get(), &on_start<Sink>);

    auto fail = [&](const std::string& reason) {
        throw Error("xml-error", std::string(what) + ": " + reason + " at byte offset " +
                                     std::to_string(XML_GetCurrentByteIndex(parser.get())));
    };
    if (!in) throw Error("input-unreadable", std::string(what) + ": stream is not readable");

    std::vector<char> buffer(1 << 16);
    bool any = false;
    while (true) {
        in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
        const auto got = in.gcount();
        if (in.bad()) throw Error("input-unreadable", std::string(what) + ": read failure");
        const bool last = got < static_cast<std::streamsize>(buffer.size());
        any = any || got > 0;
        if (XML_Parse(parser.get(), buffer.data(), static_cast<int>(got), last ? XML_TRUE : XML_FALSE) ==
            XML_STATUS_ERROR)
            fail(XML_ErrorString(XML_GetErrorCode(parser.get())));
        if (last) break;
    }
    if (!any) throw Error("xml-error", std::string(what) + ": empty document at byte offset 0");
}

}  // namespace

ParsedDump parse_dump(std::istream& posts_in, std::istream& comments_in) {
    ParsedDump dump;
    PostSink post_sink{&dump.posts, &dump.stats};
    stream_rows(posts_in, post_sink, "posts");
    std::vector<RawComment> all_comments;
    CommentSink comment_sink{&all_comments, &dump.stats};
    stream_rows(comments_in, comment_sink, "comments");

    std::unordered_set<std::int64_t> post_ids;
    post_ids.reserve(dump.posts.size());
    for (const auto& p : dump.posts) post_ids.insert(p.id);
    dump.comments.reserve(all_comments.size());
    for (const auto& c : all_comments) {
        if (!post_ids.contains(c.post_id)) {
            ++dump.stats.dangling_comments;
            continue;
        }
        if (!is_participant(c.owner)) ++dump.stats.ownerless_comments;
        dump.comments.push_back(c);
    }
    return dump;
}

ParsedDump parse_dump_files(const std::string& posts_path, const std::string& comments_path) {
    std::ifstream posts(posts_path, std::ios::binary);
    if (!posts) throw Error("input-not-found", "cannot open " + posts_path);
    std::ifstream comments(comments_path, std::ios::binary);
    if (!comments) throw Error("input-not-found", "cannot open " + comments_path);
    return parse_dump(posts, comments);
}

MarketSeries aggregate(std::span<const RawPost> posts, std::span<const RawComment> comments, double ramp_threshold,
                       Granularity granularity, std::string site_id) {
    require(ramp_threshold >= 0, "ramp_threshold must be non-negative");
    if (posts.empty() && comments.empty()) throw Error("no-events", "no events");

    // Ramp-up is judged on calendar months of question+answer volume.
    std::map<std::int64_t, std::int64_t> monthly_posts;
    std::int64_t last_event = std::numeric_limits<std::int64_t>::min();
    for (const auto& p : posts) {
        ++monthly_posts[period_of(p.created, Granularity::Month)];
        last_event = std::max(last_event, p.created);
    }
    for (const auto& c : comments) last_event = std::max(last_event, c.created);

    std::optional<std::int64_t> ramp_month;
    for (const auto& [month, count] : monthly_posts) {
        if (static_cast<double>(count) >= ramp_threshold) {
            ramp_month = month;
            break;
        }
    }
    if (!ramp_month) throw Error("never-ramped-up", "site never ramped up");

    const UtcSeconds cut = period_start(*ramp_month, Granularity::Month);
    const std::int64_t first = period_of(cut, granularity);
    const std::int64_t last = period_of(last_event, granularity);
    const auto n = static_cast<std::size_t>(last - first + 1);

    struct Roles {
        std::set<std::int64_t> askers, answerers, commenters, all;
    };
    MarketSeries series;
    series.site_id = std::move(site_id);
    series.granularity = granularity;
    series.first_period = first;
    series.rows.assign(n, PeriodCounts{});
    std::vector<Roles> roles(n);

    std::unordered_map<std::int64_t, PostType> type_of;
    type_of.reserve(posts.size());
    for (const auto& p : posts) type_of.emplace(p.id, p.type);

    auto slot = [&](UtcSeconds t) -> std::optional<std::size_t> {
        if (t < cut) return std::nullopt;
        return static_cast<std::size_t>(period_of(t, granularity) - first);
    };

    for (const auto& p : posts) {
        const auto i = slot(p.created);
        if (!i) continue;
        auto& row = series.rows[*i];
        if (p.type == PostType::Question) {
            row.questions += 1;
            if (is_participant(p.owner)) roles[*i].askers.insert(*p.owner);
        } else {
            row.answers += 1;
            if (is_participant(p.owner)) roles[*i].answerers.insert(*p.owner);
        }
        if (is_participant(p.owner)) roles[*i].all.insert(*p.owner);
    }
    for (const auto& c : comments) {
        const auto i = slot(c.created);
        if (!i) continue;
        const auto it = type_of.find(c.post_id);
        if (it == type_of.end()) continue;
        auto& row = series.rows[*i];
        if (it->second == PostType::Question) row.question_comments += 1;
        else row.answer_comments += 1;
        if (is_participant(c.owner)) {
            roles[*i].commenters.insert(*c.owner);
            roles[*i].all.insert(*c.owner);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        auto& row = series.rows[i];
        row.comments = row.question_comments + row.answer_comments;
        row.askers = static_cast<double>(roles[i].askers.size());
        row.answerers = static_cast<double>(roles[i].answerers.size());
        row.commenters = static_cast<double>(roles[i].commenters.size());
        row.users = static_cast<double>(roles[i].all.size());
    }
    series.cohorts = question_cohorts(posts, granularity, first, n);
    return series;
}

std::vector<QuestionCohort> question_cohorts(std::span<const RawPost> posts, Granularity granularity,
                                             std::int64_t first_period, std::size_t count) {
    struct AnswerInfo {
        std::int64_t question;
        std::int64_t period;
    };
    std::unordered_map<std::int64_t, AnswerInfo> answers;  // answer id -> info
    std::unordered_map<std::int64_t, std::vector<std::int64_t>> answer_periods;
    for (const auto& p : posts) {
        if (p.type != PostType::Answer) continue;
        const auto period = period_of(p.created, granularity);
        answers.emplace(p.id, AnswerInfo{*p.parent, period});
        answer_periods[*p.parent].push_back(period);
    }

    std::vector<QuestionCohort> cohorts(count);
    for (const auto& q : posts) {
        if (q.type != PostType::Question) continue;
        const auto period = period_of(q.created, granularity);
        if (period < first_period || period >= first_period + static_cast<std::int64_t>(count)) continue;
        auto& c = cohorts[static_cast<std::size_t>(period - first_period)];
        ++c.asked;
        const auto found = answer_periods.find(q.id);
        if (found != answer_periods.end()) {
            ++c.answered;
            if (std::ranges::find(found->second, period) != found->second.end()) ++c.answered_same_period;
        }
        // An acceptance only counts when the accepted answer exists and belongs to this question.
        if (q.accepted_answer) {
            const auto a = answers.find(*q.accepted_answer);
            if (a != answers.end() && a->second.question == q.id) {
                ++c.accepted;
                if (a->second.period == period) ++c.accepted_same_period;
            }
        }
    }
    return cohorts;
}

std::vector<UserPeriodActivity> user_period_activity(std::span<const RawPost> posts,
                                                     std::span<const RawComment> comments, Granularity granularity,
                                                     std::int64_t* excluded) {
    std::map<std::pair<std::int64_t, std::int64_t>, UserPeriodActivity> acc;  // (period, user)
    std::int64_t skipped = 0;
    auto record = [&](std::int64_t user, UtcSeconds t) -> UserPeriodActivity& {
        const auto period = period_of(t, granularity);
        auto& r = acc[{period, user}];
        r.user_id = user;
        r.period = period;
        return r;
    };
    for (const auto& p : posts) {
        if (!is_participant(p.owner)) {
            ++skipped;
            continue;
        }
        auto& r = record(*p.owner, p.created);
        if (p.type == PostType::Question) ++r.questions;
        else ++r.answers;
    }
    for (const auto& c : comments) {
        if (!is_participant(c.owner)) {
            ++skipped;
            continue;
        }
        ++record(*c.owner, c.created).comments;
    }
    if (excluded) *excluded = skipped;
    std::vector<UserPeriodActivity> out;
    out.reserve(acc.size());
    for (auto& [key, r] : acc) out.push_back(r);
    return out;
}

}  // namespace kmarket
