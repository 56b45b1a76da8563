#pragma once

#include "kmarket/calendar.hpp"
#include "kmarket/series.hpp"

#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kmarket {

enum class PostType { Question, Answer };

struct RawPost {
    std::int64_t id = 0;
    PostType type = PostType::Question;
    UtcSeconds created = 0;
    std::optional<std::int64_t> owner;
    std::optional<std::int64_t> parent;           // answers only
    std::optional<std::int64_t> accepted_answer;  // questions only

    bool operator==(const RawPost&) const = default;
};

struct RawComment {
    std::int64_t id = 0;
    std::int64_t post_id = 0;
    UtcSeconds created = 0;
    std::optional<std::int64_t> owner;

    bool operator==(const RawComment&) const = default;
};

struct IngestStats {
    std::int64_t post_rows = 0;
    std::int64_t comment_rows = 0;
    std::int64_t skipped_post_types = 0;  // PostTypeId not in {1, 2}
    std::int64_t malformed_posts = 0;
    std::int64_t malformed_comments = 0;
    std::int64_t dangling_comments = 0;   // PostId not among parsed posts
    std::int64_t ownerless_posts = 0;     // no OwnerUserId, or the community user
    std::int64_t ownerless_comments = 0;
};

struct ParsedDump {
    std::vector<RawPost> posts;
    std::vector<RawComment> comments;
    IngestStats stats;
};

/// The StackExchange community user (Id -1) owns wiki-like content; it is not a participant.
inline constexpr std::int64_t kCommunityUserId = -1;

/// True when the owner counts as a market participant.
inline bool is_participant(const std::optional<std::int64_t>& owner) {
    return owner.has_value() && *owner != kCommunityUserId;
}

/// Streams Posts.xml and Comments.xml archive documents. Comments whose PostId
/// does not reference a parsed post are dropped and counted.
/// Throws Error("xml-error") naming the byte offset for non-XML content.
ParsedDump parse_dump(std::istream& posts, std::istream& comments);

ParsedDump parse_dump_files(const std::string& posts_path, const std::string& comments_path);

/// Buckets events by UTC period of creation. Ramp-up months (before the first
/// month whose question+answer total reaches `ramp_threshold`) are trimmed; the
/// ramp cut is always computed on calendar months and then mapped to `granularity`.
/// Throws Error("no-events") or Error("never-ramped-up").
MarketSeries aggregate(std::span<const RawPost> posts, std::span<const RawComment> comments,
                       double ramp_threshold, Granularity granularity = Granularity::Month,
                       std::string site_id = {});

inline MarketSeries aggregate_monthly(std::span<const RawPost> posts, std::span<const RawComment> comments,
                                      double ramp_threshold, std::string site_id = {}) {
    return aggregate(posts, comments, ramp_threshold, Granularity::Month, std::move(site_id));
}

/// Per-question answered/accepted bookkeeping grouped by question creation period.
/// Returns one cohort per period in [first_period, first_period + count).
std::vector<QuestionCohort> question_cohorts(std::span<const RawPost> posts, Granularity granularity,
                                             std::int64_t first_period, std::size_t count);

/// One record per (participant, period) with nonzero activity, sorted by
/// (period, user). Ownerless events are excluded; `excluded`, when given,
/// receives how many were skipped.
std::vector<UserPeriodActivity> user_period_activity(std::span<const RawPost> posts,
                                                     std::span<const RawComment> comments,
                                                     Granularity granularity = Granularity::Month,
                                                     std::int64_t* excluded = nullptr);

}  // namespace kmarket
