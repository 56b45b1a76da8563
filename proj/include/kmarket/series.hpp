#pragma once

#include "kmarket/calendar.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace kmarket {

/// Participant and content counts for one period. Counts are real-valued so
/// that synthetic series can carry unrounded model output.
struct PeriodCounts {
    double users = 0;       // U: |askers ∪ answerers ∪ commenters|
    double askers = 0;      // U_q
    double answerers = 0;   // U_a
    double commenters = 0;  // U_c
    double questions = 0;   // N_q
    double answers = 0;     // N_a
    double question_comments = 0;  // N_c^q
    double answer_comments = 0;    // N_c^a
    double comments = 0;           // N_c = N_c^q + N_c^a

    bool operator==(const PeriodCounts&) const = default;
};

/// Questions created in one period and how many of them were answered or
/// accepted, either ever (as of dump time) or by an answer created in the same period.
struct QuestionCohort {
    std::int64_t asked = 0;
    std::int64_t answered = 0;
    std::int64_t accepted = 0;
    std::int64_t answered_same_period = 0;
    std::int64_t accepted_same_period = 0;

    bool operator==(const QuestionCohort&) const = default;
};

enum class SeriesField {
    Users, Askers, Answerers, Commenters, Questions, Answers, QuestionComments, AnswerComments, Comments
};

/// Consecutive per-period market counts for one site. Periods are gap-free:
/// row i belongs to period ordinal `first_period + i`.
struct MarketSeries {
    std::string site_id;
    Granularity granularity = Granularity::Month;
    std::int64_t first_period = 0;
    std::vector<PeriodCounts> rows;
    /// Empty, or one entry per row.
    std::vector<QuestionCohort> cohorts;

    std::size_t size() const noexcept { return rows.size(); }
    std::int64_t period(std::size_t i) const noexcept { return first_period + static_cast<std::int64_t>(i); }
    std::string label(std::size_t i) const { return period_label(period(i), granularity); }

    std::vector<double> column(SeriesField field) const;

    /// Rows [begin, begin+count).
    MarketSeries slice(std::size_t begin, std::size_t count) const;

    bool operator==(const MarketSeries&) const = default;
};

double value_of(const PeriodCounts& row, SeriesField field);

/// Checks gap-free cohorts length, non-negative counts and N_c = N_c^q + N_c^a.
/// Throws kmarket::Error("malformed-series") on violation.
void validate(const MarketSeries& series);

/// Sums monthly rows into calendar quarters. Content counts add exactly;
/// participant counts become participant-months since distinct users cannot
/// be recovered from monthly totals. Partial quarters at either end are dropped.
MarketSeries coarsen_to_quarters(const MarketSeries& monthly);

/// Per-user activity in one period; only periods with some activity are stored.
struct UserPeriodActivity {
    std::int64_t user_id = 0;
    std::int64_t period = 0;
    std::int64_t questions = 0;
    std::int64_t answers = 0;
    std::int64_t comments = 0;

    bool operator==(const UserPeriodActivity&) const = default;
};

}  // namespace kmarket
