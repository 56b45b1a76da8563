#include "kmarket/series.hpp"

#include "kmarket/error.hpp"

#include <cmath>

namespace kmarket {

double value_of(const PeriodCounts& row, SeriesField field) {
    switch (field) {
        case SeriesField::Users: return row.users;
        case SeriesField::Askers: return row.askers;
        case SeriesField::Answerers: return row.answerers;
        case SeriesField::Commenters: return row.commenters;
        case SeriesField::Questions: return row.questions;
        case SeriesField::Answers: return row.answers;
        case SeriesField::QuestionComments: return row.question_comments;
        case SeriesField::AnswerComments: return row.answer_comments;
        case SeriesField::Comments: return row.comments;
    }
    return 0;
}

std::vector<double> MarketSeries::column(SeriesField field) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(value_of(r, field));
    return out;
}

MarketSeries MarketSeries::slice(std::size_t begin, std::size_t count) const {
    require(begin + count <= rows.size(), "slice out of range");
    MarketSeries out;
    out.site_id = site_id;
    out.granularity = granularity;
    out.first_period = period(begin);
    out.rows.assign(rows.begin() + static_cast<std::ptrdiff_t>(begin),
                    rows.begin() + static_cast<std::ptrdiff_t>(begin + count));
    if (!cohorts.empty())
        out.cohorts.assign(cohorts.begin() + static_cast<std::ptrdiff_t>(begin),
                           cohorts.begin() + static_cast<std::ptrdiff_t>(begin + count));
    return out;
}

void validate(const MarketSeries& series) {
    if (!series.cohorts.empty() && series.cohorts.size() != series.rows.size())
        throw Error("malformed-series", "cohort count does not match row count");
    for (std::size_t i = 0; i < series.rows.size(); ++i) {
        const auto& r = series.rows[i];
        for (double v : {r.users, r.askers, r.answerers, r.commenters, r.questions, r.answers, r.question_comments,
                         r.answer_comments, r.comments}) {
            if (!std::isfinite(v) || v < 0)
                throw Error("malformed-series", "negative or non-finite count in period " + series.label(i));
        }
        const double sum = r.question_comments + r.answer_comments;
        if (std::abs(r.comments - sum) > 1e-9 * std::max(1.0, sum))
            throw Error("malformed-series", "N_c != N_cq + N_ca in period " + series.label(i));
    }
}

MarketSeries coarsen_to_quarters(const MarketSeries& monthly) {
    require(monthly.granularity == Granularity::Month, "coarsen_to_quarters expects a monthly series");
    MarketSeries out;
    out.site_id = monthly.site_id;
    out.granularity = Granularity::Quarter;

    std::size_t i = 0;
    while (i < monthly.size() && (monthly.period(i) % 12 + 12) % 3 != 0) ++i;
    if (i < monthly.size()) out.first_period = period_of(period_start(monthly.period(i), Granularity::Month),
                                                         Granularity::Quarter);
    const bool with_cohorts = !monthly.cohorts.empty();
    for (; i + 3 <= monthly.size(); i += 3) {
        PeriodCounts q;
        QuestionCohort c;
        for (std::size_t j = i; j < i + 3; ++j) {
            const auto& m = monthly.rows[j];
            q.users += m.users;
            q.askers += m.askers;
            q.answerers += m.answerers;
            q.commenters += m.commenters;
            q.questions += m.questions;
            q.answers += m.answers;
            q.question_comments += m.question_comments;
            q.answer_comments += m.answer_comments;
            q.comments += m.comments;
            if (with_cohorts) {
                const auto& mc = monthly.cohorts[j];
                c.asked += mc.asked;
                c.answered += mc.answered;
                c.accepted += mc.accepted;
                // same-month answers are same-quarter answers; cross-month ones within the quarter are not tracked
                c.answered_same_period += mc.answered_same_period;
                c.accepted_same_period += mc.accepted_same_period;
            }
        }
        out.rows.push_back(q);
        if (with_cohorts) out.cohorts.push_back(c);
    }
    return out;
}

}  // namespace kmarket
