#include "kmarket/analysis.hpp"

#include "kmarket/error.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace kmarket {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

stats::LinearFit role_fit(const std::vector<double>& u, const std::vector<double>& role) {
    auto f = stats::ols(u, role);
    if (!std::isfinite(f.slope)) f.r_squared = f.r = kNaN;
    return f;
}

std::int64_t activity_of(const UserPeriodActivity& r, ActivityKind kind) {
    switch (kind) {
        case ActivityKind::Total: return r.questions + r.answers + r.comments;
        case ActivityKind::Questions: return r.questions;
        case ActivityKind::Answers: return r.answers;
        case ActivityKind::Comments: return r.comments;
    }
    return 0;
}

struct Ranked {
    double score;
    std::int64_t user;
    double answers;
    double questions;
};

}  // namespace

RoleRegressionReport regress_roles(const MarketSeries& series) {
    if (series.size() < 3) throw Error("series-too-short", "role regression needs at least 3 periods");
    const auto u = series.column(SeriesField::Users);
    RoleRegressionReport r;
    r.periods = series.size();
    r.askers = role_fit(u, series.column(SeriesField::Askers));
    r.answerers = role_fit(u, series.column(SeriesField::Answerers));
    r.commenters = role_fit(u, series.column(SeriesField::Commenters));
    return r;
}

double log_hurwitz_zeta(double alpha, std::int64_t xmin) {
    require(alpha > 1, "zeta needs alpha > 1");
    require(xmin >= 1, "xmin must be at least 1");
    // Euler-Maclaurin: direct sum over the first terms, integral tail and
    // three Bernoulli corrections.
    constexpr int kDirect = 16;
    const double q = static_cast<double>(xmin);
    double sum = 0;
    for (int k = 0; k < kDirect; ++k) sum += std::pow(q + k, -alpha);
    const double n = q + kDirect;
    sum += std::pow(n, 1 - alpha) / (alpha - 1) + 0.5 * std::pow(n, -alpha);
    double rising = alpha;  // alpha (alpha+1) ... (alpha+2j-2)
    double power = std::pow(n, -alpha - 1);
    constexpr double kBernoulli[] = {1.0 / 6, -1.0 / 30, 1.0 / 42};
    double factorial = 2;
    for (int j = 1; j <= 3; ++j) {
        sum += kBernoulli[j - 1] / factorial * rising * power;
        rising *= (alpha + 2 * j - 1) * (alpha + 2 * j);
        power /= n * n;
        factorial *= (2 * j + 1) * (2 * j + 2);
    }
    return std::log(sum);
}

PowerLawFit fit_power_law(std::span<const std::int64_t> counts, std::int64_t xmin, std::size_t min_size) {
    require(xmin >= 1, "xmin must be at least 1");
    PowerLawFit out;
    out.xmin = xmin;
    std::vector<std::int64_t> kept;
    for (auto c : counts)
        if (c >= xmin) kept.push_back(c);
    std::ranges::sort(kept);  // summation order independent of input order
    out.n = kept.size();
    double sum_log = 0;
    for (auto c : kept) sum_log += std::log(static_cast<double>(c));
    if (out.n < min_size || out.n == 0) {
        out.skipped = true;
        return out;
    }
    const double n = static_cast<double>(out.n);
    auto neg_ll = [&](double a) { return n * log_hurwitz_zeta(a, xmin) + a * sum_log; };
    constexpr double lo = 1.0 + 1e-9;
    const auto [a, f] = boost::math::tools::brent_find_minima(neg_ll, lo, kPowerLawAlphaMax, 50);
    out.alpha = a;
    out.log_likelihood = -f;
    if (kPowerLawAlphaMax - a < 1e-6) {
        out.alpha = kPowerLawAlphaMax;
        out.log_likelihood = -neg_ll(kPowerLawAlphaMax);
        out.degenerate = true;
    }
    return out;
}

std::string_view to_string(ActivityKind k) {
    switch (k) {
        case ActivityKind::Total: return "total";
        case ActivityKind::Questions: return "questions";
        case ActivityKind::Answers: return "answers";
        case ActivityKind::Comments: return "comments";
    }
    return "?";
}

std::optional<ActivityKind> parse_activity_kind(std::string_view text) {
    for (auto k : {ActivityKind::Total, ActivityKind::Questions, ActivityKind::Answers, ActivityKind::Comments})
        if (to_string(k) == text) return k;
    return std::nullopt;
}

std::vector<std::int64_t> activity_counts(std::span<const UserPeriodActivity> records, std::int64_t period,
                                          ActivityKind kind) {
    std::vector<std::int64_t> out;
    for (const auto& r : records)
        if (r.period == period)
            if (const auto v = activity_of(r, kind); v > 0) out.push_back(v);
    return out;
}

std::string_view to_string(CorrelationStrength s) {
    switch (s) {
        case CorrelationStrength::Strong: return "strong";
        case CorrelationStrength::Moderate: return "moderate";
        case CorrelationStrength::Weak: return "weak";
    }
    return "?";
}

CorrelationStrength classify_strength(double r_squared) {
    if (r_squared >= 0.5) return CorrelationStrength::Strong;
    if (r_squared >= 0.3) return CorrelationStrength::Moderate;
    return CorrelationStrength::Weak;
}

SizeDependenceReport size_dependence(std::vector<PowerLawFit> fits) {
    SizeDependenceReport report;
    std::vector<double> n, alpha;
    for (const auto& f : fits)
        if (!f.skipped && !f.degenerate && std::isfinite(f.alpha)) {
            n.push_back(static_cast<double>(f.n));
            alpha.push_back(f.alpha);
        }
    report.months = std::move(fits);
    report.valid_months = n.size();
    if (n.size() < kSizeDependenceMinMonths)
        throw Error("too-few-months", "size dependence needs " + std::to_string(kSizeDependenceMinMonths) +
                                          " months with a power-law fit, got " + std::to_string(n.size()));
    report.regression = stats::ols(n, alpha);
    report.strength = classify_strength(report.regression.r_squared);
    report.big = std::ranges::all_of(n, [](double v) { return v >= kBigMarketParticipants; });
    return report;
}

SizeDependenceReport size_dependence(std::span<const UserPeriodActivity> records, ActivityKind kind,
                                     std::size_t min_size) {
    std::map<std::int64_t, std::vector<std::int64_t>> by_period;
    for (const auto& r : records)
        if (const auto v = activity_of(r, kind); v > 0) by_period[r.period].push_back(v);
    std::vector<PowerLawFit> fits;
    for (const auto& [period, counts] : by_period) {
        auto f = fit_power_law(counts, 1, min_size);
        f.period = period;
        fits.push_back(f);
    }
    return size_dependence(std::move(fits));
}

TenureBinReport tenure_analysis(std::span<const UserPeriodActivity> records) {
    std::map<std::int64_t, std::pair<std::set<std::int64_t>, double>> users;  // periods, answers
    for (const auto& r : records) {
        if (r.questions + r.answers + r.comments <= 0) continue;
        auto& u = users[r.user_id];
        u.first.insert(r.period);
        u.second += static_cast<double>(r.answers);
    }
    TenureBinReport report;
    report.users = users.size();
    report.bins.resize(kTenureBins);
    if (users.empty()) return report;

    std::int64_t tmin = std::numeric_limits<std::int64_t>::max(), tmax = 0;
    for (const auto& [id, u] : users) {
        const auto t = static_cast<std::int64_t>(u.first.size());
        tmin = std::min(tmin, t);
        tmax = std::max(tmax, t);
    }
    const double width = static_cast<double>(tmax - tmin) / kTenureBins;
    for (int b = 0; b < kTenureBins; ++b) {
        report.bins[b].lo = static_cast<double>(tmin) + b * width;
        report.bins[b].hi = static_cast<double>(tmin) + (b + 1) * width;
    }
    std::vector<std::vector<double>> contributions(kTenureBins);
    for (const auto& [id, u] : users) {
        const auto t = static_cast<std::int64_t>(u.first.size());
        const auto b = tmax == tmin ? 0 : std::min<std::int64_t>(kTenureBins - 1, (t - tmin) * kTenureBins / (tmax - tmin));
        report.bins[b].users.push_back(id);
        contributions[b].push_back(u.second / static_cast<double>(t));
    }
    for (int b = 0; b < kTenureBins; ++b) {
        const auto& c = contributions[b];
        if (c.empty()) continue;
        report.bins[b].quartiles = std::array{stats::quantile(c, 0.25), stats::quantile(c, 0.5), stats::quantile(c, 0.75)};
        report.bins[b].letter_values = stats::letter_values(c);
    }
    return report;
}

HealthSeries health_series(const MarketSeries& series) {
    if (series.cohorts.size() != series.size())
        throw Error("missing-cohorts", "health metrics need per-question bookkeeping from ingest");
    HealthSeries out;
    out.site_id = series.site_id;
    out.granularity = series.granularity;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& row = series.rows[i];
        const auto& c = series.cohorts[i];
        HealthRow h;
        h.period = series.period(i);
        h.users = row.users;
        h.answers_per_question = row.questions > 0 ? row.answers / row.questions : kNaN;
        if (c.asked > 0) {
            const double asked = static_cast<double>(c.asked);
            h.h1 = static_cast<double>(c.answered) / asked;
            h.h2 = static_cast<double>(c.accepted) / asked;
            h.h1_same_period = static_cast<double>(c.answered_same_period) / asked;
            h.h2_same_period = static_cast<double>(c.accepted_same_period) / asked;
        } else {
            h.h1 = h.h2 = h.h1_same_period = h.h2_same_period = kNaN;
        }
        out.rows.push_back(h);
    }
    return out;
}

ExchangeabilityResult exchangeability(std::span<const UserPeriodActivity> records, std::int64_t period,
                                      bool smoothed) {
    ExchangeabilityResult out;
    out.period = period;
    std::vector<Ranked> users;
    for (const auto& r : records) {
        if (r.period != period || r.questions + r.answers + r.comments <= 0) continue;
        const auto a = static_cast<double>(r.answers), q = static_cast<double>(r.questions);
        if (q > 0) users.push_back({a / q, r.user_id, a, q});
        else if (smoothed) users.push_back({(a + 1) / (q + 1), r.user_id, a, q});
    }
    out.contributors = users.size();
    if (users.size() < kExchangeabilityMinUsers) {
        out.skipped = true;
        return out;
    }
    std::ranges::sort(users, [](const Ranked& x, const Ranked& y) {
        return x.score != y.score ? x.score > y.score : x.user < y.user;
    });
    const auto n = users.size();
    const auto m = static_cast<std::size_t>(std::floor(kExchangeabilitySlice * static_cast<double>(n)));
    out.slice = m;
    struct Summary {
        double score = 0, answers = 0, questions = 0;
    };
    auto summarize = [&](std::size_t begin) {
        Summary s;
        for (std::size_t i = begin; i < begin + m; ++i) {
            s.score += users[i].score;
            s.answers += users[i].answers;
            s.questions += users[i].questions;
        }
        const double d = static_cast<double>(m);
        return Summary{s.score / d, s.answers / d, s.questions / d};
    };
    const auto top = summarize(0);
    const auto median = summarize((n - m) / 2);
    const auto bottom = summarize(n - m);
    out.top_score = top.score;
    out.median_score = median.score;
    out.bottom_score = bottom.score;
    out.e1 = bottom.score > 0 ? top.score / bottom.score : kNaN;
    out.e2 = std::hypot(top.answers - median.answers, top.questions - median.questions) +
             std::hypot(median.answers - bottom.answers, median.questions - bottom.questions);
    return out;
}

DiseconomiesCurve diseconomies_curve(const ModelSpec& question_model, const ModelSpec& answer_model,
                                     double askers_per_user, double answerers_per_user,
                                     std::span<const double> users) {
    if (question_model.content != ContentType::Question)
        throw ContractViolation("first model must be a question model");
    if (answer_model.content != ContentType::Answer || answer_model.interaction != InteractionKind::InteractiveEssential)
        throw Error("not-cobb-douglas", "diseconomies need a power interactive-essential answer model (got " +
                                            family_name(answer_model) + ")");
    const auto q = cobb_douglas_summary(question_model);
    const auto a = cobb_douglas_summary(answer_model);
    if (!(askers_per_user > 0) || !(answerers_per_user > 0))
        throw ContractViolation("role slopes must be positive");
    if (!(q.total_factor_productivity > 0)) throw ContractViolation("question productivity must be positive");

    const double nu = q.elasticities[0];
    const double lambda = a.elasticities[0], mu = a.elasticities[1];
    DiseconomiesCurve curve;
    curve.elasticity = lambda + mu - nu;
    curve.composed_elasticity = nu * lambda + mu - nu;
    curve.percent_per_percent = 100.0 * (std::pow(1.01, curve.elasticity) - 1.0);
    curve.diseconomies = curve.elasticity < 0;
    curve.constant = a.total_factor_productivity * std::pow(askers_per_user, lambda) *
                     std::pow(answerers_per_user, mu) /
                     (q.total_factor_productivity * std::pow(askers_per_user, nu));
    for (double u : users) {
        require(u >= 0, "user counts must be non-negative");
        const double uq = askers_per_user * u, ua = answerers_per_user * u;
        const double ratio = a.total_factor_productivity * std::pow(uq, lambda) * std::pow(ua, mu) /
                             (q.total_factor_productivity * std::pow(uq, nu));
        curve.points.push_back({u, ratio});
    }
    return curve;
}

}  // namespace kmarket
