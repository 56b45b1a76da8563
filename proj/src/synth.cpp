#include "kmarket/synth.hpp"

#include "kmarket/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace kmarket::synth {

namespace {

constexpr double kOverflow = 1e12;
constexpr double kPopularityAlpha = 1.2;

double uniform(std::mt19937_64& rng) { return std::generate_canonical<double, 53>(rng); }

std::size_t pick(std::size_t n, std::mt19937_64& rng) {
    return std::min(n - 1, static_cast<std::size_t>(uniform(rng) * static_cast<double>(n)));
}

void check_fraction(double f, const char* what) {
    if (!(f >= 0 && f <= 1)) throw ContractViolation(what);
}

// Comment models are two answer-layout models over (N_q, U_c) and (N_a, U_c).
std::pair<ModelSpec, ModelSpec> comment_halves(const ModelSpec& comment) {
    const auto half = comment.theta.size() / 2;
    ModelSpec q{ContentType::Answer, comment.basis, comment.interaction, {}, {}};
    ModelSpec a = q;
    q.theta.assign(comment.theta.begin(), comment.theta.begin() + static_cast<std::ptrdiff_t>(half));
    a.theta.assign(comment.theta.begin() + static_cast<std::ptrdiff_t>(half), comment.theta.end());
    return {q, a};
}

double guard(double v, const char* what) {
    if (!std::isfinite(v) || v > kOverflow)
        throw Error("synth-overflow", std::string(what) + " exceeds 1e12; lower the amplitudes or user counts");
    return v;
}

}  // namespace

std::string_view to_string(TrajectoryKind k) {
    switch (k) {
        case TrajectoryKind::Constant: return "constant";
        case TrajectoryKind::Linear: return "linear";
        case TrajectoryKind::Logistic: return "logistic";
    }
    return "?";
}

std::optional<TrajectoryKind> parse_trajectory(std::string_view text) {
    for (auto k : {TrajectoryKind::Constant, TrajectoryKind::Linear, TrajectoryKind::Logistic})
        if (to_string(k) == text) return k;
    return std::nullopt;
}

double Trajectory::operator()(std::size_t t, std::size_t periods) const {
    const double x = static_cast<double>(t);
    switch (kind) {
        case TrajectoryKind::Constant: return start;
        case TrajectoryKind::Linear:
            return periods <= 1 ? start : start + (end - start) * x / static_cast<double>(periods - 1);
        case TrajectoryKind::Logistic: return start + (end - start) / (1 + std::exp(-rate * (x - midpoint)));
    }
    return start;
}

SynthResult generate(const SynthConfig& config) {
    require(config.months >= 1, "synthetic market needs at least one period");
    check_fraction(config.roles.askers, "asker fraction outside [0, 1]");
    check_fraction(config.roles.answerers, "answerer fraction outside [0, 1]");
    check_fraction(config.roles.commenters, "commenter fraction outside [0, 1]");
    require(config.modulation >= 0 && config.modulation < 1, "modulation must lie in [0, 1)");
    require(config.modulation_period > 0, "modulation period must be positive");
    require(config.noise >= 0, "noise must be non-negative");
    require(config.question.content == ContentType::Question, "question model has the wrong content type");
    require(config.answer.content == ContentType::Answer, "answer model has the wrong content type");
    require(config.comment.content == ContentType::Comment, "comment model has the wrong content type");
    check_spec(config.question);
    check_spec(config.answer);
    check_spec(config.comment);

    const auto T = config.months;
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal;
    auto noise = [&] { return config.noise > 0 ? std::exp(config.noise * normal(rng)) : 1.0; };

    MarketSeries s;
    s.site_id = config.site_id;
    s.granularity = Granularity::Month;
    s.first_period = config.first_period;
    s.rows.resize(T);
    constexpr double two_pi = 2 * std::numbers::pi;
    for (std::size_t t = 0; t < T; ++t) {
        const double u = guard(config.users(t, T), "user count");
        require(u >= 0, "user trajectory went negative");
        const double phase = two_pi * static_cast<double>(t) / config.modulation_period;
        auto role = [&](double share, double offset) {
            return std::round(share * u * (1 + config.modulation * std::sin(phase + offset)));
        };
        auto& r = s.rows[t];
        r.users = std::round(u);
        r.askers = role(config.roles.askers, 0);
        r.answerers = role(config.roles.answerers, two_pi / 3);
        r.commenters = role(config.roles.commenters, 2 * two_pi / 3);
    }

    const auto [cq, ca] = comment_halves(config.comment);
    for (std::size_t t = 0; t < T; ++t) {
        auto& r = s.rows[t];
        const std::array uq{r.askers};
        r.questions = guard(evaluate_point(config.question, uq) * noise(), "question count");
        const std::array a_in{r.questions, r.answerers};
        r.answers = guard(evaluate_point(config.answer, a_in) * noise(), "answer count");
        const std::array cq_in{r.questions, r.commenters};
        const std::array ca_in{r.answers, r.commenters};
        r.question_comments = guard(evaluate_point(cq, cq_in) * noise(), "comment count");
        r.answer_comments = guard(evaluate_point(ca, ca_in) * noise(), "comment count");
        r.comments = r.question_comments + r.answer_comments;
    }
    return {std::move(s), config};
}

std::int64_t sample_zipf(double alpha, std::mt19937_64& rng) {
    require(alpha > 1, "zipf exponent must exceed 1");
    const double am1 = alpha - 1;
    const double b = std::pow(2.0, am1);
    constexpr double kMax = 9.0e18;
    for (;;) {
        const double u = 1.0 - uniform(rng);  // (0, 1]
        const double v = uniform(rng);
        const double x = std::floor(std::pow(u, -1.0 / am1));
        if (x > kMax) continue;
        const double t = std::pow(1.0 + 1.0 / x, am1);
        if (v * x * (t - 1) / (b - 1) <= t / b) return static_cast<std::int64_t>(x);
    }
}

std::vector<UserPeriodActivity> generate_activity_population(const PopulationConfig& config) {
    if (config.participants.size() != config.alpha.size())
        throw ContractViolation("participants and alpha schedules differ in length");
    std::mt19937_64 rng(config.seed);
    std::vector<UserPeriodActivity> out;
    for (std::size_t t = 0; t < config.alpha.size(); ++t) {
        if (!(config.alpha[t] > 1)) throw ContractViolation("alpha schedule must stay above 1");
        const auto period = config.first_period + static_cast<std::int64_t>(t);
        for (std::size_t u = 0; u < config.participants[t]; ++u)
            out.push_back({static_cast<std::int64_t>(u) + 1, period, 0, sample_zipf(config.alpha[t], rng), 0});
    }
    return out;
}

ParsedDump generate_dump(const MarketSeries& series, const DumpConfig& config) {
    validate(series);
    check_fraction(config.same_period_answers, "same-period answer share outside [0, 1]");
    check_fraction(config.acceptance, "acceptance probability outside [0, 1]");
    check_fraction(config.ownerless, "ownerless share outside [0, 1]");
    std::mt19937_64 rng(config.seed);

    std::int64_t pool = config.user_pool;
    if (pool <= 0) {
        double max_users = 1;
        for (const auto& r : series.rows) max_users = std::max(max_users, r.users);
        pool = static_cast<std::int64_t>(3 * max_users);
    }
    // Role members for one period: distinct ids drawn by popularity, so low
    // ids recur every period and form a stable core.
    auto members = [&](double count) {
        const auto want = std::min<std::int64_t>(std::llround(count), pool);
        std::vector<std::int64_t> out;
        std::set<std::int64_t> seen;
        while (static_cast<std::int64_t>(out.size()) < want) {
            const auto id = sample_zipf(kPopularityAlpha, rng);
            if (id <= pool && seen.insert(id).second) out.push_back(id);
        }
        return out;
    };
    // Every member acts once before the rest of the events follow a Zipf law over members.
    auto owner_source = [&](std::vector<std::int64_t> ids) {
        return [&rng, &config, ids = std::move(ids), used = std::size_t{0}]() mutable -> std::optional<std::int64_t> {
            if (ids.empty() || uniform(rng) < config.ownerless) return std::nullopt;
            if (used < ids.size()) return ids[used++];
            std::int64_t rank;
            do rank = sample_zipf(config.activity_alpha, rng);
            while (rank > static_cast<std::int64_t>(ids.size()));
            return ids[static_cast<std::size_t>(rank - 1)];
        };
    };

    ParsedDump dump;
    std::int64_t next_id = 1;
    std::vector<std::size_t> all_questions;  // indices into dump.posts
    std::vector<std::vector<std::size_t>> answers_of;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& row = series.rows[i];
        const UtcSeconds start = period_start(series.period(i), series.granularity);
        const UtcSeconds length = period_start(series.period(i) + 1, series.granularity) - start;
        auto time_after = [&](UtcSeconds after) {
            const auto last = start + length - 1;
            const auto lo = std::min(std::max(after + 1, start), last);
            return lo + static_cast<UtcSeconds>(uniform(rng) * static_cast<double>(last - lo));
        };

        std::vector<std::size_t> period_questions, period_answers;
        auto asker = owner_source(members(row.askers));
        auto answerer = owner_source(members(row.answerers));
        auto commenter = owner_source(members(row.commenters));
        for (auto k = std::llround(row.questions); k > 0; --k) {
            period_questions.push_back(dump.posts.size());
            all_questions.push_back(dump.posts.size());
            answers_of.emplace_back();
            dump.posts.push_back({next_id++, PostType::Question, time_after(start - 1), asker(), std::nullopt,
                                  std::nullopt});
        }
        for (auto k = std::llround(row.answers); k > 0; --k) {
            const auto total = all_questions.size(), here = period_questions.size();
            std::size_t qi;
            if (here > 0 && (total == here || uniform(rng) < config.same_period_answers))
                qi = total - here + pick(here, rng);
            else if (total > here)
                qi = pick(total - here, rng);
            else
                continue;
            const auto& question = dump.posts[all_questions[qi]];
            answers_of[qi].push_back(dump.posts.size());
            period_answers.push_back(dump.posts.size());
            dump.posts.push_back(
                {next_id++, PostType::Answer, time_after(question.created), answerer(), question.id, std::nullopt});
        }
        auto comment_on = [&](const std::vector<std::size_t>& targets, double count) {
            for (auto k = std::llround(count); k > 0 && !targets.empty(); --k) {
                const auto& post = dump.posts[targets[pick(targets.size(), rng)]];
                dump.comments.push_back({next_id++, post.id, time_after(post.created), commenter()});
            }
        };
        comment_on(period_questions, row.question_comments);
        comment_on(period_answers, row.answer_comments);
    }
    for (std::size_t qi = 0; qi < all_questions.size(); ++qi) {
        if (answers_of[qi].empty() || uniform(rng) >= config.acceptance) continue;
        const auto chosen = answers_of[qi][pick(answers_of[qi].size(), rng)];
        dump.posts[all_questions[qi]].accepted_answer = dump.posts[chosen].id;
    }
    dump.stats.post_rows = static_cast<std::int64_t>(dump.posts.size());
    dump.stats.comment_rows = static_cast<std::int64_t>(dump.comments.size());
    for (const auto& p : dump.posts) dump.stats.ownerless_posts += p.owner ? 0 : 1;
    for (const auto& c : dump.comments) dump.stats.ownerless_comments += c.owner ? 0 : 1;
    return dump;
}

}  // namespace kmarket::synth
