#pragma once

#include "kmarket/fitting.hpp"
#include "kmarket/series.hpp"
#include "kmarket/stats.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kmarket {

// ---- role regression ----------------------------------------------------

struct RoleRegressionReport {
    stats::LinearFit askers;      // U_q on U
    stats::LinearFit answerers;   // U_a on U
    stats::LinearFit commenters;  // U_c on U
    std::size_t periods = 0;
};

/// OLS of each role count on the user count. r_squared is NaN when U is constant.
RoleRegressionReport regress_roles(const MarketSeries& series);

// ---- power-law activity -------------------------------------------------

inline constexpr double kPowerLawAlphaMax = 8.0;
inline constexpr std::size_t kPowerLawMinSize = 30;

struct PowerLawFit {
    std::int64_t period = 0;
    std::size_t n = 0;  // counts >= xmin that entered the fit
    std::int64_t xmin = 1;
    double alpha = std::numeric_limits<double>::quiet_NaN();
    double log_likelihood = std::numeric_limits<double>::quiet_NaN();
    bool skipped = false;     // below the minimum fit size
    bool degenerate = false;  // alpha pinned at kPowerLawAlphaMax
};

/// Discrete power-law MLE, P(x) = x^-alpha / zeta(alpha, xmin) for x >= xmin.
/// Counts below xmin are ignored. Returns a skipped fit when fewer than
/// `min_size` counts remain.
PowerLawFit fit_power_law(std::span<const std::int64_t> counts, std::int64_t xmin = 1,
                          std::size_t min_size = kPowerLawMinSize);

/// ln zeta(alpha, xmin) for integer xmin >= 1.
double log_hurwitz_zeta(double alpha, std::int64_t xmin);

enum class ActivityKind { Total, Questions, Answers, Comments };
std::string_view to_string(ActivityKind k);
std::optional<ActivityKind> parse_activity_kind(std::string_view text);

/// Nonzero per-user activity counts for one period.
std::vector<std::int64_t> activity_counts(std::span<const UserPeriodActivity> records, std::int64_t period,
                                          ActivityKind kind = ActivityKind::Total);

enum class CorrelationStrength { Strong, Moderate, Weak };
std::string_view to_string(CorrelationStrength s);
/// strong r² >= 0.5, moderate 0.3 <= r² < 0.5, weak otherwise (including NaN).
CorrelationStrength classify_strength(double r_squared);

struct SizeDependenceReport {
    std::vector<PowerLawFit> months;  // every period with records, skipped ones included
    std::size_t valid_months = 0;
    stats::LinearFit regression;      // alpha on n_participants over valid months
    CorrelationStrength strength = CorrelationStrength::Weak;
    bool big = false;                 // every valid month has >= 500 participants
};

inline constexpr std::size_t kSizeDependenceMinMonths = 6;
inline constexpr double kBigMarketParticipants = 500;

/// Regresses per-period alpha on participant count. n is the number of
/// users with nonzero activity of the chosen kind. Throws
/// Error("too-few-months") below kSizeDependenceMinMonths valid fits.
SizeDependenceReport size_dependence(std::span<const UserPeriodActivity> records,
                                     ActivityKind kind = ActivityKind::Total,
                                     std::size_t min_size = kPowerLawMinSize);

/// Same regression over precomputed (n, alpha) fits.
SizeDependenceReport size_dependence(std::vector<PowerLawFit> fits);

// ---- tenure -------------------------------------------------------------

inline constexpr int kTenureBins = 5;

struct TenureBin {
    double lo = 0;  // tenure edges; the last bin is closed on the right
    double hi = 0;
    std::vector<std::int64_t> users;
    std::optional<std::array<double, 3>> quartiles;  // absent for an empty bin
    std::vector<stats::LetterValue> letter_values;
};

struct TenureBinReport {
    std::vector<TenureBin> bins;  // always kTenureBins
    std::size_t users = 0;
};

/// Tenure = number of distinct active periods; contribution = answers per
/// active period. Equal-width bins over [min, max] tenure.
TenureBinReport tenure_analysis(std::span<const UserPeriodActivity> records);

// ---- health -------------------------------------------------------------

struct HealthRow {
    std::int64_t period = 0;
    double users = 0;
    double answers_per_question = 0;  // NaN when N_q = 0
    double h1 = 0;                    // NaN when no question was asked
    double h2 = 0;
    double h1_same_period = 0;
    double h2_same_period = 0;
};

struct HealthSeries {
    std::string site_id;
    Granularity granularity = Granularity::Month;
    std::vector<HealthRow> rows;
};

/// Requires question cohorts on the series. Throws Error("missing-cohorts").
HealthSeries health_series(const MarketSeries& series);

// ---- exchangeability ----------------------------------------------------

inline constexpr std::size_t kExchangeabilityMinUsers = 40;
inline constexpr double kExchangeabilitySlice = 0.05;

struct ExchangeabilityResult {
    std::int64_t period = 0;
    std::size_t contributors = 0;
    std::size_t slice = 0;
    bool skipped = false;  // fewer than kExchangeabilityMinUsers contributors
    double e1 = std::numeric_limits<double>::quiet_NaN();
    double e2 = std::numeric_limits<double>::quiet_NaN();
    double top_score = std::numeric_limits<double>::quiet_NaN();  // mean ranking score per slice
    double median_score = std::numeric_limits<double>::quiet_NaN();
    double bottom_score = std::numeric_limits<double>::quiet_NaN();
};

/// Contributors are users with any activity in the period.
/// Users are ranked by answers/questions. With `smoothed`, users who asked
/// nothing score (answers+1)/(questions+1); without it they are left out.
/// Ties break on user id. E1 is NaN when the bottom slice mean is zero.
ExchangeabilityResult exchangeability(std::span<const UserPeriodActivity> records, std::int64_t period,
                                      bool smoothed = true);

// ---- diseconomies -------------------------------------------------------

struct DiseconomiesPoint {
    double users = 0;
    double ratio = 0;  // N_a / N_q
};

struct DiseconomiesCurve {
    double elasticity = 0;           // d ln(N_a/N_q) / d ln U
    double percent_per_percent = 0;  // ratio change for +1% users, in percent
    bool diseconomies = false;       // elasticity < 0
    double constant = 0;             // ratio = constant · U^elasticity
    /// Elasticity when N_q in the answer model is replaced by the question
    /// model itself: ν·λ + μ − ν. Informational only.
    double composed_elasticity = 0;
    std::vector<DiseconomiesPoint> points;
};

/// Answers-to-questions ratio implied by Cobb-Douglas question and answer
/// models with U_q = s_q·U and U_a = s_a·U and the answer model's question
/// input treated as a separate elasticity:
/// a_a (s_q U)^λ (s_a U)^μ / (a_q (s_q U)^ν). Throws Error("not-cobb-douglas")
/// for other families and ContractViolation for non-positive role slopes.
DiseconomiesCurve diseconomies_curve(const ModelSpec& question_model, const ModelSpec& answer_model,
                                     double askers_per_user, double answerers_per_user,
                                     std::span<const double> users);

}  // namespace kmarket
