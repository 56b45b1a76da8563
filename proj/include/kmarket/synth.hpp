#pragma once

#include "kmarket/ingest.hpp"
#include "kmarket/production.hpp"
#include "kmarket/series.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace kmarket::synth {

enum class TrajectoryKind { Constant, Linear, Logistic };
std::string_view to_string(TrajectoryKind k);
std::optional<TrajectoryKind> parse_trajectory(std::string_view text);

/// User count over time. Constant stays at `start`; linear moves from
/// `start` to `end` across the series; logistic rises from `start` toward
/// `end` with the given midpoint (in periods) and rate.
struct Trajectory {
    TrajectoryKind kind = TrajectoryKind::Constant;
    double start = 100;
    double end = 100;
    double midpoint = 0;
    double rate = 0.3;

    double operator()(std::size_t t, std::size_t periods) const;
};

struct RoleFractions {
    double askers = 0.4;
    double answerers = 0.3;
    double commenters = 0.35;
};

struct SynthConfig {
    std::string site_id = "synthetic";
    std::size_t months = 36;
    std::int64_t first_period = 2010 * 12;  // 2010-01
    Trajectory users;
    RoleFractions roles;
    /// Role counts are s_x·U(t)·(1 + m·sin(2πt/P + φ_x)) with phases 0, 2π/3,
    /// 4π/3 for askers, answerers and commenters.
    double modulation = 0;
    double modulation_period = 7;
    ModelSpec question;
    ModelSpec answer;
    ModelSpec comment;
    double noise = 0;  // σ of the multiplicative log-normal factor on outputs
    std::uint64_t seed = 1;
};

struct SynthResult {
    MarketSeries series;  // unrounded content counts, rounded participant counts
    SynthConfig truth;
};

/// Throws ContractViolation for an invalid config and Error("synth-overflow")
/// when a generated value exceeds 1e12.
SynthResult generate(const SynthConfig& config);

/// Draws from P(x) ∝ x^-alpha on x >= 1 (Devroye's rejection method).
std::int64_t sample_zipf(double alpha, std::mt19937_64& rng);

struct PopulationConfig {
    std::int64_t first_period = 2010 * 12;
    std::vector<std::size_t> participants;  // per period
    std::vector<double> alpha;              // per period, each > 1
    std::uint64_t seed = 1;
};

/// One record per participant per period; the sampled activity is stored as answers.
std::vector<UserPeriodActivity> generate_activity_population(const PopulationConfig& config);

struct DumpConfig {
    double same_period_answers = 0.8;  // share of answers attached to a question of the same period
    double acceptance = 0.5;           // chance an answered question gets an accepted answer
    double activity_alpha = 2.0;       // Zipf exponent of per-user popularity
    std::int64_t user_pool = 0;        // 0: three times the largest user count
    double ownerless = 0.01;           // share of posts and comments with no owner
    std::uint64_t seed = 1;
};

/// Posts and comments whose monthly totals follow the (rounded) series.
/// Answers need an existing question; when a period has none they attach to
/// an earlier one, or are dropped before the first question.
ParsedDump generate_dump(const MarketSeries& series, const DumpConfig& config);

}  // namespace kmarket::synth
