#pragma once

#include "kmarket/lsq.hpp"
#include "kmarket/production.hpp"
#include "kmarket/series.hpp"
#include "kmarket/stats.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kmarket {

/// Accuracy metrics of a fitted series. nrmse and evs are NaN when the
/// observed range (or variance) is zero.
struct FitMetrics {
    double rmse = 0;
    double nrmse = 0;
    double evs = 0;
    double aic = 0;
    double sse = 0;
};

/// Floor applied to SSE/T before taking the log in AIC.
inline constexpr double kAicLogFloor = 1e-12;

/// RMSE, NRMSE = RMSE/(max−min), EVS = 1 − Var(resid)/Var(obs) and
/// AIC = T·ln(SSE/T) + 2k over equal-length series with T >= 2.
FitMetrics fit_metrics(std::span<const double> observed, std::span<const double> predicted, std::size_t k);

struct FitOptions {
    std::uint64_t seed = 20171001;
    int restarts = 16;
    lsq::Options solver;
};

struct FitReport {
    std::string site_id;
    ModelSpec spec;  // with fitted theta
    FitMetrics metrics;
    std::size_t observations = 0;
    std::size_t parameters = 0;
    bool converged = false;
    std::string termination;
    int iterations = 0;
    int restarts_used = 0;
    int best_start = 0;
    std::vector<double> start_sse;  // SSE at each (amplitude-rescaled) start point
    std::vector<double> predicted;
    std::vector<double> residuals;  // observed − predicted
};

/// Multi-start bounded least squares of `target` on `inputs`.
/// Throws Error("series-too-short") when T < k + 2 and
/// Error("degenerate-target") for an all-zero target.
FitReport fit(const ModelSpec& spec_template, const FactorInputs& inputs, std::span<const double> target,
              const FitOptions& options = {});

/// Fits the template's content type against the matching series columns.
/// Empty template bounds are filled from the observed factor ranges.
FitReport fit(const ModelSpec& spec_template, const MarketSeries& observed, const FitOptions& options = {});

/// Deterministic start points for a template: a Cranley-Patterson rotated
/// Halton sequence over per-parameter start regions, seeded.
std::vector<std::vector<double>> start_points(const ModelSpec& spec_template, const FactorInputs& inputs,
                                              std::span<const double> target, const FitOptions& options);

struct GridCell {
    ContentType content = ContentType::Answer;
    BasisKind basis = BasisKind::Power;
    std::optional<InteractionKind> interaction;
    std::optional<FitReport> report;
    std::string error;          // set when the cell failed
    double delta_aic = 0;       // AIC − winner AIC for this content type
};

struct ModelGridResult {
    std::string site_id;
    std::vector<GridCell> cells;
    std::map<ContentType, std::size_t> winners;  // content → index into cells

    const GridCell* find(ContentType c, BasisKind b, std::optional<InteractionKind> i) const;
    const GridCell* winner(ContentType c) const;
};

struct FamilyFilter {
    std::optional<BasisKind> basis;
    std::optional<InteractionKind> interaction;
};

struct GridOptions {
    FitOptions fit;
    FamilyFilter filter;
    unsigned threads = 0;  // 0 = hardware concurrency
};

/// Fits every (content, basis, interaction) cell: 3 question, 12 answer and
/// 12 comment families unless filtered. Failed cells keep their error and
/// do not abort the grid. Winners minimize AIC; ties go to fewer
/// parameters, then to the lexicographically smaller (basis, interaction) name.
ModelGridResult fit_grid(const MarketSeries& observed, const GridOptions& options = {});

enum class Metric { Rmse, Nrmse, Evs, Aic };
std::string_view to_string(Metric m);
inline constexpr std::array kMetrics{Metric::Rmse, Metric::Nrmse, Metric::Evs, Metric::Aic};

double metric_value(const FitMetrics& m, Metric metric);

struct MetricComparison {
    Metric metric = Metric::Rmse;
    stats::PairedTTest test;  // on b − a
    std::size_t pairs = 0;
    bool significant = false;
    /// "a", "b" or "none": which side has the better mean (lower error / AIC, higher EVS).
    std::string favors = "none";
};

/// Per-site paired t-tests of two report lists on all four metrics; significant iff p < alpha.
/// Lists must align by site. Pairs with an undefined metric are left out of that metric's test.
std::vector<MetricComparison> compare_models(std::span<const FitReport> a, std::span<const FitReport> b,
                                             double alpha = 0.01);

}  // namespace kmarket
