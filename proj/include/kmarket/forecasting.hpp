#pragma once

#include "kmarket/fitting.hpp"
#include "kmarket/series.hpp"

#include <map>
#include <string>
#include <vector>

namespace kmarket {

struct ForecastOptions {
    std::size_t train = 12;
    std::size_t horizon = 12;
    FitOptions fit;
};

/// Train-then-predict evaluation of one content type. The test window uses
/// the observed factor inputs of those periods (users are exogenous).
struct ForecastReport {
    std::string site_id;
    ContentType content = ContentType::Answer;
    Granularity granularity = Granularity::Month;
    std::int64_t train_first = 0;  // period ordinals, inclusive
    std::int64_t train_last = 0;
    std::int64_t test_first = 0;
    std::int64_t test_last = 0;
    std::vector<double> actual;
    std::vector<double> predicted;
    double nrmse = 0;  // on the test window only; NaN when the test actuals are constant
    FitReport fit;
};

/// Power-basis model for the content type: the question model, or the
/// interactive-essential answer/comment model.
ModelSpec forecast_family(ContentType content);

/// Fits on the first `train` periods and scores the next `horizon`.
/// Throws Error("series-too-short") naming the required length.
ForecastReport forecast(const MarketSeries& series, ContentType content, const ForecastOptions& options = {});

struct ForecastSummary {
    std::size_t sites = 0;
    double mean = 0;
    double variance = 0;  // population variance over per-site NRMSE
};

struct BatchForecast {
    std::map<ContentType, ForecastSummary> summary;
    std::vector<ForecastReport> reports;
    std::vector<std::pair<std::string, std::string>> skipped;  // site, reason
};

/// Forecasts every content type on every site. Sites failing the length
/// precondition are skipped; throws Error("no-usable-sites") if all are.
BatchForecast batch_forecast(const std::vector<MarketSeries>& sites, const ForecastOptions& options = {});

}  // namespace kmarket
