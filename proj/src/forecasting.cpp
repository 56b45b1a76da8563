#include "kmarket/forecasting.hpp"

#include "kmarket/error.hpp"
#include "kmarket/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kmarket {

ModelSpec forecast_family(ContentType content) {
    ModelSpec spec;
    spec.content = content;
    spec.basis = BasisKind::Power;
    if (content != ContentType::Question) spec.interaction = InteractionKind::InteractiveEssential;
    return spec;
}

ForecastReport forecast(const MarketSeries& series, ContentType content, const ForecastOptions& options) {
    require(options.train > 0 && options.horizon > 0, "train and horizon must be positive");
    const std::size_t needed = options.train + options.horizon;
    if (series.size() < needed)
        throw Error("series-too-short", "forecast needs at least " + std::to_string(needed) + " " +
                                            std::string(to_string(series.granularity)) + " periods (train " +
                                            std::to_string(options.train) + " + horizon " +
                                            std::to_string(options.horizon) + "), got " +
                                            std::to_string(series.size()));
    const auto train = series.slice(0, options.train);
    const auto test = series.slice(options.train, options.horizon);

    ForecastReport report;
    report.site_id = series.site_id;
    report.content = content;
    report.granularity = series.granularity;
    report.train_first = train.period(0);
    report.train_last = train.period(train.size() - 1);
    report.test_first = test.period(0);
    report.test_last = test.period(test.size() - 1);

    auto tmpl = make_template(content, forecast_family(content).basis, forecast_family(content).interaction, train);
    report.fit = fit(tmpl, train, options.fit);
    report.fit.site_id = series.site_id;
    report.actual = target_output(content, test);
    report.predicted = evaluate(report.fit.spec, factor_inputs(content, test));

    double sse = 0;
    for (std::size_t t = 0; t < report.actual.size(); ++t)
        sse += (report.actual[t] - report.predicted[t]) * (report.actual[t] - report.predicted[t]);
    const double rmse = std::sqrt(sse / static_cast<double>(report.actual.size()));
    const auto [lo, hi] = std::ranges::minmax(report.actual);
    report.nrmse = hi > lo ? rmse / (hi - lo) : std::numeric_limits<double>::quiet_NaN();
    return report;
}

BatchForecast batch_forecast(const std::vector<MarketSeries>& sites, const ForecastOptions& options) {
    BatchForecast out;
    std::map<ContentType, std::vector<double>> scores;
    for (const auto& site : sites) {
        std::vector<ForecastReport> site_reports;
        try {
            for (auto content : {ContentType::Question, ContentType::Answer, ContentType::Comment})
                site_reports.push_back(forecast(site, content, options));
        } catch (const Error& e) {
            out.skipped.emplace_back(site.site_id, e.kind() + ": " + e.what());
            continue;
        }
        for (auto& r : site_reports) {
            if (std::isfinite(r.nrmse)) scores[r.content].push_back(r.nrmse);
            out.reports.push_back(std::move(r));
        }
    }
    if (out.reports.empty()) throw Error("no-usable-sites", "every site failed the forecast preconditions");
    for (const auto& [content, v] : scores) {
        if (v.empty()) continue;
        out.summary[content] = {v.size(), stats::mean(v), stats::population_variance(v)};
    }
    return out;
}

}  // namespace kmarket
