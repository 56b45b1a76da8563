#pragma once

#include "kmarket/analysis.hpp"
#include "kmarket/fitting.hpp"
#include "kmarket/forecasting.hpp"
#include "kmarket/ingest.hpp"
#include "kmarket/series.hpp"
#include "kmarket/synth.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace kmarket::io {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Shortest decimal that round-trips; "NA" for NaN and "inf"/"-inf" for infinities.
std::string format_double(double v);
/// Inverse of format_double. Throws Error("malformed-number").
double parse_double(std::string_view text);

/// NaN and infinities become null.
json number(double v);
double number_from(const json& j);

std::string read_file(const std::string& path);
/// Creates parent directories as needed. Throws Error("output-unwritable").
void write_file(const std::string& path, const std::string& content);

// ---- series -------------------------------------------------------------

/// Fixed columns: period, U, U_q, U_a, U_c, N_q, N_a, N_cq, N_ca, N_c, followed by
/// the question-cohort columns when cohorts are present. The period column is
/// named after the granularity ("month", "week" or "quarter").
std::string series_csv(const MarketSeries& s);
/// Throws Error("malformed-series").
MarketSeries parse_series_csv(std::string_view text, std::string site_id = {});

json to_json(const MarketSeries& s);
MarketSeries series_from_json(const json& j);

/// Reads a series from a .json or .csv file, picking the parser by extension.
MarketSeries load_series(const std::string& path);

json to_json(const IngestStats& s);

std::string activity_csv(std::span<const UserPeriodActivity> records, Granularity g);
std::vector<UserPeriodActivity> parse_activity_csv(std::string_view text, Granularity* granularity = nullptr);

/// StackExchange archive XML for generated dumps.
std::string posts_xml(const ParsedDump& dump);
std::string comments_xml(const ParsedDump& dump);

// ---- models and fits ----------------------------------------------------

/// {content_type, basis, interaction, theta, bounds}; infinite bounds are null.
json to_json(const ModelSpec& spec);
ModelSpec spec_from_json(const json& j);

json to_json(const FitMetrics& m);
json to_json(const FitReport& r, const MarketSeries* observed = nullptr);
FitReport fit_report_from_json(const json& j);
json to_json(const ModelGridResult& g);
/// One row per cell: content, basis, interaction, k, rmse, nrmse, evs, aic, delta_aic, converged, winner, error.
std::string grid_csv(const ModelGridResult& g);
json to_json(const std::vector<MetricComparison>& c);

// ---- forecasts ----------------------------------------------------------

json to_json(const ForecastReport& r);
/// period, actual, predicted over the test window.
std::string forecast_csv(const ForecastReport& r);
json to_json(const BatchForecast& b);
/// content, sites, mean, variance.
std::string batch_csv(const BatchForecast& b);

// ---- analyses -----------------------------------------------------------

json to_json(const RoleRegressionReport& r);
std::string roles_csv(const RoleRegressionReport& r);
json to_json(const SizeDependenceReport& r, Granularity g);
std::string size_dependence_csv(const SizeDependenceReport& r, Granularity g);
json to_json(const HealthSeries& h);
std::string health_csv(const HealthSeries& h);
json to_json(std::span<const ExchangeabilityResult> e, Granularity g, bool smoothed);
std::string exchangeability_csv(std::span<const ExchangeabilityResult> e, Granularity g);
json to_json(const TenureBinReport& t);
std::string tenure_csv(const TenureBinReport& t);
json to_json(const DiseconomiesCurve& d);
std::string diseconomies_csv(const DiseconomiesCurve& d);

// ---- synth config -------------------------------------------------------

json to_json(const synth::SynthConfig& c);
synth::SynthConfig synth_config_from_json(const json& j);

// ---- manifest -----------------------------------------------------------

/// 64-bit FNV-1a of the compact JSON dump, as 16 hex digits.
std::string config_hash(const json& config);

/// Modelling choices that the outputs depend on.
json decision_ledger(double ramp_threshold);

/// SOURCE_DATE_EPOCH when set, otherwise the current time, as ISO-8601 UTC.
std::string timestamp_now();

json manifest(const std::string& command, const std::vector<std::string>& inputs, const json& config,
              std::uint64_t seed, double ramp_threshold);

}  // namespace kmarket::io
