#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace kmarket {

/// Seconds since 1970-01-01T00:00:00Z.
using UtcSeconds = std::int64_t;

enum class Granularity { Week, Month, Quarter };

std::string_view to_string(Granularity g);
std::optional<Granularity> parse_granularity(std::string_view text);

/// Parses "YYYY-MM-DDThh:mm:ss[.fff][Z]" as UTC. Returns nullopt on malformed input.
std::optional<UtcSeconds> parse_timestamp(std::string_view text);

/// Ordinal of the period containing `t`. Months are y*12+(m-1), quarters
/// y*4+(q-1), weeks count Monday-started weeks since the epoch week.
std::int64_t period_of(UtcSeconds t, Granularity g);

/// First second of the period with the given ordinal.
UtcSeconds period_start(std::int64_t ordinal, Granularity g);

/// "2010-01" for months, "2010Q1" for quarters, Monday date "2010-01-04" for weeks.
std::string period_label(std::int64_t ordinal, Granularity g);

/// Inverse of period_label; the label shape identifies the granularity.
std::optional<std::pair<std::int64_t, Granularity>> parse_period_label(std::string_view label);

}  // namespace kmarket
