#include "kmarket/calendar.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace kmarket {
namespace {

using std::chrono::day;
using std::chrono::month;
using std::chrono::sys_days;
using std::chrono::year;
using std::chrono::year_month_day;

constexpr std::int64_t kSecondsPerDay = 86400;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

bool parse_int(std::string_view text, int& out) {
    if (text.empty()) return false;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

std::int64_t days_of(int y, unsigned m, unsigned d) {
    return sys_days{year_month_day{year{y}, month{m}, day{d}}}.time_since_epoch().count();
}

year_month_day civil_of(std::int64_t days) {
    return year_month_day{sys_days{std::chrono::days{days}}};
}

}  // namespace

std::string_view to_string(Granularity g) {
    switch (g) {
        case Granularity::Week: return "week";
        case Granularity::Month: return "month";
        case Granularity::Quarter: return "quarter";
    }
    return "month";
}

std::optional<Granularity> parse_granularity(std::string_view text) {
    if (text == "week") return Granularity::Week;
    if (text == "month") return Granularity::Month;
    if (text == "quarter") return Granularity::Quarter;
    return std::nullopt;
}

std::optional<UtcSeconds> parse_timestamp(std::string_view text) {
    // YYYY-MM-DDThh:mm:ss
    if (text.size() < 19 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
        text[13] != ':' || text[16] != ':')
        return std::nullopt;
    int y, mo, d, h, mi, s;
    if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), mo) || !parse_int(text.substr(8, 2), d) ||
        !parse_int(text.substr(11, 2), h) || !parse_int(text.substr(14, 2), mi) || !parse_int(text.substr(17, 2), s))
        return std::nullopt;
    auto rest = text.substr(19);
    if (!rest.empty() && rest.front() == '.') {
        std::size_t i = 1;
        while (i < rest.size() && rest[i] >= '0' && rest[i] <= '9') ++i;
        if (i == 1) return std::nullopt;
        rest = rest.substr(i);
    }
    if (rest == "Z") rest = {};
    if (!rest.empty()) return std::nullopt;
    if (mo < 1 || mo > 12 || h > 23 || mi > 59 || s > 60) return std::nullopt;
    year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    const std::int64_t days = sys_days{ymd}.time_since_epoch().count();
    return days * kSecondsPerDay + h * 3600 + mi * 60 + s;
}

std::int64_t period_of(UtcSeconds t, Granularity g) {
    const std::int64_t days = floor_div(t, kSecondsPerDay);
    if (g == Granularity::Week) return floor_div(days + 3, 7);  // 1970-01-01 was a Thursday
    const auto ymd = civil_of(days);
    const std::int64_t y = static_cast<int>(ymd.year());
    const std::int64_t m = static_cast<unsigned>(ymd.month());
    if (g == Granularity::Month) return y * 12 + (m - 1);
    return y * 4 + (m - 1) / 3;
}

UtcSeconds period_start(std::int64_t ordinal, Granularity g) {
    switch (g) {
        case Granularity::Week: return (ordinal * 7 - 3) * kSecondsPerDay;
        case Granularity::Month: {
            const auto y = static_cast<int>(floor_div(ordinal, 12));
            const auto m = static_cast<unsigned>(ordinal - std::int64_t{y} * 12 + 1);
            return days_of(y, m, 1) * kSecondsPerDay;
        }
        case Granularity::Quarter: {
            const auto y = static_cast<int>(floor_div(ordinal, 4));
            const auto q = static_cast<unsigned>(ordinal - std::int64_t{y} * 4);
            return days_of(y, q * 3 + 1, 1) * kSecondsPerDay;
        }
    }
    return 0;
}

std::string period_label(std::int64_t ordinal, Granularity g) {
    char buf[64];
    switch (g) {
        case Granularity::Month: {
            const auto y = floor_div(ordinal, 12);
            std::snprintf(buf, sizeof buf, "%04lld-%02lld", static_cast<long long>(y),
                          static_cast<long long>(ordinal - y * 12 + 1));
            break;
        }
        case Granularity::Quarter: {
            const auto y = floor_div(ordinal, 4);
            std::snprintf(buf, sizeof buf, "%04lldQ%lld", static_cast<long long>(y),
                          static_cast<long long>(ordinal - y * 4 + 1));
            break;
        }
        case Granularity::Week: {
            const auto ymd = civil_of(ordinal * 7 - 3);
            std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                          static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
            break;
        }
    }
    return buf;
}

std::optional<std::pair<std::int64_t, Granularity>> parse_period_label(std::string_view label) {
    int y, a, b;
    if (label.size() == 7 && label[4] == '-' && parse_int(label.substr(0, 4), y) && parse_int(label.substr(5, 2), a) &&
        a >= 1 && a <= 12)
        return std::pair{std::int64_t{y} * 12 + (a - 1), Granularity::Month};
    if (label.size() == 6 && label[4] == 'Q' && parse_int(label.substr(0, 4), y) && parse_int(label.substr(5, 1), a) &&
        a >= 1 && a <= 4)
        return std::pair{std::int64_t{y} * 4 + (a - 1), Granularity::Quarter};
    if (label.size() == 10 && label[4] == '-' && label[7] == '-' && parse_int(label.substr(0, 4), y) &&
        parse_int(label.substr(5, 2), a) && parse_int(label.substr(8, 2), b)) {
        year_month_day ymd{year{y}, month{static_cast<unsigned>(a)}, day{static_cast<unsigned>(b)}};
        if (!ymd.ok()) return std::nullopt;
        const auto days = sys_days{ymd}.time_since_epoch().count();
        if (floor_div(days + 3, 7) * 7 - 3 != days) return std::nullopt;  // not a Monday
        return std::pair{floor_div(days + 3, 7), Granularity::Week};
    }
    return std::nullopt;
}

}  // namespace kmarket
