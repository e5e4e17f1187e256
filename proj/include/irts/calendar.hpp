#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace irts {

/// Calendar breakdown of an epoch-second instant (UTC).
struct DateComponents {
    int year = 0;
    int month = 0;    // 1..12
    int day = 0;      // 1..31
    int weekday = 0;  // 0 = Monday .. 6 = Sunday
    int hour = 0;     // 0..23
};

namespace detail {

inline bool read_int(std::string_view s, std::size_t& pos, std::size_t digits, int& out) {
    if (pos + digits > s.size()) return false;
    const char* first = s.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + digits, out);
    if (ec != std::errc{} || ptr != first + digits) return false;
    pos += digits;
    return true;
}

inline bool expect(std::string_view s, std::size_t& pos, char c) {
    if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
    }
    return false;
}

}  // namespace detail

/**
 * Parse an ISO-8601 date or date-time into epoch seconds.
 *
 * Accepted: `YYYY-MM-DD`, optionally followed by `T` or a space and
 * `HH:MM[:SS[.fff]]`, optionally followed by `Z` or an offset `+HH:MM`,
 * `+HHMM`, `+HH`. Without an offset the instant is taken as UTC.
 * Returns nullopt on anything else.
 */
inline std::optional<double> parse_iso8601(std::string_view s) {
    using namespace std::chrono;
    std::size_t pos = 0;
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
    double frac = 0.0;
    if (!detail::read_int(s, pos, 4, y) || !detail::expect(s, pos, '-') ||
        !detail::read_int(s, pos, 2, mo) || !detail::expect(s, pos, '-') ||
        !detail::read_int(s, pos, 2, d))
        return std::nullopt;

    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                             day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;

    if (pos < s.size() && (s[pos] == 'T' || s[pos] == ' ')) {
        ++pos;
        if (!detail::read_int(s, pos, 2, h) || !detail::expect(s, pos, ':') ||
            !detail::read_int(s, pos, 2, mi))
            return std::nullopt;
        if (detail::expect(s, pos, ':')) {
            if (!detail::read_int(s, pos, 2, sec)) return std::nullopt;
            if (detail::expect(s, pos, '.')) {
                double scale = 0.1;
                std::size_t start = pos;
                while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
                    frac += scale * (s[pos] - '0');
                    scale *= 0.1;
                    ++pos;
                }
                if (pos == start) return std::nullopt;
            }
        }
        if (h > 23 || mi > 59 || sec > 60) return std::nullopt;
    }

    long offset_seconds = 0;
    if (pos < s.size()) {
        if (s[pos] == 'Z') {
            ++pos;
        } else if (s[pos] == '+' || s[pos] == '-') {
            const int sign = s[pos] == '+' ? 1 : -1;
            ++pos;
            int oh = 0, om = 0;
            if (!detail::read_int(s, pos, 2, oh)) return std::nullopt;
            if (detail::expect(s, pos, ':')) {
                if (!detail::read_int(s, pos, 2, om)) return std::nullopt;
            } else if (pos < s.size()) {
                if (!detail::read_int(s, pos, 2, om)) return std::nullopt;
            }
            offset_seconds = sign * (oh * 3600L + om * 60L);
        }
    }
    if (pos != s.size()) return std::nullopt;

    const auto days_since_epoch = sys_days{ymd}.time_since_epoch().count();
    const double seconds = static_cast<double>(days_since_epoch) * 86400.0 + h * 3600.0 +
                           mi * 60.0 + sec + frac - static_cast<double>(offset_seconds);
    return seconds;
}

/// UTC calendar components of an epoch-second instant.
inline DateComponents date_components(double epoch_seconds) {
    using namespace std::chrono;
    const double day_count = std::floor(epoch_seconds / 86400.0);
    const sys_days dp{days{static_cast<long>(day_count)}};
    const year_month_day ymd{dp};
    const weekday wd{dp};
    const double seconds_of_day = epoch_seconds - day_count * 86400.0;

    DateComponents c;
    c.year = static_cast<int>(ymd.year());
    c.month = static_cast<int>(static_cast<unsigned>(ymd.month()));
    c.day = static_cast<int>(static_cast<unsigned>(ymd.day()));
    c.weekday = static_cast<int>((wd.c_encoding() + 6) % 7);
    c.hour = static_cast<int>(seconds_of_day / 3600.0);
    return c;
}

/// Format epoch seconds as `YYYY-MM-DDTHH:MM:SSZ` (whole seconds).
inline std::string format_iso8601(double epoch_seconds) {
    using namespace std::chrono;
    const long total = std::lround(epoch_seconds);
    const long day_count = total >= 0 ? total / 86400 : -((-total + 86399) / 86400);
    const year_month_day ymd{sys_days{days{day_count}}};
    const long rem = total - day_count * 86400;  // in [0, 86400)
    char buf[48];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ",
                  static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()), rem / 3600, (rem / 60) % 60, rem % 60);
    return buf;
}

}  // namespace irts
