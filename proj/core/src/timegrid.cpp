#include "parkcast/timegrid.hpp"

#include <algorithm>
#include <cstdio>

#include "parkcast/error.hpp"

namespace parkcast {

namespace {

// Days since 1970-01-01 from a civil date (proleptic Gregorian).
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const int yoe = static_cast<int>(y - era * 400);
    const int doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const int doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const int doe = static_cast<int>(z - era * 146097);
    const int yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yr = yoe + era * 400;
    const int doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const int mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y = static_cast<int>(yr + (m <= 2));
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    return a / b - ((a % b != 0) && ((a % b < 0) != (b < 0)) ? 1 : 0);
}

std::int64_t pos_mod(std::int64_t a, std::int64_t b) { return a - floor_div(a, b) * b; }

} // namespace

std::int64_t parse_iso_minutes(const std::string& text) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0;
    char t = 0;
    int n = 0;
    if (std::sscanf(text.c_str(), "%4d-%2d-%2d%c%2d:%2d%n", &y, &mo, &d, &t, &h, &mi, &n) != 6 ||
        (t != 'T' && t != ' ') || n != static_cast<int>(text.size())) {
        throw DataError("bad timestamp '" + text + "', want YYYY-MM-DDTHH:MM");
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59) {
        throw DataError("timestamp field out of range: '" + text + "'");
    }
    return days_from_civil(y, mo, d) * 1440 + h * 60 + mi;
}

std::string format_iso_minutes(std::int64_t minutes) {
    const std::int64_t day = floor_div(minutes, 1440);
    const int rem = static_cast<int>(minutes - day * 1440);
    int y = 0, m = 0, d = 0;
    civil_from_days(day, y, m, d);
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d", y, m, d, rem / 60, rem % 60);
    return buf;
}

int day_of_week(std::int64_t minutes) {
    // 1970-01-01 was a Thursday (3 in Monday-based numbering).
    return static_cast<int>(pos_mod(floor_div(minutes, 1440) + 3, 7));
}

bool is_weekday(std::int64_t minutes) { return day_of_week(minutes) < 5; }

std::size_t TimeGrid::index_of(std::int64_t stamp) const {
    const auto it = std::lower_bound(stamps.begin(), stamps.end(), stamp);
    if (it == stamps.end() || *it != stamp) {
        throw DataError("stamp " + format_iso_minutes(stamp) + " is not on the grid");
    }
    return static_cast<std::size_t>(it - stamps.begin());
}

bool TimeGrid::contains(std::int64_t stamp) const {
    return std::binary_search(stamps.begin(), stamps.end(), stamp);
}

std::size_t TimeGrid::day_of_index(std::size_t idx) const {
    for (std::size_t i = 0; i < days.size(); ++i) {
        if (idx >= days[i].first && idx < days[i].first + days[i].count) return i;
    }
    throw DataError("grid index " + std::to_string(idx) + " outside every day span");
}

int TimeGrid::minute_of_day(std::size_t idx) const {
    if (idx >= stamps.size()) throw DataError("grid index out of range");
    return static_cast<int>(pos_mod(stamps[idx], 1440));
}

TimeGrid make_weekday_grid(std::int64_t start_date, std::size_t weekdays, int open_minute,
                           int close_minute, int interval_minutes) {
    if (interval_minutes <= 0 || open_minute < 0 || close_minute <= open_minute ||
        close_minute > 1440) {
        throw ConfigError("make_weekday_grid: bad span or interval");
    }
    if (pos_mod(start_date, 1440) != 0) {
        throw ConfigError("make_weekday_grid: start_date must be a midnight");
    }
    TimeGrid g;
    g.interval_minutes = interval_minutes;
    std::int64_t date = start_date;
    while (g.days.size() < weekdays) {
        if (is_weekday(date)) {
            DaySpan span;
            span.midnight = date;
            span.first = g.stamps.size();
            for (int m = open_minute; m < close_minute; m += interval_minutes) {
                g.stamps.push_back(date + m);
            }
            span.count = g.stamps.size() - span.first;
            g.days.push_back(span);
        }
        date += 1440;
    }
    return g;
}

TimeGrid grid_from_stamps(std::vector<std::int64_t> stamps, int interval_minutes) {
    if (stamps.empty()) throw DataError("grid_from_stamps: no stamps");
    if (interval_minutes <= 0) throw ConfigError("grid_from_stamps: bad interval");
    if (!std::is_sorted(stamps.begin(), stamps.end()) ||
        std::adjacent_find(stamps.begin(), stamps.end()) != stamps.end()) {
        throw DataError("grid_from_stamps: stamps must be strictly increasing");
    }
    TimeGrid g;
    g.interval_minutes = interval_minutes;
    g.stamps = std::move(stamps);
    std::size_t at = 0;
    while (at < g.stamps.size()) {
        DaySpan span;
        span.midnight = floor_div(g.stamps[at], 1440) * 1440;
        span.first = at;
        std::size_t end = at + 1;
        while (end < g.stamps.size() &&
               floor_div(g.stamps[end], 1440) * 1440 == span.midnight) {
            if (g.stamps[end] - g.stamps[end - 1] != interval_minutes) {
                throw DataError("grid_from_stamps: gap at " + format_iso_minutes(g.stamps[end]));
            }
            ++end;
        }
        span.count = end - at;
        g.days.push_back(span);
        at = end;
    }
    return g;
}

} // namespace parkcast
