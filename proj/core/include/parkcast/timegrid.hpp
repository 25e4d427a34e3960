#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace parkcast {

// Timestamps are minutes since the Unix epoch, timezone-naive.
std::int64_t parse_iso_minutes(const std::string& text);  // "YYYY-MM-DDTHH:MM"
std::string format_iso_minutes(std::int64_t minutes);

// 0 = Monday ... 6 = Sunday.
int day_of_week(std::int64_t minutes);
bool is_weekday(std::int64_t minutes);

// One calendar day's contiguous run of stamps inside the grid.
struct DaySpan {
    std::int64_t midnight = 0;    // minutes at 00:00 of the day
    std::size_t first = 0;        // index of the day's first stamp
    std::size_t count = 0;
};

// Uniform observation grid: the same open-close span each day, one stamp
// every interval_minutes, days stored in order.
struct TimeGrid {
    std::vector<std::int64_t> stamps;
    std::vector<DaySpan> days;
    int interval_minutes = 10;

    std::size_t size() const { return stamps.size(); }
    // Throws DataError when the stamp is not on the grid.
    std::size_t index_of(std::int64_t stamp) const;
    bool contains(std::int64_t stamp) const;
    // Which day span an index belongs to.
    std::size_t day_of_index(std::size_t idx) const;
    // Minutes past midnight of a stamp.
    int minute_of_day(std::size_t idx) const;
};

// Consecutive weekdays starting at the first weekday on or after start_date
// (minutes at some day's midnight), each covering [open_minute, close_minute)
// in interval_minutes steps. The default span 7:00 to 18:00 at 10 minutes
// yields 66 stamps per day.
TimeGrid make_weekday_grid(std::int64_t start_date, std::size_t weekdays,
                           int open_minute = 7 * 60, int close_minute = 18 * 60,
                           int interval_minutes = 10);

// Grid rebuilt from an explicit sorted stamp list (for data read back from
// files); validates uniform spacing within each day.
TimeGrid grid_from_stamps(std::vector<std::int64_t> stamps, int interval_minutes);

} // namespace parkcast
