#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "parkcast/tensor.hpp"
#include "parkcast/timegrid.hpp"

namespace parkcast {

// One paid parking stay, minute resolution, end strictly after start.
struct TransactionRecord {
    std::string meter_id;
    std::string block_id;
    std::int64_t start = 0;
    std::int64_t end = 0;
};

// One road sensor reading. Confidence below 30 marks an unreliable estimate.
struct SpeedRow {
    std::string block_id;
    std::int64_t time = 0;
    double realtime_mph = 0;
    double freeflow_mph = 0;
    int confidence = 0;
};

inline constexpr std::size_t kWeatherFeatureCount = 14;

// Column order of WeatherRow::values, WeatherSeries and the weather CSV.
// The last four are 0/1 flags; the rest are continuous.
extern const std::array<const char*, kWeatherFeatureCount> kWeatherFeatureNames;
inline constexpr std::size_t kWeatherVisibility = 5;
inline constexpr std::size_t kWeatherPrecip = 9;
inline constexpr std::size_t kWeatherFirstFlag = 10;
inline constexpr std::size_t kWeatherSnowFlag = 13;

struct WeatherRow {
    std::int64_t time = 0;
    std::array<double, kWeatherFeatureCount> values{};
};

// Vehicles present per (stamp, block), sampled at interval midpoints.
struct OccupancyPanel {
    std::vector<std::string> blocks;
    TimeGrid grid;
    Tensor counts;  // {T, V}
};

// Congestion ratio free-flow / real-time per (stamp, block); 1 = free flow.
struct SpeedPanel {
    std::vector<std::string> blocks;
    TimeGrid grid;
    Tensor ratio;  // {T, V}
};

// The 14 weather features on the observation grid.
struct WeatherSeries {
    TimeGrid grid;
    Tensor values;  // {T, 14}
};

// Counts stays covering each interval midpoint, half-open [start, end).
// Unknown block ids raise a DataError listing them.
OccupancyPanel transactions_to_occupancy(const std::vector<TransactionRecord>& records,
                                         const std::vector<std::string>& blocks,
                                         const TimeGrid& grid);

// Keeps only confidence 30 readings; ratio = freeflow / realtime. Cells with
// no kept reading stay at 1. Readings off the grid are ignored; nonpositive
// speeds and unknown blocks raise a DataError.
SpeedPanel speed_ingest(const std::vector<SpeedRow>& rows, const std::vector<std::string>& blocks,
                        const TimeGrid& grid);

// Linear interpolation of continuous features onto the grid; flags carry the
// last reading at or before each stamp forward. Rows must be strictly
// increasing in time and bracket nothing: stamps outside the row span clamp
// to the nearest row.
WeatherSeries weather_interpolate(const std::vector<WeatherRow>& rows, const TimeGrid& grid);

// Visibility under 5 miles, precipitation above 0.15 in/hr (strict), or an
// active snow flag.
bool classify_hazardous(const double* stamp_features);
bool classify_hazardous(const WeatherSeries& wx, std::size_t idx);

// A day is hazardous when any of its stamps is.
std::vector<char> hazardous_days(const WeatherSeries& wx);

} // namespace parkcast
