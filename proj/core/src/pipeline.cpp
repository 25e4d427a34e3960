#include "parkcast/pipeline.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "parkcast/error.hpp"

namespace parkcast {

const std::array<const char*, kWeatherFeatureCount> kWeatherFeatureNames = {
    "temperature_f", "dew_point_f",  "humidity_pct", "wind_mph",      "gust_mph",
    "visibility_mi", "pressure_inhg", "wind_chill_f", "heat_index_f", "precip_in_hr",
    "pavement_flag", "fog_flag",      "rain_flag",    "snow_flag",
};

namespace {

std::unordered_map<std::string, std::size_t> block_index(const std::vector<std::string>& blocks) {
    std::unordered_map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (!idx.emplace(blocks[i], i).second) {
            throw DataError("duplicate block id '" + blocks[i] + "'");
        }
    }
    return idx;
}

} // namespace

OccupancyPanel transactions_to_occupancy(const std::vector<TransactionRecord>& records,
                                         const std::vector<std::string>& blocks,
                                         const TimeGrid& grid) {
    const auto idx = block_index(blocks);
    std::set<std::string> unknown;
    for (const TransactionRecord& r : records) {
        if (!idx.count(r.block_id)) unknown.insert(r.block_id);
        if (r.end <= r.start) {
            throw DataError("transaction at meter " + r.meter_id + " ends at or before its start");
        }
    }
    if (!unknown.empty()) {
        std::string msg = "transactions reference unknown blocks:";
        for (const std::string& b : unknown) msg += " " + b;
        throw DataError(msg);
    }

    // Midpoints in half-minutes keep integer arithmetic exact for odd
    // intervals. A stay covers midpoint m iff start <= m < end.
    const std::size_t t_count = grid.size();
    std::vector<std::int64_t> mid2(t_count);
    for (std::size_t t = 0; t < t_count; ++t) {
        mid2[t] = 2 * grid.stamps[t] + grid.interval_minutes;
    }

    // Difference array per block over stamp ranges found by binary search.
    OccupancyPanel panel;
    panel.blocks = blocks;
    panel.grid = grid;
    Tensor diff({t_count + 1, blocks.size()});
    for (const TransactionRecord& r : records) {
        const std::size_t v = idx.at(r.block_id);
        const auto lo = std::lower_bound(mid2.begin(), mid2.end(), 2 * r.start);
        const auto hi = std::lower_bound(mid2.begin(), mid2.end(), 2 * r.end);
        const std::size_t t0 = static_cast<std::size_t>(lo - mid2.begin());
        const std::size_t t1 = static_cast<std::size_t>(hi - mid2.begin());
        if (t0 < t1) {
            diff.at(t0, v) += 1.0;
            diff.at(t1, v) -= 1.0;
        }
    }
    panel.counts = Tensor({t_count, blocks.size()});
    for (std::size_t v = 0; v < blocks.size(); ++v) {
        double run = 0.0;
        for (std::size_t t = 0; t < t_count; ++t) {
            run += diff.at(t, v);
            panel.counts.at(t, v) = run;
        }
    }
    return panel;
}

SpeedPanel speed_ingest(const std::vector<SpeedRow>& rows, const std::vector<std::string>& blocks,
                        const TimeGrid& grid) {
    const auto idx = block_index(blocks);
    SpeedPanel panel;
    panel.blocks = blocks;
    panel.grid = grid;
    panel.ratio = Tensor::full({grid.size(), blocks.size()}, 1.0);
    for (const SpeedRow& r : rows) {
        const auto it = idx.find(r.block_id);
        if (it == idx.end()) throw DataError("speed row references unknown block '" + r.block_id + "'");
        if (r.realtime_mph <= 0.0 || r.freeflow_mph <= 0.0) {
            throw DataError("nonpositive speed for block " + r.block_id + " at " +
                            format_iso_minutes(r.time));
        }
        if (r.confidence != 30) continue;
        if (!panel.grid.contains(r.time)) continue;
        panel.ratio.at(panel.grid.index_of(r.time), it->second) = r.freeflow_mph / r.realtime_mph;
    }
    return panel;
}

WeatherSeries weather_interpolate(const std::vector<WeatherRow>& rows, const TimeGrid& grid) {
    if (rows.empty()) throw DataError("weather_interpolate: no rows");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].time <= rows[i - 1].time) {
            throw DataError("weather rows unsorted at " + format_iso_minutes(rows[i].time));
        }
    }
    for (const WeatherRow& r : rows) {
        for (std::size_t k = kWeatherFirstFlag; k < kWeatherFeatureCount; ++k) {
            if (r.values[k] != 0.0 && r.values[k] != 1.0) {
                throw DataError(std::string("weather flag ") + kWeatherFeatureNames[k] +
                                " not in {0,1} at " + format_iso_minutes(r.time));
            }
        }
    }

    WeatherSeries wx;
    wx.grid = grid;
    wx.values = Tensor({grid.size(), kWeatherFeatureCount});
    std::vector<std::int64_t> times(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) times[i] = rows[i].time;

    for (std::size_t t = 0; t < grid.size(); ++t) {
        const std::int64_t stamp = grid.stamps[t];
        // First row at or after the stamp.
        const auto it = std::lower_bound(times.begin(), times.end(), stamp);
        const std::size_t hi = static_cast<std::size_t>(it - times.begin());

        std::size_t a, b;
        double w = 0.0;  // weight of row b
        if (hi == 0) {
            a = b = 0;
        } else if (hi == rows.size()) {
            a = b = rows.size() - 1;
        } else if (times[hi] == stamp) {
            a = b = hi;
        } else {
            a = hi - 1;
            b = hi;
            w = static_cast<double>(stamp - times[a]) / static_cast<double>(times[b] - times[a]);
        }
        const std::size_t step = hi > 0 && (hi == rows.size() || times[hi] != stamp) ? hi - 1 : hi;

        for (std::size_t k = 0; k < kWeatherFeatureCount; ++k) {
            wx.values.at(t, k) = k >= kWeatherFirstFlag
                                     ? rows[step].values[k]
                                     : (1.0 - w) * rows[a].values[k] + w * rows[b].values[k];
        }
    }
    return wx;
}

bool classify_hazardous(const double* f) {
    return f[kWeatherVisibility] < 5.0 || f[kWeatherPrecip] > 0.15 || f[kWeatherSnowFlag] != 0.0;
}

bool classify_hazardous(const WeatherSeries& wx, std::size_t idx) {
    if (idx >= wx.grid.size()) throw DataError("weather stamp index out of range");
    return classify_hazardous(wx.values.data() + idx * kWeatherFeatureCount);
}

std::vector<char> hazardous_days(const WeatherSeries& wx) {
    std::vector<char> out(wx.grid.days.size(), 0);
    for (std::size_t d = 0; d < wx.grid.days.size(); ++d) {
        const DaySpan& span = wx.grid.days[d];
        for (std::size_t t = span.first; t < span.first + span.count; ++t) {
            if (classify_hazardous(wx, t)) {
                out[d] = 1;
                break;
            }
        }
    }
    return out;
}

} // namespace parkcast
