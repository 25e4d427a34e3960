#include "parkcast/pipeline.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "parkcast/csv.hpp"
#include "parkcast/error.hpp"
#include "parkcast/rng.hpp"

using namespace parkcast;

namespace {

TimeGrid one_day_grid() {
    return make_weekday_grid(parse_iso_minutes("2026-03-02T00:00"), 1);
}

TransactionRecord rec(const std::string& block, const char* start, const char* end) {
    TransactionRecord r;
    r.meter_id = "m0";
    r.block_id = block;
    r.start = parse_iso_minutes(start);
    r.end = parse_iso_minutes(end);
    return r;
}

WeatherRow wx_row(const char* time, double temp, double rain_flag) {
    WeatherRow r;
    r.time = parse_iso_minutes(time);
    r.values = {temp, 40, 60, 5, 8, 10, 29.9, temp, temp, 0, 0, 0, rain_flag, 0};
    return r;
}

} // namespace

TEST(TransactionsToOccupancy, CountsStaysCoveringMidpoints) {
    const TimeGrid g = one_day_grid();
    const std::vector<std::string> blocks = {"A"};
    const std::vector<TransactionRecord> records = {
        rec("A", "2026-03-02T10:00", "2026-03-02T12:00"),
        rec("A", "2026-03-02T10:30", "2026-03-02T11:00"),
    };
    const OccupancyPanel p = transactions_to_occupancy(records, blocks, g);

    // 10:40's midpoint is 10:45 (both stays active); 11:30's is 11:35.
    EXPECT_DOUBLE_EQ(p.counts.at(g.index_of(parse_iso_minutes("2026-03-02T10:40")), 0), 2.0);
    EXPECT_DOUBLE_EQ(p.counts.at(g.index_of(parse_iso_minutes("2026-03-02T11:30")), 0), 1.0);
    // Before the first stay and after the last end: empty kerb.
    EXPECT_DOUBLE_EQ(p.counts.at(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(p.counts.at(g.index_of(parse_iso_minutes("2026-03-02T12:00")), 0), 0.0);
}

TEST(TransactionsToOccupancy, HalfOpenEndExcludesTheEndMinute) {
    const TimeGrid g = one_day_grid();
    // Stay ends exactly on the 10:15 midpoint of the 10:10 interval.
    const std::vector<TransactionRecord> records = {
        rec("A", "2026-03-02T09:00", "2026-03-02T10:15"),
    };
    const OccupancyPanel p = transactions_to_occupancy(records, {"A"}, g);
    EXPECT_DOUBLE_EQ(p.counts.at(g.index_of(parse_iso_minutes("2026-03-02T10:00")), 0), 1.0);
    EXPECT_DOUBLE_EQ(p.counts.at(g.index_of(parse_iso_minutes("2026-03-02T10:10")), 0), 0.0);
}

TEST(TransactionsToOccupancy, EmptyRecordsGiveAllZeros) {
    const TimeGrid g = one_day_grid();
    const OccupancyPanel p = transactions_to_occupancy({}, {"A", "B"}, g);
    for (double v : p.counts.flat()) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(TransactionsToOccupancy, UnknownBlocksAreListed) {
    const TimeGrid g = one_day_grid();
    const std::vector<TransactionRecord> records = {
        rec("nope", "2026-03-02T10:00", "2026-03-02T11:00"),
        rec("alsono", "2026-03-02T10:00", "2026-03-02T11:00"),
    };
    try {
        transactions_to_occupancy(records, {"A"}, g);
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find("nope"), std::string::npos);
        EXPECT_NE(what.find("alsono"), std::string::npos);
    }
}

TEST(TransactionsToOccupancy, MatchesBruteForceScanOn1000RandomRecords) {
    const TimeGrid g = make_weekday_grid(parse_iso_minutes("2026-03-02T00:00"), 3);
    const std::vector<std::string> blocks = {"A", "B", "C", "D"};
    Rng rng(42);
    std::vector<TransactionRecord> records;
    const std::int64_t day0 = parse_iso_minutes("2026-03-02T00:00");
    for (int i = 0; i < 1000; ++i) {
        TransactionRecord r;
        r.meter_id = "m" + std::to_string(i);
        r.block_id = blocks[rng.uniform_int(blocks.size())];
        r.start = day0 + static_cast<std::int64_t>(rng.uniform_int(3 * 1440));
        r.end = r.start + 1 + static_cast<std::int64_t>(rng.uniform_int(300));
        records.push_back(r);
    }
    const OccupancyPanel p = transactions_to_occupancy(records, blocks, g);

    // Oracle: per stamp, per block, scan every record against the midpoint.
    for (std::size_t t = 0; t < g.size(); ++t) {
        const double mid = static_cast<double>(g.stamps[t]) + g.interval_minutes / 2.0;
        for (std::size_t v = 0; v < blocks.size(); ++v) {
            double n = 0;
            for (const TransactionRecord& r : records) {
                if (r.block_id == blocks[v] && static_cast<double>(r.start) <= mid &&
                    mid < static_cast<double>(r.end)) {
                    n += 1;
                }
            }
            ASSERT_DOUBLE_EQ(p.counts.at(t, v), n) << "stamp " << t << " block " << v;
        }
    }

    // Conservation: the panel total equals the count of active stays.
    for (std::size_t t = 0; t < g.size(); t += 17) {
        const double mid = static_cast<double>(g.stamps[t]) + g.interval_minutes / 2.0;
        double total = 0;
        for (std::size_t v = 0; v < blocks.size(); ++v) total += p.counts.at(t, v);
        double active = 0;
        for (const TransactionRecord& r : records) {
            if (static_cast<double>(r.start) <= mid && mid < static_cast<double>(r.end)) active += 1;
        }
        EXPECT_DOUBLE_EQ(total, active);
    }
}

TEST(TransactionsToOccupancy, RejectsNonPositiveStays) {
    const TimeGrid g = one_day_grid();
    std::vector<TransactionRecord> records = {rec("A", "2026-03-02T10:00", "2026-03-02T10:00")};
    records[0].end = records[0].start;
    EXPECT_THROW(transactions_to_occupancy(records, {"A"}, g), DataError);
}

TEST(SpeedIngest, RatioAndConfidenceFiltering) {
    const TimeGrid g = one_day_grid();
    std::vector<SpeedRow> rows;
    SpeedRow r;
    r.block_id = "A";
    r.time = g.stamps[0];
    r.realtime_mph = 20;
    r.freeflow_mph = 40;
    r.confidence = 30;
    rows.push_back(r);
    r.time = g.stamps[1];
    r.realtime_mph = 25;
    r.freeflow_mph = 25;
    rows.push_back(r);
    r.time = g.stamps[2];
    r.realtime_mph = 10;
    r.freeflow_mph = 40;
    r.confidence = 29;  // filtered: the cell keeps the fill value
    rows.push_back(r);

    const SpeedPanel p = speed_ingest(rows, {"A"}, g);
    EXPECT_DOUBLE_EQ(p.ratio.at(0, 0), 2.0);
    EXPECT_DOUBLE_EQ(p.ratio.at(1, 0), 1.0);
    EXPECT_DOUBLE_EQ(p.ratio.at(2, 0), 1.0);
    EXPECT_DOUBLE_EQ(p.ratio.at(3, 0), 1.0);  // no reading at all
}

TEST(SpeedIngest, RejectsBadRows) {
    const TimeGrid g = one_day_grid();
    SpeedRow r;
    r.block_id = "A";
    r.time = g.stamps[0];
    r.realtime_mph = 0;
    r.freeflow_mph = 40;
    r.confidence = 30;
    EXPECT_THROW(speed_ingest({r}, {"A"}, g), DataError);
    r.realtime_mph = 20;
    r.block_id = "ghost";
    EXPECT_THROW(speed_ingest({r}, {"A"}, g), DataError);
}

TEST(WeatherInterpolate, LinearBetweenHourlyRows) {
    const TimeGrid g = one_day_grid();
    const std::vector<WeatherRow> rows = {
        wx_row("2026-03-02T06:00", 55, 0), wx_row("2026-03-02T09:00", 60, 0),
        wx_row("2026-03-02T10:00", 66, 0), wx_row("2026-03-02T19:00", 50, 0),
    };
    const WeatherSeries wx = weather_interpolate(rows, g);
    for (int k = 1; k <= 5; ++k) {
        const std::size_t idx = g.index_of(parse_iso_minutes("2026-03-02T09:00") + 10 * k);
        EXPECT_NEAR(wx.values.at(idx, 0), 60.0 + k, 1e-12);
    }
    EXPECT_NEAR(wx.values.at(g.index_of(parse_iso_minutes("2026-03-02T09:00")), 0), 60.0, 1e-12);
}

TEST(WeatherInterpolate, FlagsStepForwardNotInterpolate) {
    const TimeGrid g = one_day_grid();
    const std::vector<WeatherRow> rows = {
        wx_row("2026-03-02T06:00", 55, 1), wx_row("2026-03-02T09:00", 60, 1),
        wx_row("2026-03-02T10:00", 66, 0), wx_row("2026-03-02T19:00", 50, 0),
    };
    const WeatherSeries wx = weather_interpolate(rows, g);
    for (int k = 0; k < 6; ++k) {
        const std::size_t idx = g.index_of(parse_iso_minutes("2026-03-02T09:00") + 10 * k);
        EXPECT_DOUBLE_EQ(wx.values.at(idx, 12), 1.0) << "k=" << k;
    }
    EXPECT_DOUBLE_EQ(wx.values.at(g.index_of(parse_iso_minutes("2026-03-02T10:00")), 12), 0.0);
}

TEST(WeatherInterpolate, ConstantSeriesStaysConstantAndEdgesClamp) {
    const TimeGrid g = one_day_grid();
    // Rows start after the grid opens: early stamps clamp to the first row.
    const std::vector<WeatherRow> rows = {
        wx_row("2026-03-02T09:00", 42, 0), wx_row("2026-03-02T12:00", 42, 0),
    };
    const WeatherSeries wx = weather_interpolate(rows, g);
    for (std::size_t t = 0; t < g.size(); ++t) EXPECT_DOUBLE_EQ(wx.values.at(t, 0), 42.0);
}

TEST(WeatherInterpolate, RejectsUnsortedAndBadFlags) {
    const TimeGrid g = one_day_grid();
    EXPECT_THROW(weather_interpolate({wx_row("2026-03-02T10:00", 60, 0),
                                      wx_row("2026-03-02T09:00", 61, 0)},
                                     g),
                 DataError);
    EXPECT_THROW(weather_interpolate({wx_row("2026-03-02T09:00", 60, 0.5)}, g), DataError);
    EXPECT_THROW(weather_interpolate({}, g), DataError);
}

TEST(ClassifyHazardous, ThreeRulesWithStrictPrecipBoundary) {
    double f[kWeatherFeatureCount] = {50, 40, 60, 5, 8, 10, 29.9, 50, 50, 0, 0, 0, 0, 0};
    EXPECT_FALSE(classify_hazardous(f));
    f[kWeatherVisibility] = 4.0;
    EXPECT_TRUE(classify_hazardous(f));
    f[kWeatherVisibility] = 5.0;
    EXPECT_FALSE(classify_hazardous(f));  // boundary: not strictly below
    f[kWeatherPrecip] = 0.15;
    EXPECT_FALSE(classify_hazardous(f));  // boundary: strict inequality
    f[kWeatherPrecip] = 0.1500001;
    EXPECT_TRUE(classify_hazardous(f));
    f[kWeatherPrecip] = 0.0;
    f[kWeatherSnowFlag] = 1.0;
    EXPECT_TRUE(classify_hazardous(f));
}

TEST(HazardousDays, FlagsDaysWithAnyHazardStamp) {
    const TimeGrid g = make_weekday_grid(parse_iso_minutes("2026-03-02T00:00"), 2);
    std::vector<WeatherRow> rows;
    // Day 1 clear all day; day 2 foggy from 12:00.
    rows.push_back(wx_row("2026-03-02T06:00", 50, 0));
    rows.push_back(wx_row("2026-03-02T19:00", 52, 0));
    rows.push_back(wx_row("2026-03-03T06:00", 50, 0));
    WeatherRow fog = wx_row("2026-03-03T12:00", 50, 0);
    fog.values[kWeatherVisibility] = 2.0;
    rows.push_back(fog);
    WeatherRow clear_again = wx_row("2026-03-03T19:00", 50, 0);
    rows.push_back(clear_again);

    const WeatherSeries wx = weather_interpolate(rows, g);
    const std::vector<char> hazard = hazardous_days(wx);
    ASSERT_EQ(hazard.size(), 2u);
    EXPECT_EQ(hazard[0], 0);
    EXPECT_EQ(hazard[1], 1);
}

TEST(CsvRoundTrip, TransactionsSpeedWeather) {
    const std::vector<TransactionRecord> recs = {
        rec("A", "2026-03-02T10:00", "2026-03-02T12:00"),
        rec("B", "2026-03-02T10:30", "2026-03-02T11:00"),
    };
    std::ostringstream t_out;
    write_transactions_csv(t_out, recs);
    std::istringstream t_in(t_out.str());
    const auto recs2 = read_transactions_csv(t_in, "t");
    ASSERT_EQ(recs2.size(), 2u);
    EXPECT_EQ(recs2[1].block_id, "B");
    EXPECT_EQ(recs2[0].start, recs[0].start);

    std::vector<SpeedRow> speed(1);
    speed[0].block_id = "A";
    speed[0].time = parse_iso_minutes("2026-03-02T07:00");
    speed[0].realtime_mph = 17.25;
    speed[0].freeflow_mph = 31.5;
    speed[0].confidence = 30;
    std::ostringstream s_out;
    write_speed_csv(s_out, speed);
    std::istringstream s_in(s_out.str());
    const auto speed2 = read_speed_csv(s_in, "s");
    ASSERT_EQ(speed2.size(), 1u);
    EXPECT_DOUBLE_EQ(speed2[0].realtime_mph, 17.25);
    EXPECT_EQ(speed2[0].confidence, 30);

    const std::vector<WeatherRow> wx = {wx_row("2026-03-02T06:00", 55.125, 1)};
    std::ostringstream w_out;
    write_weather_csv(w_out, wx);
    std::istringstream w_in(w_out.str());
    const auto wx2 = read_weather_csv(w_in, "w");
    ASSERT_EQ(wx2.size(), 1u);
    for (std::size_t k = 0; k < kWeatherFeatureCount; ++k) {
        EXPECT_DOUBLE_EQ(wx2[0].values[k], wx[0].values[k]);
    }
}

TEST(CsvRoundTrip, TravelTimeMatrixWithInf) {
    TravelTimeTable t;
    t.blocks = {"A", "B"};
    t.seconds = Tensor({2, 2}, {0.0, 62.5, std::numeric_limits<double>::infinity(), 0.0});
    std::ostringstream out;
    write_travel_time_csv(out, t);
    EXPECT_EQ(out.str(), "A,B\n0,62.5\ninf,0\n");

    std::istringstream in(out.str());
    const TravelTimeTable back = read_travel_time_csv(in, "tt");
    ASSERT_EQ(back.blocks, t.blocks);
    EXPECT_DOUBLE_EQ(back.seconds.at(0, 1), 62.5);
    EXPECT_TRUE(std::isinf(back.seconds.at(1, 0)));
}

TEST(CsvRoundTrip, BlocksMetadata) {
    std::vector<BlockInfo> blocks(1);
    blocks[0] = {"B07", "recreational", 12, 3.0, 1.5};
    std::ostringstream out;
    write_blocks_csv(out, blocks);
    std::istringstream in(out.str());
    const auto back = read_blocks_csv(in, "b");
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0].kind, "recreational");
    EXPECT_EQ(back[0].capacity, 12);
    EXPECT_DOUBLE_EQ(back[0].y, 1.5);
}

TEST(CsvErrors, NameTheLabelAndLineNumber) {
    std::istringstream bad_header("who,what\n");
    try {
        read_transactions_csv(bad_header, "tx.csv");
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find("tx.csv"), std::string::npos);
        EXPECT_NE(what.find("line 1"), std::string::npos);
    }

    std::istringstream bad_row(
        "meter_id,block_id,start_iso8601,end_iso8601\n"
        "m0,A,2026-03-02T10:00,2026-03-02T12:00\n"
        "m1,A,2026-03-02T10:00,notatime\n");
    try {
        read_transactions_csv(bad_row, "tx.csv");
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }

    std::istringstream short_row(
        "block_id,time_iso8601,realtime_mph,freeflow_mph,confidence\n"
        "A,2026-03-02T07:00,20\n");
    EXPECT_THROW(read_speed_csv(short_row, "s.csv"), DataError);
}

TEST(CsvNumbers, ShortestFormRoundTripsExactly) {
    for (double v : {0.1, 2.0, 1.0 / 3.0, 1e-17, 123456.789, -0.25}) {
        EXPECT_EQ(parse_double(fmt_double(v)), v);
    }
    EXPECT_EQ(fmt_double(2.0), "2");
    EXPECT_EQ(fmt_double(std::numeric_limits<double>::infinity()), "inf");
    EXPECT_THROW(parse_double("12x"), DataError);
    EXPECT_THROW(parse_double(""), DataError);
}
