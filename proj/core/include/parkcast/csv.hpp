#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "parkcast/pipeline.hpp"
#include "parkcast/tensor.hpp"

namespace parkcast {

// Shortest decimal form that parses back to the same double; "inf"/"-inf"
// for infinities.
std::string fmt_double(double v);
double parse_double(const std::string& text);  // DataError on junk

// All readers validate the header byte for byte and report failures with the
// stream label and 1-based line number.

// header: meter_id,block_id,start_iso8601,end_iso8601
void write_transactions_csv(std::ostream& out, const std::vector<TransactionRecord>& records);
std::vector<TransactionRecord> read_transactions_csv(std::istream& in, const std::string& label);

// header: block_id,time_iso8601,realtime_mph,freeflow_mph,confidence
void write_speed_csv(std::ostream& out, const std::vector<SpeedRow>& rows);
std::vector<SpeedRow> read_speed_csv(std::istream& in, const std::string& label);

// header: time_iso8601 followed by the 14 weather feature names.
void write_weather_csv(std::ostream& out, const std::vector<WeatherRow>& rows);
std::vector<WeatherRow> read_weather_csv(std::istream& in, const std::string& label);

// Header row of block ids, then one row of pairwise seconds per block;
// "inf" marks no direct road link.
struct TravelTimeTable {
    std::vector<std::string> blocks;
    Tensor seconds;  // {V, V}
};
void write_travel_time_csv(std::ostream& out, const TravelTimeTable& table);
TravelTimeTable read_travel_time_csv(std::istream& in, const std::string& label);

// Block metadata for reports and the map export.
// header: block_id,kind,capacity,x,y
struct BlockInfo {
    std::string id;
    std::string kind;  // "business" or "recreational"
    int capacity = 0;
    double x = 0;
    double y = 0;
};
void write_blocks_csv(std::ostream& out, const std::vector<BlockInfo>& blocks);
std::vector<BlockInfo> read_blocks_csv(std::istream& in, const std::string& label);

// Path convenience wrappers; DataError when the file cannot be opened.
std::vector<TransactionRecord> read_transactions_file(const std::string& path);
std::vector<SpeedRow> read_speed_file(const std::string& path);
std::vector<WeatherRow> read_weather_file(const std::string& path);
TravelTimeTable read_travel_time_file(const std::string& path);
std::vector<BlockInfo> read_blocks_file(const std::string& path);

} // namespace parkcast
