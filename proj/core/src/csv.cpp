#include "parkcast/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>

#include "parkcast/error.hpp"

namespace parkcast {

std::string fmt_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
    if (text == "inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) {
        throw DataError("bad number '" + text + "'");
    }
    return v;
}

namespace {

constexpr const char* kTransactionsHeader = "meter_id,block_id,start_iso8601,end_iso8601";
constexpr const char* kSpeedHeader = "block_id,time_iso8601,realtime_mph,freeflow_mph,confidence";
constexpr const char* kBlocksHeader = "block_id,kind,capacity,x,y";

std::string weather_header() {
    std::string h = "time_iso8601";
    for (const char* name : kWeatherFeatureNames) {
        h += ',';
        h += name;
    }
    return h;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t at = 0;
    while (true) {
        const std::size_t comma = line.find(',', at);
        if (comma == std::string::npos) {
            out.push_back(line.substr(at));
            return out;
        }
        out.push_back(line.substr(at, comma - at));
        at = comma + 1;
    }
}

[[noreturn]] void fail(const std::string& label, std::size_t lineno, const std::string& why) {
    throw DataError(label + " line " + std::to_string(lineno) + ": " + why);
}

// Reads the header, then hands each data line's fields to `row`.
void read_rows(std::istream& in, const std::string& label, const std::string& header,
               std::size_t field_count,
               const std::function<void(const std::vector<std::string>&, std::size_t)>& row) {
    std::string line;
    if (!std::getline(in, line)) fail(label, 1, "empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header) fail(label, 1, "bad header, want '" + header + "'");
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_fields(line);
        if (fields.size() != field_count) {
            fail(label, lineno,
                 "expected " + std::to_string(field_count) + " fields, got " +
                     std::to_string(fields.size()));
        }
        try {
            row(fields, lineno);
        } catch (const DataError& e) {
            fail(label, lineno, e.what());
        }
    }
}

std::ifstream open_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    return in;
}

} // namespace

void write_transactions_csv(std::ostream& out, const std::vector<TransactionRecord>& records) {
    out << kTransactionsHeader << "\n";
    for (const TransactionRecord& r : records) {
        out << r.meter_id << ',' << r.block_id << ',' << format_iso_minutes(r.start) << ','
            << format_iso_minutes(r.end) << "\n";
    }
}

std::vector<TransactionRecord> read_transactions_csv(std::istream& in, const std::string& label) {
    std::vector<TransactionRecord> out;
    read_rows(in, label, kTransactionsHeader, 4,
              [&](const std::vector<std::string>& f, std::size_t) {
                  TransactionRecord r;
                  r.meter_id = f[0];
                  r.block_id = f[1];
                  r.start = parse_iso_minutes(f[2]);
                  r.end = parse_iso_minutes(f[3]);
                  if (r.end <= r.start) throw DataError("end not after start");
                  out.push_back(std::move(r));
              });
    return out;
}

void write_speed_csv(std::ostream& out, const std::vector<SpeedRow>& rows) {
    out << kSpeedHeader << "\n";
    for (const SpeedRow& r : rows) {
        out << r.block_id << ',' << format_iso_minutes(r.time) << ',' << fmt_double(r.realtime_mph)
            << ',' << fmt_double(r.freeflow_mph) << ',' << r.confidence << "\n";
    }
}

std::vector<SpeedRow> read_speed_csv(std::istream& in, const std::string& label) {
    std::vector<SpeedRow> out;
    read_rows(in, label, kSpeedHeader, 5, [&](const std::vector<std::string>& f, std::size_t) {
        SpeedRow r;
        r.block_id = f[0];
        r.time = parse_iso_minutes(f[1]);
        r.realtime_mph = parse_double(f[2]);
        r.freeflow_mph = parse_double(f[3]);
        r.confidence = static_cast<int>(parse_double(f[4]));
        out.push_back(std::move(r));
    });
    return out;
}

void write_weather_csv(std::ostream& out, const std::vector<WeatherRow>& rows) {
    out << weather_header() << "\n";
    for (const WeatherRow& r : rows) {
        out << format_iso_minutes(r.time);
        for (double v : r.values) out << ',' << fmt_double(v);
        out << "\n";
    }
}

std::vector<WeatherRow> read_weather_csv(std::istream& in, const std::string& label) {
    std::vector<WeatherRow> out;
    read_rows(in, label, weather_header(), 1 + kWeatherFeatureCount,
              [&](const std::vector<std::string>& f, std::size_t) {
                  WeatherRow r;
                  r.time = parse_iso_minutes(f[0]);
                  for (std::size_t k = 0; k < kWeatherFeatureCount; ++k) {
                      r.values[k] = parse_double(f[k + 1]);
                  }
                  out.push_back(r);
              });
    return out;
}

void write_travel_time_csv(std::ostream& out, const TravelTimeTable& table) {
    const std::size_t v = table.blocks.size();
    if (table.seconds.rank() != 2 || table.seconds.rows() != v || table.seconds.cols() != v) {
        throw ShapeError("travel time matrix must be V x V");
    }
    for (std::size_t i = 0; i < v; ++i) out << (i ? "," : "") << table.blocks[i];
    out << "\n";
    for (std::size_t i = 0; i < v; ++i) {
        for (std::size_t j = 0; j < v; ++j) out << (j ? "," : "") << fmt_double(table.seconds.at(i, j));
        out << "\n";
    }
}

TravelTimeTable read_travel_time_csv(std::istream& in, const std::string& label) {
    std::string line;
    if (!std::getline(in, line)) fail(label, 1, "empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    TravelTimeTable table;
    table.blocks = split_fields(line);
    const std::size_t v = table.blocks.size();
    if (v == 0 || table.blocks[0].empty()) fail(label, 1, "header must list block ids");

    table.seconds = Tensor({v, v});
    std::size_t lineno = 1;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (row >= v) fail(label, lineno, "more data rows than blocks");
        const std::vector<std::string> fields = split_fields(line);
        if (fields.size() != v) {
            fail(label, lineno, "expected " + std::to_string(v) + " entries");
        }
        for (std::size_t j = 0; j < v; ++j) {
            try {
                table.seconds.at(row, j) = parse_double(fields[j]);
            } catch (const DataError& e) {
                fail(label, lineno, e.what());
            }
        }
        ++row;
    }
    if (row != v) fail(label, lineno, "expected " + std::to_string(v) + " data rows");
    return table;
}

void write_blocks_csv(std::ostream& out, const std::vector<BlockInfo>& blocks) {
    out << kBlocksHeader << "\n";
    for (const BlockInfo& b : blocks) {
        out << b.id << ',' << b.kind << ',' << b.capacity << ',' << fmt_double(b.x) << ','
            << fmt_double(b.y) << "\n";
    }
}

std::vector<BlockInfo> read_blocks_csv(std::istream& in, const std::string& label) {
    std::vector<BlockInfo> out;
    read_rows(in, label, kBlocksHeader, 5, [&](const std::vector<std::string>& f, std::size_t) {
        BlockInfo b;
        b.id = f[0];
        b.kind = f[1];
        b.capacity = static_cast<int>(parse_double(f[2]));
        b.x = parse_double(f[3]);
        b.y = parse_double(f[4]);
        out.push_back(std::move(b));
    });
    return out;
}

std::vector<TransactionRecord> read_transactions_file(const std::string& path) {
    std::ifstream in = open_file(path);
    return read_transactions_csv(in, path);
}

std::vector<SpeedRow> read_speed_file(const std::string& path) {
    std::ifstream in = open_file(path);
    return read_speed_csv(in, path);
}

std::vector<WeatherRow> read_weather_file(const std::string& path) {
    std::ifstream in = open_file(path);
    return read_weather_csv(in, path);
}

TravelTimeTable read_travel_time_file(const std::string& path) {
    std::ifstream in = open_file(path);
    return read_travel_time_csv(in, path);
}

std::vector<BlockInfo> read_blocks_file(const std::string& path) {
    std::ifstream in = open_file(path);
    return read_blocks_csv(in, path);
}

} // namespace parkcast
