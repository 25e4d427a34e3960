#pragma once

#include <cstdint>
#include <vector>

#include "parkcast/csv.hpp"
#include "parkcast/pipeline.hpp"
#include "parkcast/timegrid.hpp"

namespace parkcast {

// Synthetic city scenario. Blocks sit on a street grid; business blocks fill
// around midday, recreational blocks toward the evening. Hazardous weather
// suppresses recreational demand and nudges business demand up. Arrivals
// overflow to the nearest reachable block when one fills (kerb cruising).
struct SynthConfig {
    std::size_t vertex_count = 39;
    std::size_t days = 60;       // weekdays
    std::uint64_t seed = 0;
    std::int64_t start_date = 0;  // midnight minutes; 0 picks a fixed Monday
    double hazard_prob = 0.25;
    double fill_target = 0.6;    // peak mean occupancy as a fraction of capacity
    int min_capacity = 6;
    int max_capacity = 18;
    double hazard_rec_mult = 0.45;  // recreational demand on hazardous days
    double hazard_bus_mult = 1.10;  // business demand on hazardous days
    double speed_noise = 0.05;
    double drop_confidence_prob = 0.08;  // share of sensor rows below confidence 30

    void validate() const;  // ConfigError
};

struct SynthOutput {
    std::vector<BlockInfo> blocks;  // id, kind, capacity, coordinates
    TravelTimeTable travel;         // pairwise seconds, inf = no direct link
    TimeGrid grid;

    std::vector<TransactionRecord> transactions;
    std::vector<SpeedRow> speed_rows;      // grid-aligned sensor readings
    std::vector<WeatherRow> weather_rows;  // hourly, 6:00 to 19:00 each day

    std::vector<char> hazardous_day;  // ground truth per grid day

    // Panels derived from the rows above through the ingestion operations,
    // so file round trips reproduce them exactly.
    OccupancyPanel occupancy;
    SpeedPanel speed;
    WeatherSeries weather;

    std::vector<std::string> block_ids() const;
    std::vector<double> true_capacities() const;
};

SynthOutput synth_generate(const SynthConfig& cfg);

} // namespace parkcast
