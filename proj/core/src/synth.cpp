#include "parkcast/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "parkcast/error.hpp"
#include "parkcast/rng.hpp"

namespace parkcast {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Hour-of-day demand shape, peak value 1. Business peaks at 12:30,
// recreational climbs toward 17:00.
double kind_curve(bool business, int minute_of_day) {
    const double m = static_cast<double>(minute_of_day);
    if (business) {
        const double z = (m - 750.0) / 210.0;
        return std::exp(-z * z);
    }
    const double z = (m - 1020.0) / 260.0;
    return std::exp(-z * z);
}

// Monday..Friday demand multipliers.
constexpr double kDowMult[5] = {0.95, 1.0, 1.05, 1.1, 1.25};

std::string block_name(std::size_t i) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "B%02zu", i);
    return buf;
}

// Shortest travel seconds from every block (Dijkstra over the sparse link
// matrix), used to rank spill candidates.
std::vector<std::vector<std::size_t>> spill_order(const Tensor& seconds) {
    const std::size_t v = seconds.rows();
    std::vector<std::vector<std::size_t>> order(v);
    for (std::size_t src = 0; src < v; ++src) {
        std::vector<double> dist(v, kInf);
        dist[src] = 0.0;
        using Item = std::pair<double, std::size_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        heap.push({0.0, src});
        while (!heap.empty()) {
            const auto [d, at] = heap.top();
            heap.pop();
            if (d > dist[at]) continue;
            for (std::size_t next = 0; next < v; ++next) {
                const double w = seconds.at(at, next);
                if (!std::isfinite(w) || next == at) continue;
                if (d + w < dist[next]) {
                    dist[next] = d + w;
                    heap.push({d + w, next});
                }
            }
        }
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < v; ++i) {
            if (i != src && std::isfinite(dist[i])) idx.push_back(i);
        }
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
        if (idx.size() > 8) idx.resize(8);
        order[src] = std::move(idx);
    }
    return order;
}

struct DayWeather {
    bool hazardous = false;
    int mode = 0;  // 0 clear, 1 rain, 2 fog, 3 snow
    double base_temp = 50.0;
};

} // namespace

void SynthConfig::validate() const {
    if (vertex_count < 2) throw ConfigError("synth: need at least 2 blocks");
    if (days < 10) throw ConfigError("synth: need at least 10 days");
    if (hazard_prob < 0.0 || hazard_prob >= 1.0) throw ConfigError("synth: hazard_prob in [0,1)");
    if (fill_target <= 0.0 || fill_target > 1.0) throw ConfigError("synth: fill_target in (0,1]");
    if (min_capacity < 1 || max_capacity < min_capacity) throw ConfigError("synth: bad capacities");
    if (start_date != 0 && start_date % 1440 != 0) {
        throw ConfigError("synth: start_date must be a midnight");
    }
}

std::vector<std::string> SynthOutput::block_ids() const {
    std::vector<std::string> ids;
    for (const BlockInfo& b : blocks) ids.push_back(b.id);
    return ids;
}

std::vector<double> SynthOutput::true_capacities() const {
    std::vector<double> caps;
    for (const BlockInfo& b : blocks) caps.push_back(static_cast<double>(b.capacity));
    return caps;
}

SynthOutput synth_generate(const SynthConfig& cfg) {
    cfg.validate();
    const std::size_t v = cfg.vertex_count;
    Rng root(cfg.seed);
    Rng city_rng = root.fork(1);
    Rng weather_rng = root.fork(2);
    Rng demand_rng = root.fork(3);
    Rng speed_rng = root.fork(4);

    SynthOutput out;
    // 2026-03-02 is a Monday.
    const std::int64_t start =
        cfg.start_date != 0 ? cfg.start_date : parse_iso_minutes("2026-03-02T00:00");
    out.grid = make_weekday_grid(start, cfg.days);

    // Street-grid city: blocks on integer corners, links between 4-neighbors.
    const std::size_t w = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(v))));
    out.blocks.resize(v);
    for (std::size_t i = 0; i < v; ++i) {
        BlockInfo& b = out.blocks[i];
        b.id = block_name(i);
        const std::size_t col = i % w, row = i / w;
        b.x = static_cast<double>(col);
        b.y = static_cast<double>(row);
        b.kind = (col + row) % 2 == 0 ? "business" : "recreational";
        b.capacity = cfg.min_capacity +
                     static_cast<int>(city_rng.uniform() *
                                      static_cast<double>(cfg.max_capacity - cfg.min_capacity + 1));
        b.capacity = std::min(b.capacity, cfg.max_capacity);
    }
    out.travel.blocks = out.block_ids();
    out.travel.seconds = Tensor::full({v, v}, kInf);
    for (std::size_t i = 0; i < v; ++i) out.travel.seconds.at(i, i) = 0.0;
    for (std::size_t i = 0; i < v; ++i) {
        const std::size_t col = i % w, row = i / w;
        for (const auto [dc, dr] : {std::pair{1, 0}, std::pair{0, 1}}) {
            const std::size_t nc = col + dc, nr = row + dr;
            const std::size_t j = nr * w + nc;
            if (nc >= w || j >= v) continue;
            const double sec = 40.0 + city_rng.uniform() * 40.0;
            out.travel.seconds.at(i, j) = sec;
            out.travel.seconds.at(j, i) = sec;
        }
    }
    const std::vector<std::vector<std::size_t>> spill = spill_order(out.travel.seconds);

    // Per-block personality and free-flow speed.
    std::vector<double> block_mult(v), freeflow(v);
    for (std::size_t i = 0; i < v; ++i) {
        block_mult[i] = 0.8 + 0.45 * city_rng.uniform();
        freeflow[i] = 25.0 + 10.0 * city_rng.uniform();
    }

    // Weather regimes per day, then hourly rows.
    std::vector<DayWeather> day_wx(cfg.days);
    out.hazardous_day.assign(cfg.days, 0);
    for (std::size_t d = 0; d < cfg.days; ++d) {
        DayWeather& dw = day_wx[d];
        dw.base_temp = 45.0 + 18.0 * std::sin(6.283185307179586 * static_cast<double>(d) / 37.0) +
                       weather_rng.normal(0.0, 5.0);
        dw.hazardous = weather_rng.uniform() < cfg.hazard_prob;
        if (dw.hazardous) {
            if (dw.base_temp < 35.0) {
                dw.mode = 3;
            } else {
                dw.mode = weather_rng.uniform() < 0.5 ? 1 : 2;
            }
            out.hazardous_day[d] = 1;
        }
    }
    for (std::size_t d = 0; d < cfg.days; ++d) {
        const DayWeather& dw = day_wx[d];
        const std::int64_t midnight = out.grid.days[d].midnight;
        double pressure = 29.6 + 0.5 * weather_rng.uniform();
        for (int hour = 6; hour <= 19; ++hour) {
            WeatherRow r;
            r.time = midnight + hour * 60;
            const double diurnal = 8.0 * std::exp(-std::pow((hour - 15.0) / 4.0, 2.0));
            const double temp = dw.base_temp + diurnal + weather_rng.normal(0.0, 0.8);
            const double dew = temp - (5.0 + 18.0 * weather_rng.uniform()) * (dw.mode == 0 ? 1.0 : 0.25);
            const double wind = 2.0 + 6.0 * std::abs(weather_rng.normal());
            pressure += weather_rng.normal(0.0, 0.01);

            double vis = 8.0 + 2.0 * weather_rng.uniform();
            double precip = 0.0;
            double snow = 0.0;
            switch (dw.mode) {
                case 1:  // rain: precipitation alone crosses the hazard line
                    precip = 0.2 + 0.25 * weather_rng.uniform();
                    vis = 5.5 + 3.0 * weather_rng.uniform();
                    break;
                case 2:  // fog: visibility alone crosses the hazard line
                    vis = 1.0 + 3.0 * weather_rng.uniform();
                    precip = 0.02 * weather_rng.uniform();
                    break;
                case 3:  // snow
                    snow = 1.0;
                    precip = 0.05 + 0.1 * weather_rng.uniform();
                    vis = 2.0 + 3.5 * weather_rng.uniform();
                    break;
                default: break;
            }
            const double humidity = std::clamp(100.0 - 3.2 * (temp - dew), 15.0, 100.0);
            r.values = {temp,
                        dew,
                        humidity,
                        wind,
                        wind * (1.3 + 0.5 * weather_rng.uniform()),
                        vis,
                        pressure,
                        temp < 50.0 ? temp - 0.7 * wind : temp,
                        temp > 75.0 ? temp + 8.0 * humidity / 100.0 : temp,
                        precip,
                        precip > 0.0 || snow > 0.0 ? 1.0 : 0.0,
                        vis < 3.0 ? 1.0 : 0.0,
                        precip > 0.01 && snow == 0.0 ? 1.0 : 0.0,
                        snow};
            out.weather_rows.push_back(r);
        }
    }

    // Demand: Poisson arrivals per (interval, block); a full block pushes the
    // arrival to the nearest block with space, else the driver leaves.
    // Little's law sizes the peak rate: occupancy ~ rate_per_min * duration.
    const double mean_duration_min = 85.0;
    std::vector<std::priority_queue<std::int64_t, std::vector<std::int64_t>, std::greater<>>>
        active(v);
    std::size_t meter_counter = 0;
    std::vector<std::vector<double>> arrivals_grid(out.grid.size(), std::vector<double>(v, 0.0));

    for (std::size_t d = 0; d < cfg.days; ++d) {
        const DaySpan& span = out.grid.days[d];
        const double dow = kDowMult[day_of_week(span.midnight)];
        const DayWeather& dw = day_wx[d];
        for (std::size_t t = span.first; t < span.first + span.count; ++t) {
            const int mod = out.grid.minute_of_day(t);
            for (std::size_t b = 0; b < v; ++b) {
                const bool business = out.blocks[b].kind == "business";
                const double hazard_mult =
                    dw.hazardous ? (business ? cfg.hazard_bus_mult : cfg.hazard_rec_mult) : 1.0;
                const double cap = static_cast<double>(out.blocks[b].capacity);
                const double peak_rate =
                    cap * cfg.fill_target / mean_duration_min * out.grid.interval_minutes;
                const double rate = peak_rate * block_mult[b] * kind_curve(business, mod) * dow *
                                    hazard_mult;
                const std::size_t n = demand_rng.poisson(rate);
                arrivals_grid[t][b] = static_cast<double>(n);
                for (std::size_t k = 0; k < n; ++k) {
                    const std::int64_t minute =
                        out.grid.stamps[t] +
                        static_cast<std::int64_t>(demand_rng.uniform() *
                                                  out.grid.interval_minutes);
                    const double dur_min = std::clamp(
                        std::exp(demand_rng.normal(std::log(mean_duration_min) - 0.18, 0.6)), 10.0,
                        300.0);

                    // Free a spot whose stay has ended before counting.
                    std::size_t park_at = v;  // v = nowhere
                    while (!active[b].empty() && active[b].top() <= minute) active[b].pop();
                    if (active[b].size() <
                        static_cast<std::size_t>(out.blocks[b].capacity)) {
                        park_at = b;
                    } else {
                        for (std::size_t cand : spill[b]) {
                            while (!active[cand].empty() && active[cand].top() <= minute) {
                                active[cand].pop();
                            }
                            if (active[cand].size() <
                                static_cast<std::size_t>(out.blocks[cand].capacity)) {
                                park_at = cand;
                                break;
                            }
                        }
                    }
                    if (park_at == v) continue;  // cruised away

                    TransactionRecord rec;
                    rec.block_id = out.blocks[park_at].id;
                    rec.meter_id = out.blocks[park_at].id + "-m" +
                                   std::to_string(meter_counter++ %
                                                  static_cast<std::size_t>(
                                                      out.blocks[park_at].capacity));
                    rec.start = minute;
                    rec.end = minute + static_cast<std::int64_t>(std::llround(dur_min));
                    active[park_at].push(rec.end);
                    out.transactions.push_back(std::move(rec));
                }
            }
        }
        for (auto& heap : active) {
            while (!heap.empty()) heap.pop();  // lots clear overnight
        }
    }

    // Congestion tracks local arrival pressure with sensor noise; a slice of
    // readings carries low confidence and is meant to be filtered out.
    for (std::size_t t = 0; t < out.grid.size(); ++t) {
        for (std::size_t b = 0; b < v; ++b) {
            const double cap = static_cast<double>(out.blocks[b].capacity);
            const double peak = cap * cfg.fill_target / mean_duration_min *
                                out.grid.interval_minutes * 1.25;
            double load = arrivals_grid[t][b];
            for (std::size_t nb : spill[b]) load += 0.5 * arrivals_grid[t][nb];
            const double norm = std::min(load / (peak * 3.0), 1.6);
            const double ratio =
                std::max(1.0 + 0.8 * norm * norm + speed_rng.normal(0.0, cfg.speed_noise), 1.0);
            SpeedRow r;
            r.block_id = out.blocks[b].id;
            r.time = out.grid.stamps[t];
            r.freeflow_mph = freeflow[b];
            r.realtime_mph = freeflow[b] / ratio;
            r.confidence = speed_rng.uniform() < cfg.drop_confidence_prob ? 20 : 30;
            out.speed_rows.push_back(std::move(r));
        }
    }

    out.occupancy = transactions_to_occupancy(out.transactions, out.block_ids(), out.grid);
    out.speed = speed_ingest(out.speed_rows, out.block_ids(), out.grid);
    out.weather = weather_interpolate(out.weather_rows, out.grid);
    return out;
}

} // namespace parkcast
