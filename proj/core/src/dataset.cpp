#include "parkcast/dataset.hpp"

#include <algorithm>

#include "parkcast/error.hpp"
#include "parkcast/metrics.hpp"

namespace parkcast {

Tensor gather_rows(const Tensor& m, const std::vector<std::size_t>& idx) {
    require_rank(m, 2, "gather_rows");
    Tensor out({idx.size(), m.cols()});
    const std::size_t c = m.cols();
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= m.rows()) {
            throw ShapeError("gather_rows: index " + std::to_string(idx[i]) + " out of " +
                             std::to_string(m.rows()));
        }
        std::copy(m.data() + idx[i] * c, m.data() + (idx[i] + 1) * c, out.data() + i * c);
    }
    return out;
}

BatchInputs gather_inputs(const ModelSpec& spec, const BatchInputs& full, std::size_t total,
                          const std::vector<std::size_t>& idx) {
    BatchInputs out;
    const std::size_t b = idx.size();
    for (const DataSourceSpec& s : spec.sources) {
        auto it = full.find(s.name);
        if (it == full.end()) {
            throw DataError("gather_inputs: missing source '" + s.name + "'");
        }
        const Tensor& x = it->second;
        const std::size_t v = s.uses_graph() ? spec.vertex_count : 1;
        const std::size_t steps = schema_uses_time(s.schema) ? spec.window : 1;
        const std::size_t d = s.feature_dim;
        if (x.rank() != 2 || x.cols() != d || x.rows() != steps * total * v) {
            throw DataError("gather_inputs: source '" + s.name + "' has shape " +
                            shape_str(x.shape()) + ", expected {" +
                            std::to_string(steps * total * v) + ", " + std::to_string(d) + "}");
        }
        Tensor y({steps * b * v, d});
        for (std::size_t t = 0; t < steps; ++t) {
            for (std::size_t i = 0; i < b; ++i) {
                if (idx[i] >= total) {
                    throw ShapeError("gather_inputs: sample index " + std::to_string(idx[i]) +
                                     " out of " + std::to_string(total));
                }
                const double* src = x.data() + (t * total + idx[i]) * v * d;
                double* dst = y.data() + (t * b + i) * v * d;
                std::copy(src, src + v * d, dst);
            }
        }
        out[s.name] = std::move(y);
    }
    return out;
}

namespace {

// Rows of a {T, C} panel restricted to the stamps of the given days.
Tensor day_rows(const Tensor& panel, const TimeGrid& grid, const std::vector<std::size_t>& days) {
    std::size_t n = 0;
    for (std::size_t d : days) n += grid.days[d].count;
    Tensor out({n, panel.cols()});
    std::size_t at = 0;
    for (std::size_t d : days) {
        const DaySpan& span = grid.days[d];
        std::copy(panel.data() + span.first * panel.cols(),
                  panel.data() + (span.first + span.count) * panel.cols(),
                  out.data() + at * panel.cols());
        at += span.count;
    }
    return out;
}

// Packs one split's samples from a scaled {T, C} panel.
// vertexed: rows (t*N + s)*C + v with one column. Flat: rows t*N + s, C cols.
Tensor pack_vertexed(const Tensor& panel, const std::vector<SampleIndex>& samples,
                     std::size_t window) {
    const std::size_t n = samples.size();
    const std::size_t v = panel.cols();
    Tensor out({window * n * v, 1});
    for (std::size_t t = 0; t < window; ++t) {
        for (std::size_t s = 0; s < n; ++s) {
            const double* src = panel.data() + (samples[s].t0 + t) * v;
            std::copy(src, src + v, out.data() + (t * n + s) * v);
        }
    }
    return out;
}

Tensor pack_flat(const Tensor& panel, const std::vector<SampleIndex>& samples,
                 std::size_t window) {
    const std::size_t n = samples.size();
    const std::size_t c = panel.cols();
    Tensor out({window * n, c});
    for (std::size_t t = 0; t < window; ++t) {
        for (std::size_t s = 0; s < n; ++s) {
            const double* src = panel.data() + (samples[s].t0 + t) * c;
            std::copy(src, src + c, out.data() + (t * n + s) * c);
        }
    }
    return out;
}

Tensor targets_at(const Tensor& panel, const std::vector<SampleIndex>& samples) {
    std::vector<std::size_t> rows(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) rows[i] = samples[i].target;
    return gather_rows(panel, rows);
}

} // namespace

BuiltData build_dataset(const OccupancyPanel& occ, const SpeedPanel& speed,
                        const WeatherSeries& weather, const WindowConfig& wcfg,
                        const PanelChains& chains) {
    const TimeGrid& grid = occ.grid;
    if (speed.grid.stamps != grid.stamps || weather.grid.stamps != grid.stamps) {
        throw DataError("build_dataset: panels do not share one time grid");
    }
    if (speed.blocks != occ.blocks) {
        throw DataError("build_dataset: occupancy and speed disagree on blocks");
    }

    BuiltData built;
    built.grid = grid;
    built.block_ids = occ.blocks;
    built.raw_occupancy = occ.counts;
    built.plan = window_and_split(grid, wcfg);

    const Tensor occ_train = day_rows(occ.counts, grid, built.plan.train_days);
    const Tensor speed_train = day_rows(speed.ratio, grid, built.plan.train_days);
    const Tensor wx_train = day_rows(weather.values, grid, built.plan.train_days);
    if (occ_train.rows() == 0) throw DataError("build_dataset: no training days");

    built.occupancy_rec = fit_transform(occ_train, chains.occupancy);
    built.speed_rec = fit_transform(speed_train, chains.speed);
    built.weather_rec = fit_transform(wx_train, chains.weather);
    built.capacities = column_q95(occ_train);

    Tensor occ_scaled = occ.counts;
    Tensor speed_scaled = speed.ratio;
    Tensor wx_scaled = weather.values;
    apply_transform(built.occupancy_rec, occ_scaled);
    apply_transform(built.speed_rec, speed_scaled);
    apply_transform(built.weather_rec, wx_scaled);

    auto fill = [&](const std::vector<SampleIndex>& samples, SplitData& split) {
        split.count = samples.size();
        split.inputs["occupancy"] = pack_vertexed(occ_scaled, samples, wcfg.window);
        split.inputs["speed"] = pack_vertexed(speed_scaled, samples, wcfg.window);
        split.inputs["weather"] = pack_flat(wx_scaled, samples, wcfg.window);
        split.targets = targets_at(occ_scaled, samples);
    };
    fill(built.plan.train, built.data.train);
    fill(built.plan.test, built.data.test);
    built.train_raw_targets = targets_at(occ.counts, built.plan.train);
    built.test_raw_targets = targets_at(occ.counts, built.plan.test);

    built.data.window = wcfg.window;
    built.data.horizon = wcfg.horizon;
    built.data.vertex_count = occ.blocks.size();
    return built;
}

} // namespace parkcast
