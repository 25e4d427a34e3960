#pragma once

#include <cstddef>
#include <vector>

#include "parkcast/model.hpp"
#include "parkcast/pipeline.hpp"
#include "parkcast/preprocess.hpp"
#include "parkcast/tensor.hpp"
#include "parkcast/windowing.hpp"

namespace parkcast {

// One split of windowed samples, packed in the model's input layouts with
// N = count. targets is count x V, aligned with sample order.
struct SplitData {
    BatchInputs inputs;
    Tensor targets;
    std::size_t count = 0;
};

struct Dataset {
    SplitData train;
    SplitData test;
    std::size_t window = 0;
    std::size_t horizon = 0;
    std::size_t vertex_count = 0;
};

// out[i, :] = m[idx[i], :].
Tensor gather_rows(const Tensor& m, const std::vector<std::size_t>& idx);

// Extracts the chosen samples from full packed tensors (total samples) into a
// batch packed the same way, one entry per source the spec actually uses.
BatchInputs gather_inputs(const ModelSpec& spec, const BatchInputs& full, std::size_t total,
                          const std::vector<std::size_t>& idx);

// Scaling chains per panel; defaults follow the winning preprocessing pair
// (max-abs normalize, then minmax onto [-1, 1]).
struct PanelChains {
    std::vector<ScaleStep> occupancy = {{ScaleOp::kNormalize}, {ScaleOp::kMinMax}};
    std::vector<ScaleStep> speed = {{ScaleOp::kNormalize}, {ScaleOp::kMinMax}};
    std::vector<ScaleStep> weather = {{ScaleOp::kNormalize}, {ScaleOp::kMinMax}};
};

// Model-ready dataset plus everything needed to evaluate in vehicle counts:
// the fitted transforms, q95 reference capacities from raw train-day
// occupancy, the untouched panel for baselines, and the split plan.
struct BuiltData {
    Dataset data;
    WindowPlan plan;
    TimeGrid grid;
    std::vector<std::string> block_ids;
    TransformRecord occupancy_rec, speed_rec, weather_rec;
    std::vector<double> capacities;
    Tensor raw_occupancy;      // {T, V}
    Tensor train_raw_targets;  // {N_train, V} vehicle counts at target stamps
    Tensor test_raw_targets;   // {N_test, V}
};

// Fits the chains on train-day rows only, scales all three panels, windows
// them into the packed source layouts, and pairs each sample with its
// transformed occupancy target.
BuiltData build_dataset(const OccupancyPanel& occ, const SpeedPanel& speed,
                        const WeatherSeries& weather, const WindowConfig& wcfg,
                        const PanelChains& chains = {});

} // namespace parkcast
