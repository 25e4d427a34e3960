#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "parkcast/tensor.hpp"

namespace parkcast {

// Nearest-rank 95th percentile: the ceil(0.95 n)-th order statistic, floored
// at 1 so it can serve as a division reference.
double q95_capacity(const std::vector<double>& series);

// Per-column q95 over the rows of a {T, V} panel.
std::vector<double> column_q95(const Tensor& panel);

// Mean |error| over every (row, block) entry.
double mae(const Tensor& pred, const Tensor& truth);

// Mean |error| / capacity[block]; capacities must be positive, one per column.
double mape(const Tensor& pred, const Tensor& truth, const std::vector<double>& capacities);

struct BlockMetrics {
    std::string block_id;
    double mae = 0;
    double mape = 0;  // fraction, not percent
    double q95_capacity = 0;
};

struct PredictionReport {
    std::string model_label;
    double overall_mae = 0;
    double overall_mape = 0;
    double block_mape_stddev = 0;  // spread of per-block MAPE
    std::vector<BlockMetrics> blocks;
    std::uint64_t seed = 0;
    std::string config_hash;

    nlohmann::json to_json() const;
    static PredictionReport from_json(const nlohmann::json& j);
};

// Full report from aligned {N, V} predictions and truths in vehicle counts.
PredictionReport make_report(const std::string& label, const Tensor& pred, const Tensor& truth,
                             const std::vector<std::string>& block_ids,
                             const std::vector<double>& capacities);

} // namespace parkcast
