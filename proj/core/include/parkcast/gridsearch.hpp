#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "parkcast/trainer.hpp"

namespace parkcast {

// Axis name is a dotted path into {"model": ..., "train": ...}, e.g.
// "train.learning_rate" or "model.sources.0.dropout"; numeric segments index
// arrays. Each value list is tried in the cartesian product.
using GridAxes = std::map<std::string, std::vector<nlohmann::json>>;

struct GridResult {
    std::map<std::string, nlohmann::json> overrides;
    std::size_t combo_index = 0;  // position in the cartesian enumeration
    double best_test_mse = 0;
    std::size_t best_epoch = 0;
};

// Applies one dotted-path override in place. Throws ConfigError on a path that
// does not resolve.
void apply_override(nlohmann::json& root, const std::string& path, const nlohmann::json& value);

// Trains every axis combination with the epoch budget min(epoch_budget,
// cfg.max_epochs) and an independent seed derived from cfg.seed and the combo
// index, then ranks ascending by best test MSE (ties keep enumeration order).
// Empty axes map means a single unmodified combination.
std::vector<GridResult> grid_search(const ModelSpec& spec, const ScaledLaplacian& graph,
                                    const Dataset& data, const TrainConfig& cfg,
                                    const GridAxes& axes, std::size_t epoch_budget,
                                    std::ostream* log = nullptr);

} // namespace parkcast
