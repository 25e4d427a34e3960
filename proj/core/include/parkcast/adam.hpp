#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "parkcast/params.hpp"

namespace parkcast {

struct TrainConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 1e-4;
    std::size_t max_epochs = 200;
    std::size_t patience = 5;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;

    void validate() const;  // ConfigError
    nlohmann::json to_json() const;
    static TrainConfig from_json(const nlohmann::json& j);
};

// Adam moments, parallel to the store's insertion order.
struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    std::size_t t = 0;

    static AdamState init(const ParamStore& params);
};

// One update over every parameter: decay folds into the gradient
// (g <- g + weight_decay * w), then standard bias-corrected Adam. Throws
// DivergenceError on a non-finite gradient.
void adam_step(ParamStore& params, AdamState& state, const TrainConfig& cfg);

} // namespace parkcast
