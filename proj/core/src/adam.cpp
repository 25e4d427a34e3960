#include "parkcast/adam.hpp"

#include <cmath>

#include "parkcast/error.hpp"

namespace parkcast {

void TrainConfig::validate() const {
    auto positive = [](double x, const char* name) {
        if (!(x > 0.0) || !std::isfinite(x)) {
            throw ConfigError(std::string("train config: ") + name + " must be positive");
        }
    };
    positive(learning_rate, "learning_rate");
    positive(beta1, "beta1");
    positive(beta2, "beta2");
    positive(epsilon, "epsilon");
    if (beta1 >= 1.0 || beta2 >= 1.0) throw ConfigError("train config: betas must be below 1");
    if (weight_decay < 0.0 || !std::isfinite(weight_decay)) {
        throw ConfigError("train config: weight_decay must be nonnegative");
    }
    if (max_epochs == 0) throw ConfigError("train config: max_epochs must be positive");
    if (patience == 0) throw ConfigError("train config: patience must be at least 1");
    if (batch_size == 0) throw ConfigError("train config: batch_size must be positive");
}

nlohmann::json TrainConfig::to_json() const {
    return {{"learning_rate", learning_rate},
            {"beta1", beta1},
            {"beta2", beta2},
            {"epsilon", epsilon},
            {"weight_decay", weight_decay},
            {"max_epochs", max_epochs},
            {"patience", patience},
            {"batch_size", batch_size},
            {"seed", seed}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
    TrainConfig cfg;
    try {
        cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
        cfg.beta1 = j.value("beta1", cfg.beta1);
        cfg.beta2 = j.value("beta2", cfg.beta2);
        cfg.epsilon = j.value("epsilon", cfg.epsilon);
        cfg.weight_decay = j.value("weight_decay", cfg.weight_decay);
        cfg.max_epochs = j.value("max_epochs", cfg.max_epochs);
        cfg.patience = j.value("patience", cfg.patience);
        cfg.batch_size = j.value("batch_size", cfg.batch_size);
        cfg.seed = j.value("seed", cfg.seed);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad train config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

AdamState AdamState::init(const ParamStore& params) {
    AdamState state;
    for (const ParamTensor* p : params.all()) {
        state.m.emplace_back(p->value.shape());
        state.v.emplace_back(p->value.shape());
    }
    return state;
}

void adam_step(ParamStore& params, AdamState& state, const TrainConfig& cfg) {
    std::vector<ParamTensor*> all = params.all();
    if (state.m.size() != all.size() || state.v.size() != all.size()) {
        throw ConfigError("adam_step: state tracks " + std::to_string(state.m.size()) +
                          " tensors, store has " + std::to_string(all.size()));
    }
    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < all.size(); ++i) {
        ParamTensor& p = *all[i];
        Tensor& m = state.m[i];
        Tensor& v = state.v[i];
        require_same_shape(p.value, m, "adam_step moments");
        for (std::size_t k = 0; k < p.value.size(); ++k) {
            const double g = p.grad[k] + cfg.weight_decay * p.value[k];
            if (!std::isfinite(g)) {
                throw DivergenceError("adam_step: non-finite gradient in '" + p.name + "'");
            }
            m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g;
            v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g * g;
            const double mhat = m[k] / bc1;
            const double vhat = v[k] / bc2;
            p.value[k] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
        }
    }
}

} // namespace parkcast
