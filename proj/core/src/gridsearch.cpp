#include "parkcast/gridsearch.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

#include "parkcast/error.hpp"

namespace parkcast {

namespace {

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> out;
    std::istringstream ss(path);
    std::string seg;
    while (std::getline(ss, seg, '.')) {
        if (seg.empty()) throw ConfigError("grid axis path has empty segment: " + path);
        out.push_back(seg);
    }
    if (out.empty()) throw ConfigError("grid axis path is empty");
    return out;
}

bool is_index(const std::string& seg) {
    return !seg.empty() && std::all_of(seg.begin(), seg.end(), [](char c) {
        return c >= '0' && c <= '9';
    });
}

} // namespace

void apply_override(nlohmann::json& root, const std::string& path, const nlohmann::json& value) {
    const std::vector<std::string> segs = split_path(path);
    nlohmann::json* at = &root;
    for (const std::string& seg : segs) {
        if (at->is_array()) {
            if (!is_index(seg)) throw ConfigError("grid axis " + path + ": expected array index at '" + seg + "'");
            const std::size_t i = std::stoul(seg);
            if (i >= at->size()) throw ConfigError("grid axis " + path + ": index " + seg + " out of range");
            at = &(*at)[i];
        } else if (at->is_object()) {
            if (!at->contains(seg)) throw ConfigError("grid axis " + path + ": no field '" + seg + "'");
            at = &(*at)[seg];
        } else {
            throw ConfigError("grid axis " + path + ": '" + seg + "' descends into a scalar");
        }
    }
    *at = value;
}

std::vector<GridResult> grid_search(const ModelSpec& spec, const ScaledLaplacian& graph,
                                    const Dataset& data, const TrainConfig& cfg,
                                    const GridAxes& axes, std::size_t epoch_budget,
                                    std::ostream* log) {
    cfg.validate();
    if (epoch_budget == 0) throw ConfigError("grid_search: epoch budget must be positive");
    for (const auto& [name, values] : axes) {
        if (values.empty()) throw ConfigError("grid_search: axis '" + name + "' is empty");
    }

    std::size_t combos = 1;
    for (const auto& [name, values] : axes) combos *= values.size();

    const nlohmann::json base = {{"model", spec.to_json()}, {"train", cfg.to_json()}};
    const Rng seed_root(cfg.seed);

    std::vector<GridResult> results;
    for (std::size_t c = 0; c < combos; ++c) {
        GridResult r;
        r.combo_index = c;

        // Row-major over axes in map (sorted-name) order.
        nlohmann::json combined = base;
        std::size_t rem = c;
        for (const auto& [name, values] : axes) {
            const std::size_t pick = rem % values.size();
            rem /= values.size();
            apply_override(combined, name, values[pick]);
            r.overrides[name] = values[pick];
        }

        const ModelSpec combo_spec = ModelSpec::from_json(combined["model"]);
        TrainConfig combo_cfg = TrainConfig::from_json(combined["train"]);
        combo_cfg.max_epochs = std::min(epoch_budget, combo_cfg.max_epochs);
        combo_cfg.seed = seed_root.fork(c).next_u64();

        if (log) {
            (*log) << "combo " << c << "/" << combos;
            for (const auto& [name, v] : r.overrides) (*log) << " " << name << "=" << v.dump();
            (*log) << "\n";
        }

        Model model(combo_spec, graph);
        const TrainResult tr = train_model(model, data, combo_cfg, nullptr);
        r.best_test_mse = tr.best_test_mse;
        r.best_epoch = tr.best_epoch;
        results.push_back(std::move(r));
    }

    std::stable_sort(results.begin(), results.end(), [](const GridResult& a, const GridResult& b) {
        return a.best_test_mse < b.best_test_mse;
    });
    return results;
}

} // namespace parkcast
