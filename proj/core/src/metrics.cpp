#include "parkcast/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "parkcast/error.hpp"

namespace parkcast {

double q95_capacity(const std::vector<double>& series) {
    if (series.empty()) throw DataError("q95_capacity: empty series");
    std::vector<double> sorted = series;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t rank = static_cast<std::size_t>(
        std::ceil(0.95 * static_cast<double>(sorted.size())));
    const double q = sorted[rank - 1];
    return std::max(q, 1.0);
}

std::vector<double> column_q95(const Tensor& panel) {
    if (panel.rank() != 2) throw ShapeError("column_q95: expected a rank-2 panel");
    std::vector<double> out(panel.cols());
    std::vector<double> col(panel.rows());
    for (std::size_t v = 0; v < panel.cols(); ++v) {
        for (std::size_t t = 0; t < panel.rows(); ++t) col[t] = panel.at(t, v);
        out[v] = q95_capacity(col);
    }
    return out;
}

double mae(const Tensor& pred, const Tensor& truth) {
    require_same_shape(pred, truth, "mae");
    if (pred.size() == 0) throw DataError("mae: empty tensors");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - truth[i]);
    return s / static_cast<double>(pred.size());
}

double mape(const Tensor& pred, const Tensor& truth, const std::vector<double>& capacities) {
    require_same_shape(pred, truth, "mape");
    if (pred.rank() != 2) throw ShapeError("mape: expected rank-2 tensors");
    if (pred.size() == 0) throw DataError("mape: empty tensors");
    if (capacities.size() != pred.cols()) {
        throw ShapeError("mape: need one capacity per block column");
    }
    for (double c : capacities) {
        if (c <= 0.0) throw DataError("mape: capacities must be positive");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < pred.rows(); ++i) {
        for (std::size_t v = 0; v < pred.cols(); ++v) {
            s += std::abs(pred.at(i, v) - truth.at(i, v)) / capacities[v];
        }
    }
    return s / static_cast<double>(pred.size());
}

PredictionReport make_report(const std::string& label, const Tensor& pred, const Tensor& truth,
                             const std::vector<std::string>& block_ids,
                             const std::vector<double>& capacities) {
    require_same_shape(pred, truth, "make_report");
    if (pred.rank() != 2) throw ShapeError("make_report: expected rank-2 tensors");
    if (block_ids.size() != pred.cols() || capacities.size() != pred.cols()) {
        throw ShapeError("make_report: block ids and capacities must match columns");
    }

    PredictionReport rep;
    rep.model_label = label;
    rep.overall_mae = mae(pred, truth);
    rep.overall_mape = mape(pred, truth, capacities);

    double mean_mape = 0.0;
    for (std::size_t v = 0; v < pred.cols(); ++v) {
        BlockMetrics bm;
        bm.block_id = block_ids[v];
        bm.q95_capacity = capacities[v];
        double abs_sum = 0.0;
        for (std::size_t i = 0; i < pred.rows(); ++i) abs_sum += std::abs(pred.at(i, v) - truth.at(i, v));
        bm.mae = abs_sum / static_cast<double>(pred.rows());
        bm.mape = bm.mae / capacities[v];
        mean_mape += bm.mape;
        rep.blocks.push_back(std::move(bm));
    }
    mean_mape /= static_cast<double>(pred.cols());
    double var = 0.0;
    for (const BlockMetrics& bm : rep.blocks) {
        const double d = bm.mape - mean_mape;
        var += d * d;
    }
    rep.block_mape_stddev = std::sqrt(var / static_cast<double>(pred.cols()));
    return rep;
}

nlohmann::json PredictionReport::to_json() const {
    nlohmann::json blocks_j = nlohmann::json::array();
    for (const BlockMetrics& b : blocks) {
        blocks_j.push_back({{"block_id", b.block_id},
                            {"mae", b.mae},
                            {"mape", b.mape},
                            {"q95_capacity", b.q95_capacity}});
    }
    return {{"model", model_label},
            {"overall_mae", overall_mae},
            {"overall_mape", overall_mape},
            {"block_mape_stddev", block_mape_stddev},
            {"blocks", blocks_j},
            {"seed", seed},
            {"config_hash", config_hash}};
}

PredictionReport PredictionReport::from_json(const nlohmann::json& j) {
    try {
        PredictionReport rep;
        rep.model_label = j.at("model").get<std::string>();
        rep.overall_mae = j.at("overall_mae").get<double>();
        rep.overall_mape = j.at("overall_mape").get<double>();
        rep.block_mape_stddev = j.value("block_mape_stddev", 0.0);
        for (const nlohmann::json& bj : j.at("blocks")) {
            BlockMetrics b;
            b.block_id = bj.at("block_id").get<std::string>();
            b.mae = bj.at("mae").get<double>();
            b.mape = bj.at("mape").get<double>();
            b.q95_capacity = bj.at("q95_capacity").get<double>();
            rep.blocks.push_back(std::move(b));
        }
        rep.seed = j.value("seed", std::uint64_t{0});
        rep.config_hash = j.value("config_hash", "");
        return rep;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("prediction report: ") + e.what());
    }
}

} // namespace parkcast
