#include "parkcast/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "parkcast/error.hpp"

namespace parkcast {

double mse_loss(const Tensor& pred, const Tensor& target) {
    require_same_shape(pred, target, "mse_loss");
    if (pred.size() == 0) throw ShapeError("mse_loss: empty tensors");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        s += d * d;
    }
    return s / static_cast<double>(pred.size());
}

EarlyStopper::EarlyStopper(std::size_t patience) : patience_(patience) {
    if (patience == 0) throw ConfigError("EarlyStopper: patience must be at least 1");
}

bool EarlyStopper::update(double loss) {
    epoch_ += 1;
    if (loss < best_loss_) {
        best_loss_ = loss;
        best_epoch_ = epoch_;
        stale_ = 0;
        return false;
    }
    stale_ += 1;
    return stale_ >= patience_;
}

double dataset_mse(Model& model, const SplitData& split, std::size_t chunk) {
    if (split.count == 0) throw DataError("dataset_mse: empty split");
    if (chunk == 0) throw ConfigError("dataset_mse: chunk must be positive");
    double sse = 0.0;
    std::size_t entries = 0;
    for (std::size_t at = 0; at < split.count; at += chunk) {
        const std::size_t b = std::min(chunk, split.count - at);
        std::vector<std::size_t> idx(b);
        std::iota(idx.begin(), idx.end(), at);
        const BatchInputs batch = gather_inputs(model.spec(), split.inputs, split.count, idx);
        const Tensor pred = model.predict(batch);
        const Tensor target = gather_rows(split.targets, idx);
        require_same_shape(pred, target, "dataset_mse");
        for (std::size_t i = 0; i < pred.size(); ++i) {
            const double d = pred[i] - target[i];
            sse += d * d;
        }
        entries += pred.size();
    }
    return sse / static_cast<double>(entries);
}

namespace {

std::vector<Tensor> snapshot_params(const ParamStore& params) {
    std::vector<Tensor> out;
    for (const ParamTensor* p : params.all()) out.push_back(p->value);
    return out;
}

void restore_params(ParamStore& params, const std::vector<Tensor>& snap) {
    std::vector<ParamTensor*> all = params.all();
    for (std::size_t i = 0; i < all.size(); ++i) all[i]->value = snap[i];
}

} // namespace

TrainResult train_model(Model& model, const Dataset& data, const TrainConfig& cfg,
                        std::ostream* log, AdamState* adam_io, std::size_t epoch_offset,
                        bool reinit_params) {
    cfg.validate();
    if (data.train.count == 0 || data.test.count == 0) {
        throw DataError("train: empty dataset split (train " + std::to_string(data.train.count) +
                        ", test " + std::to_string(data.test.count) + ")");
    }
    if (data.train.targets.rank() != 2 ||
        data.train.targets.rows() != data.train.count ||
        data.test.targets.rows() != data.test.count) {
        throw DataError("train: targets misaligned with sample counts");
    }

    // Independent deterministic streams, all derived from cfg.seed.
    Rng root(cfg.seed);
    Rng init_rng = root.fork(1);
    Rng dropout_rng = root.fork(2);
    if (reinit_params) model.init_params(init_rng);

    AdamState local_state = AdamState::init(model.params());
    AdamState& state = adam_io && !adam_io->m.empty() ? *adam_io : local_state;
    if (state.m.size() != model.params().count()) {
        throw ConfigError("train: resumed Adam state does not match the model");
    }

    TrainResult result;
    EarlyStopper stopper(cfg.patience);
    std::vector<Tensor> best_snapshot = snapshot_params(model.params());
    std::vector<std::size_t> order(data.train.count);
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t e = 1; e <= cfg.max_epochs; ++e) {
        const std::size_t epoch_label = epoch_offset + e;
        Rng shuffle_rng = root.fork(1000 + epoch_label);
        shuffle_rng.shuffle(order);

        std::size_t seen = 0;
        try {
            for (std::size_t at = 0; at < order.size(); at += cfg.batch_size) {
                const std::size_t b = std::min(cfg.batch_size, order.size() - at);
                const std::vector<std::size_t> idx(order.begin() + at, order.begin() + at + b);
                const BatchInputs batch =
                    gather_inputs(model.spec(), data.train.inputs, data.train.count, idx);
                const Tensor target = gather_rows(data.train.targets, idx);

                Tape tape;
                Value pred = model.forward(tape, batch, RunMode::kTrain, &dropout_rng);
                Value loss = tape.mean_squared_error(pred, target);
                model.params().zero_grads();
                tape.backward(loss);
                adam_step(model.params(), state, cfg);
                result.adam_steps += 1;
                seen += b;
            }
        } catch (const DivergenceError& err) {
            throw DivergenceError("epoch " + std::to_string(epoch_label) + ": " + err.what());
        }
        result.samples_seen.push_back(seen);

        EpochRecord rec;
        rec.epoch = epoch_label;
        rec.train_mse = dataset_mse(model, data.train, cfg.batch_size);
        rec.test_mse = dataset_mse(model, data.test, cfg.batch_size);
        result.history.push_back(rec);
        if (log) {
            (*log) << "epoch " << rec.epoch << " train_mse " << rec.train_mse << " test_mse "
                   << rec.test_mse << "\n";
        }

        const double prev_best = stopper.best_loss();
        const bool stop = stopper.update(rec.test_mse);
        if (rec.test_mse < prev_best) best_snapshot = snapshot_params(model.params());
        if (stop) break;
    }

    restore_params(model.params(), best_snapshot);
    result.best_epoch = epoch_offset + stopper.best_epoch();
    result.best_test_mse = stopper.best_loss();
    if (adam_io && adam_io->m.empty()) *adam_io = std::move(local_state);
    return result;
}

void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history) {
    out << "epoch,train_mse,test_mse\n";
    out.precision(17);
    for (const EpochRecord& r : history) {
        out << r.epoch << "," << r.train_mse << "," << r.test_mse << "\n";
    }
}

std::vector<EpochRecord> read_history_csv(std::istream& in) {
    std::vector<EpochRecord> out;
    std::string line;
    if (!std::getline(in, line) || line != "epoch,train_mse,test_mse") {
        throw DataError("history csv: bad header");
    }
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        lineno += 1;
        if (line.empty()) continue;
        std::istringstream ss(line);
        EpochRecord r;
        char c1 = 0, c2 = 0;
        if (!(ss >> r.epoch >> c1 >> r.train_mse >> c2 >> r.test_mse) || c1 != ',' || c2 != ',') {
            throw DataError("history csv: bad row at line " + std::to_string(lineno));
        }
        out.push_back(r);
    }
    return out;
}

} // namespace parkcast
