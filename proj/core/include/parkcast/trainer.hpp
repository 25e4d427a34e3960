#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "parkcast/adam.hpp"
#include "parkcast/dataset.hpp"
#include "parkcast/model.hpp"

namespace parkcast {

// Mean over all N*V entries of squared error.
double mse_loss(const Tensor& pred, const Tensor& target);

// Stops when the monitored loss has not improved for `patience` consecutive
// updates. Epochs are 1-based in the order update() is called.
class EarlyStopper {
public:
    explicit EarlyStopper(std::size_t patience);

    bool update(double loss);  // true = stop now
    std::size_t best_epoch() const { return best_epoch_; }
    double best_loss() const { return best_loss_; }
    std::size_t epochs_seen() const { return epoch_; }

private:
    std::size_t patience_;
    std::size_t epoch_ = 0;
    std::size_t best_epoch_ = 0;
    double best_loss_ = std::numeric_limits<double>::infinity();
    std::size_t stale_ = 0;
};

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double train_mse = 0;
    double test_mse = 0;
};

struct TrainResult {
    std::vector<EpochRecord> history;
    std::vector<std::size_t> samples_seen;  // per epoch, always the train count
    std::size_t best_epoch = 0;
    double best_test_mse = std::numeric_limits<double>::infinity();
    std::size_t adam_steps = 0;
};

// Eval-mode MSE over a whole split, evaluated in chunks of at most chunk
// samples. Chunking only regroups the exact per-entry sum.
double dataset_mse(Model& model, const SplitData& split, std::size_t chunk);

// Epoch loop: seeded shuffle, minibatch Adam steps, then eval-mode train and
// test MSE for the history. Early-stops when test MSE has not improved for
// cfg.patience epochs and restores the best epoch's parameters.
//
// adam_io carries moments in (resume) and out (checkpointing); epoch_offset
// continues the epoch numbering of an earlier run; reinit_params=false keeps
// the model's current parameters instead of drawing fresh ones from cfg.seed.
TrainResult train_model(Model& model, const Dataset& data, const TrainConfig& cfg,
                        std::ostream* log = nullptr, AdamState* adam_io = nullptr,
                        std::size_t epoch_offset = 0, bool reinit_params = true);

// history CSV: header "epoch,train_mse,test_mse", one row per epoch.
void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history);
std::vector<EpochRecord> read_history_csv(std::istream& in);

} // namespace parkcast
