#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "parkcast/timegrid.hpp"

namespace parkcast {

// One forecasting sample: inputs are the window stamps starting at t0, the
// target is the stamp at t0 + window + horizon. Both lie inside one day.
struct SampleIndex {
    std::size_t day = 0;     // index into grid.days
    std::size_t t0 = 0;      // global grid index of the window start
    std::size_t target = 0;  // global grid index of the predicted stamp
};

struct WindowConfig {
    std::size_t window = 24;
    std::size_t horizon = 3;
    double train_frac = 0.8;
    std::uint64_t seed = 0;
};

// Whole days go to train or test; samples never cross a day boundary.
struct WindowPlan {
    std::vector<std::size_t> train_days, test_days;  // ascending day indices
    std::vector<SampleIndex> train, test;            // day order, then t0 order
    std::vector<std::string> warnings;               // skipped short days
};

// Enumerates every in-day sample, then assigns round(train_frac * usable
// days) whole days to the training set by a seeded shuffle. A 66-stamp day
// with window 24 and horizon 3 yields 39 samples.
WindowPlan window_and_split(const TimeGrid& grid, const WindowConfig& cfg);

} // namespace parkcast
