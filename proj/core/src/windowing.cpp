#include "parkcast/windowing.hpp"

#include <algorithm>
#include <cmath>

#include "parkcast/error.hpp"
#include "parkcast/rng.hpp"

namespace parkcast {

WindowPlan window_and_split(const TimeGrid& grid, const WindowConfig& cfg) {
    if (cfg.window == 0 || cfg.horizon == 0) throw ConfigError("window and horizon must be positive");
    if (cfg.train_frac < 0.0 || cfg.train_frac > 1.0) {
        throw ConfigError("train_frac must lie in [0, 1]");
    }

    WindowPlan plan;
    const std::size_t span = cfg.window + cfg.horizon;  // target = t0 + span
    std::vector<std::size_t> usable;
    for (std::size_t d = 0; d < grid.days.size(); ++d) {
        if (grid.days[d].count <= span) {
            plan.warnings.push_back("day " + format_iso_minutes(grid.days[d].midnight) +
                                    " too short for window+horizon, skipped");
            continue;
        }
        usable.push_back(d);
    }

    std::vector<std::size_t> order = usable;
    Rng rng(cfg.seed);
    rng.shuffle(order);
    const std::size_t n_train = static_cast<std::size_t>(
        std::llround(cfg.train_frac * static_cast<double>(order.size())));
    plan.train_days.assign(order.begin(), order.begin() + n_train);
    plan.test_days.assign(order.begin() + n_train, order.end());
    std::sort(plan.train_days.begin(), plan.train_days.end());
    std::sort(plan.test_days.begin(), plan.test_days.end());

    auto emit = [&](const std::vector<std::size_t>& days, std::vector<SampleIndex>& out) {
        for (std::size_t d : days) {
            const DaySpan& day = grid.days[d];
            for (std::size_t off = 0; off + span < day.count; ++off) {
                SampleIndex s;
                s.day = d;
                s.t0 = day.first + off;
                s.target = s.t0 + span;
                out.push_back(s);
            }
        }
    };
    emit(plan.train_days, plan.train);
    emit(plan.test_days, plan.test);
    return plan;
}

} // namespace parkcast
