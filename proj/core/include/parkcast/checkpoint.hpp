#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "parkcast/params.hpp"
#include "parkcast/tensor.hpp"

namespace parkcast {

// Versioned binary snapshot: a JSON metadata blob plus named tensors written
// as raw IEEE-754 bit patterns, so save/load round-trips are bit-exact.
struct Checkpoint {
    nlohmann::json meta;
    std::vector<std::pair<std::string, Tensor>> entries;

    const Tensor* find(const std::string& name) const;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// Entries for every parameter in store order.
void append_params(Checkpoint& ckpt, const ParamStore& params);
// Restores parameter values by name; shapes must match and every parameter in
// the store must be present.
void restore_params(const Checkpoint& ckpt, ParamStore& params);

} // namespace parkcast
