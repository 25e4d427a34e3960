#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "parkcast/rng.hpp"
#include "parkcast/tensor.hpp"

namespace parkcast {

// Named trainable tensor plus its gradient accumulator.
struct ParamTensor {
    enum class Kind { kWeight, kBias, kForgetBias };

    std::string name;
    Kind kind = Kind::kWeight;
    Tensor value;
    Tensor grad;
};

// Registry of trainable parameters. Iteration order is insertion order, which
// the optimizer and the checkpoint format both rely on.
class ParamStore {
public:
    ParamTensor& add(const std::string& name, Shape shape,
                     ParamTensor::Kind kind = ParamTensor::Kind::kWeight);

    bool contains(const std::string& name) const { return index_.count(name) != 0; }
    ParamTensor& get(const std::string& name);
    const ParamTensor& get(const std::string& name) const;

    std::size_t count() const { return items_.size(); }
    std::size_t parameter_count() const;

    void zero_grads();

    std::vector<ParamTensor*> all();
    std::vector<const ParamTensor*> all() const;

    // Glorot uniform on weights: U[-b, b], b = sqrt(6 / (fan_in + fan_out)).
    // For a rank-3 (K, in, out) filter bank fan_in = K*in. Plain biases start
    // at zero, forget-gate biases at one.
    void init(Rng& rng);

private:
    std::vector<std::unique_ptr<ParamTensor>> items_;
    std::unordered_map<std::string, std::size_t> index_;
};

} // namespace parkcast
