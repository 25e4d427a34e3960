#pragma once

#include <cstddef>
#include <functional>
#include <unordered_map>
#include <vector>

#include "parkcast/activation.hpp"
#include "parkcast/params.hpp"
#include "parkcast/rng.hpp"
#include "parkcast/tensor.hpp"

namespace parkcast {

// Handle to a node on a Tape. Only meaningful for the tape that produced it.
struct Value {
    std::size_t idx = static_cast<std::size_t>(-1);
    bool valid() const { return idx != static_cast<std::size_t>(-1); }
};

// Define-by-run reverse-mode tape. Ops record the forward value and a closure
// that scatters the node's cotangent to its inputs; backward() walks nodes in
// reverse creation order, which is a valid topological order by construction.
// Gradients of parameter leaves accumulate into ParamTensor::grad.
class Tape {
public:
    using BackwardFn = std::function<void(Tape&, std::size_t self)>;

    Value input(Tensor t);
    // Registers a trainable leaf; calling twice with the same ParamTensor
    // returns the same node, so shared parameters accumulate naturally.
    Value param(ParamTensor& p);

    const Tensor& val(Value v) const;
    double scalar(Value v) const;

    Value add(Value a, Value b);
    Value sub(Value a, Value b);
    Value mul(Value a, Value b);                  // elementwise
    Value scale(Value a, double s);
    Value matmul(Value a, Value b);
    Value add_rowvec(Value m, Value row);         // (N,C) plus length-C bias row
    Value sigmoid(Value a);
    Value tanh(Value a);
    Value relu(Value a);
    Value apply(Value a, Activation act);
    Value concat_cols(const std::vector<Value>& parts);
    Value concat_rows(const std::vector<Value>& parts);
    Value slice_rows(Value a, std::size_t row0, std::size_t rows);
    Value reshape(Value a, Shape shape);
    // Inverted dropout; identity when not training or rate is zero.
    Value dropout(Value a, double rate, Rng& rng, bool training);
    Value sum(Value a);
    Value mean_squared_error(Value pred, const Tensor& target);

    // Escape hatch for fused ops (the graph filter uses it): caller provides
    // the forward value and the full backward closure.
    Value custom(Tensor value, std::vector<Value> inputs, BackwardFn backward);

    void backward(Value root);

    std::size_t node_count() const { return nodes_.size(); }

    // Backward-pass plumbing, public for fused-op closures.
    const Tensor& node_value(std::size_t idx) const { return nodes_[idx].value; }
    const Tensor& cotangent(std::size_t idx) const;
    void accumulate(std::size_t idx, const Tensor& g);
    // Row-block variant: grads_[idx] rows [row0, row0+g.rows()) += g.
    void accumulate_rows(std::size_t idx, std::size_t row0, const Tensor& g);
    // grads_[idx] += A*B variants without temporaries.
    void accumulate_gemm(std::size_t idx, const Tensor& a, const Tensor& b);
    void accumulate_gemm_tn(std::size_t idx, const Tensor& a, const Tensor& b);
    void accumulate_gemm_nt(std::size_t idx, const Tensor& a, const Tensor& b);

private:
    struct Node {
        Tensor value;
        ParamTensor* leaf = nullptr;
        BackwardFn backward;
    };

    Value push(Tensor value, BackwardFn backward);
    Tensor& grad_slot(std::size_t idx);

    std::vector<Node> nodes_;
    std::vector<Tensor> grads_;
    std::unordered_map<const ParamTensor*, std::size_t> param_nodes_;
};

} // namespace parkcast
