#pragma once

#include <string>
#include <vector>

#include "parkcast/params.hpp"
#include "parkcast/tape.hpp"

namespace parkcast {

// The twelve tensors of one LSTM layer, registered in a ParamStore.
// Gate order everywhere: forget, input, output, candidate.
struct LstmParams {
    ParamTensor* w_f = nullptr;  // D_in x H input weights
    ParamTensor* w_i = nullptr;
    ParamTensor* w_o = nullptr;
    ParamTensor* w_c = nullptr;
    ParamTensor* u_f = nullptr;  // H x H recurrent weights
    ParamTensor* u_i = nullptr;
    ParamTensor* u_o = nullptr;
    ParamTensor* u_c = nullptr;
    ParamTensor* b_f = nullptr;  // H biases; forget bias initializes to 1
    ParamTensor* b_i = nullptr;
    ParamTensor* b_o = nullptr;
    ParamTensor* b_c = nullptr;

    static LstmParams create(ParamStore& store, const std::string& prefix, std::size_t input_dim,
                             std::size_t hidden_dim);

    std::size_t input_dim() const;
    std::size_t hidden_dim() const;
    void validate() const;  // consistent H across all twelve tensors
};

struct LstmStateVal {
    Value h;
    Value c;
};

// One step of the gated cell:
//   f = sigmoid(x W_f + h U_f + b_f)      i = sigmoid(x W_i + h U_i + b_i)
//   o = sigmoid(x W_o + h U_o + b_o)      c~ = tanh(x W_c + h U_c + b_c)
//   c_t = f * c_{t-1} + i * c~            h_t = o * tanh(c_t)
// x_t is a batch (N x D_in); state tensors are N x H.
LstmStateVal lstm_cell_step(Tape& tape, Value x_t, LstmStateVal prev, const LstmParams& p);

// Runs the cell over the whole sequence from a zero state, returning every
// hidden step (for stacking).
std::vector<Value> lstm_all_steps(Tape& tape, const std::vector<Value>& xs, const LstmParams& p);

// Packed form: the T steps stacked along rows, row t*N + s for sample s at
// step t. The four input projections run as single (T*N)-row products before
// the recurrence, which only re-associates nothing: each output row is the
// same dot products either way.
std::vector<Value> lstm_all_steps(Tape& tape, Value x_all, std::size_t steps, const LstmParams& p);

// Final hidden state only (sequence-to-one encoder).
Value lstm_seq_to_one(Tape& tape, const std::vector<Value>& xs, const LstmParams& p);
Value lstm_seq_to_one(Tape& tape, Value x_all, std::size_t steps, const LstmParams& p);

// Stack of layers; layer k consumes the full hidden sequence of layer k-1,
// with inverted dropout between layers in training mode. The last layer is
// reduced sequence-to-one.
Value stacked_lstm(Tape& tape, const std::vector<Value>& xs, const std::vector<LstmParams>& layers,
                   double dropout_rate, Rng* rng, bool training);
Value stacked_lstm(Tape& tape, Value x_all, std::size_t steps, const std::vector<LstmParams>& layers,
                   double dropout_rate, Rng* rng, bool training);

} // namespace parkcast
