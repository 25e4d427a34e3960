#include "parkcast/lstm.hpp"

namespace parkcast {

LstmParams LstmParams::create(ParamStore& store, const std::string& prefix, std::size_t input_dim,
                              std::size_t hidden_dim) {
    if (input_dim == 0 || hidden_dim == 0) {
        throw ConfigError("LstmParams::create: zero dimension for '" + prefix + "'");
    }
    using Kind = ParamTensor::Kind;
    LstmParams p;
    p.w_f = &store.add(prefix + ".w_f", {input_dim, hidden_dim});
    p.w_i = &store.add(prefix + ".w_i", {input_dim, hidden_dim});
    p.w_o = &store.add(prefix + ".w_o", {input_dim, hidden_dim});
    p.w_c = &store.add(prefix + ".w_c", {input_dim, hidden_dim});
    p.u_f = &store.add(prefix + ".u_f", {hidden_dim, hidden_dim});
    p.u_i = &store.add(prefix + ".u_i", {hidden_dim, hidden_dim});
    p.u_o = &store.add(prefix + ".u_o", {hidden_dim, hidden_dim});
    p.u_c = &store.add(prefix + ".u_c", {hidden_dim, hidden_dim});
    p.b_f = &store.add(prefix + ".b_f", {hidden_dim}, Kind::kForgetBias);
    p.b_i = &store.add(prefix + ".b_i", {hidden_dim}, Kind::kBias);
    p.b_o = &store.add(prefix + ".b_o", {hidden_dim}, Kind::kBias);
    p.b_c = &store.add(prefix + ".b_c", {hidden_dim}, Kind::kBias);
    return p;
}

std::size_t LstmParams::input_dim() const {
    if (!w_f) throw Error("LstmParams: uninitialized");
    return w_f->value.rows();
}

std::size_t LstmParams::hidden_dim() const {
    if (!w_f) throw Error("LstmParams: uninitialized");
    return w_f->value.cols();
}

void LstmParams::validate() const {
    const ParamTensor* all[12] = {w_f, w_i, w_o, w_c, u_f, u_i, u_o, u_c, b_f, b_i, b_o, b_c};
    for (const ParamTensor* p : all) {
        if (!p) throw Error("LstmParams: missing tensor");
    }
    const std::size_t d = input_dim(), h = hidden_dim();
    auto expect = [](const ParamTensor* p, Shape s) {
        if (p->value.shape() != s) {
            throw ShapeError("LstmParams: '" + p->name + "' has shape " +
                             shape_str(p->value.shape()) + ", expected " + shape_str(s));
        }
    };
    for (const ParamTensor* p : {w_f, w_i, w_o, w_c}) expect(p, {d, h});
    for (const ParamTensor* p : {u_f, u_i, u_o, u_c}) expect(p, {h, h});
    for (const ParamTensor* p : {b_f, b_i, b_o, b_c}) expect(p, {h});
}

namespace {

// Per-gate input projections x W_g, computed up front so a whole sequence can
// share four tall products instead of 4T thin ones.
struct GateInputs {
    Value f, i, o, c;
};

GateInputs project_inputs(Tape& t, Value x, const LstmParams& p) {
    return GateInputs{t.matmul(x, t.param(*p.w_f)), t.matmul(x, t.param(*p.w_i)),
                      t.matmul(x, t.param(*p.w_o)), t.matmul(x, t.param(*p.w_c))};
}

Value gate_pre(Tape& t, Value xw, Value h, ParamTensor& u, ParamTensor& b) {
    return t.add_rowvec(t.add(xw, t.matmul(h, t.param(u))), t.param(b));
}

LstmStateVal cell_from_projections(Tape& tape, const GateInputs& xw, LstmStateVal prev,
                                   const LstmParams& p) {
    Value f = tape.sigmoid(gate_pre(tape, xw.f, prev.h, *p.u_f, *p.b_f));
    Value i = tape.sigmoid(gate_pre(tape, xw.i, prev.h, *p.u_i, *p.b_i));
    Value o = tape.sigmoid(gate_pre(tape, xw.o, prev.h, *p.u_o, *p.b_o));
    Value cand = tape.tanh(gate_pre(tape, xw.c, prev.h, *p.u_c, *p.b_c));
    Value c = tape.add(tape.mul(f, prev.c), tape.mul(i, cand));
    Value h = tape.mul(o, tape.tanh(c));
    return LstmStateVal{h, c};
}

void check_input_cols(const Tensor& x, const LstmParams& p, const char* where) {
    require_rank(x, 2, where);
    if (x.cols() != p.input_dim()) {
        throw ShapeError(std::string(where) + ": input has " + std::to_string(x.cols()) +
                         " features, layer expects " + std::to_string(p.input_dim()));
    }
}

} // namespace

LstmStateVal lstm_cell_step(Tape& tape, Value x_t, LstmStateVal prev, const LstmParams& p) {
    p.validate();
    check_input_cols(tape.val(x_t), p, "lstm_cell_step");
    return cell_from_projections(tape, project_inputs(tape, x_t, p), prev, p);
}

std::vector<Value> lstm_all_steps(Tape& tape, Value x_all, std::size_t steps, const LstmParams& p) {
    p.validate();
    if (steps == 0) throw ShapeError("lstm: empty input sequence");
    const Tensor& x = tape.val(x_all);
    check_input_cols(x, p, "lstm_all_steps");
    if (x.rows() % steps != 0) {
        throw ShapeError("lstm_all_steps: " + std::to_string(x.rows()) +
                         " packed rows not divisible by " + std::to_string(steps) + " steps");
    }
    const std::size_t n = x.rows() / steps;
    GateInputs xw = project_inputs(tape, x_all, p);
    LstmStateVal state{tape.input(Tensor({n, p.hidden_dim()})),
                       tape.input(Tensor({n, p.hidden_dim()}))};
    std::vector<Value> hs;
    hs.reserve(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        GateInputs step{tape.slice_rows(xw.f, t * n, n), tape.slice_rows(xw.i, t * n, n),
                        tape.slice_rows(xw.o, t * n, n), tape.slice_rows(xw.c, t * n, n)};
        state = cell_from_projections(tape, step, state, p);
        hs.push_back(state.h);
    }
    return hs;
}

std::vector<Value> lstm_all_steps(Tape& tape, const std::vector<Value>& xs, const LstmParams& p) {
    if (xs.empty()) throw ShapeError("lstm: empty input sequence");
    const std::size_t n = tape.val(xs[0]).rows();
    for (Value x : xs) {
        if (tape.val(x).rows() != n) {
            throw ShapeError("lstm: inconsistent batch size across time steps");
        }
    }
    return lstm_all_steps(tape, tape.concat_rows(xs), xs.size(), p);
}

Value lstm_seq_to_one(Tape& tape, const std::vector<Value>& xs, const LstmParams& p) {
    return lstm_all_steps(tape, xs, p).back();
}

Value lstm_seq_to_one(Tape& tape, Value x_all, std::size_t steps, const LstmParams& p) {
    return lstm_all_steps(tape, x_all, steps, p).back();
}

Value stacked_lstm(Tape& tape, Value x_all, std::size_t steps, const std::vector<LstmParams>& layers,
                   double dropout_rate, Rng* rng, bool training) {
    if (layers.empty()) throw ConfigError("stacked_lstm: no layers");
    if (training && dropout_rate > 0.0 && !rng) {
        throw ConfigError("stacked_lstm: dropout in training mode needs an rng");
    }
    Value seq = x_all;
    for (std::size_t k = 0; k < layers.size(); ++k) {
        std::vector<Value> hs = lstm_all_steps(tape, seq, steps, layers[k]);
        if (k + 1 == layers.size()) return hs.back();
        seq = tape.concat_rows(hs);
        if (training && dropout_rate > 0.0) {
            seq = tape.dropout(seq, dropout_rate, *rng, true);
        }
    }
    throw Error("stacked_lstm: unreachable");
}

Value stacked_lstm(Tape& tape, const std::vector<Value>& xs, const std::vector<LstmParams>& layers,
                   double dropout_rate, Rng* rng, bool training) {
    if (xs.empty()) throw ShapeError("lstm: empty input sequence");
    const std::size_t n = tape.val(xs[0]).rows();
    for (Value x : xs) {
        if (tape.val(x).rows() != n) {
            throw ShapeError("lstm: inconsistent batch size across time steps");
        }
    }
    return stacked_lstm(tape, tape.concat_rows(xs), xs.size(), layers, dropout_rate, rng, training);
}

} // namespace parkcast
