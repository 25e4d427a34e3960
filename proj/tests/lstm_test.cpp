#include "parkcast/lstm.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "parkcast/gradcheck.hpp"
#include "parkcast/rng.hpp"

using namespace parkcast;

namespace {

void randomize(ParamStore& store, std::uint64_t seed, double scale = 0.4) {
    Rng rng(seed);
    for (ParamTensor* p : store.all()) {
        for (double& v : p->value.flat()) v = rng.normal(0.0, scale);
    }
}

std::vector<Value> input_steps(Tape& tape, std::size_t t, std::size_t n, std::size_t d, Rng& rng) {
    std::vector<Value> xs;
    for (std::size_t s = 0; s < t; ++s) {
        Tensor x({n, d});
        for (double& v : x.flat()) v = rng.normal();
        xs.push_back(tape.input(std::move(x)));
    }
    return xs;
}

} // namespace

TEST(LstmParams, CreateRegistersTwelveTensorsWithForgetBiasOne) {
    ParamStore store;
    LstmParams p = LstmParams::create(store, "enc", 3, 5);
    EXPECT_EQ(store.count(), 12u);
    EXPECT_EQ(p.input_dim(), 3u);
    EXPECT_EQ(p.hidden_dim(), 5u);
    p.validate();
    Rng rng(2);
    store.init(rng);
    for (double v : p.b_f->value.flat()) EXPECT_EQ(v, 1.0);
    for (double v : p.b_i->value.flat()) EXPECT_EQ(v, 0.0);
}

TEST(LstmCell, ZeroParamsZeroStateGivesZeroOutput) {
    ParamStore store;
    LstmParams p = LstmParams::create(store, "z", 2, 3);
    Tape tape;
    LstmStateVal st{tape.input(Tensor({1, 3})), tape.input(Tensor({1, 3}))};
    LstmStateVal out = lstm_cell_step(tape, tape.input(Tensor({1, 2}, {0.7, -0.3})), st, p);
    for (double v : tape.val(out.h).flat()) EXPECT_EQ(v, 0.0);
    for (double v : tape.val(out.c).flat()) EXPECT_EQ(v, 0.0);
}

TEST(LstmCell, HalfGatesOnUnitCellState) {
    // Zero parameters halve the previous cell state: c = 0.5*1, and
    // h = 0.5*tanh(0.5) ~ 0.2311.
    ParamStore store;
    LstmParams p = LstmParams::create(store, "z", 2, 4);
    Tape tape;
    LstmStateVal st{tape.input(Tensor({1, 4})), tape.input(Tensor::full({1, 4}, 1.0))};
    LstmStateVal out = lstm_cell_step(tape, tape.input(Tensor({1, 2})), st, p);
    for (double v : tape.val(out.c).flat()) EXPECT_DOUBLE_EQ(v, 0.5);
    for (double v : tape.val(out.h).flat()) EXPECT_NEAR(v, 0.5 * std::tanh(0.5), 1e-12);
}

TEST(LstmCell, SaturatedForgetGatePreservesCellState) {
    ParamStore store;
    LstmParams p = LstmParams::create(store, "z", 2, 3);
    for (double& v : p.b_f->value.flat()) v = 20.0;
    Tape tape;
    Tensor prev_c({1, 3}, {0.8, -1.4, 2.2});
    LstmStateVal st{tape.input(Tensor({1, 3})), tape.input(prev_c)};
    LstmStateVal out = lstm_cell_step(tape, tape.input(Tensor({1, 2})), st, p);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(tape.val(out.c)[i], prev_c[i], 1e-8);
    }
}

TEST(LstmCell, GateRangesAndBoundedHidden) {
    ParamStore store;
    LstmParams p = LstmParams::create(store, "r", 3, 6);
    randomize(store, 77, 1.5);
    Rng rng(5);
    Tape tape;
    LstmStateVal st{tape.input(Tensor({4, 6})), tape.input(Tensor({4, 6}))};
    for (int step = 0; step < 10; ++step) {
        Tensor x({4, 3});
        for (double& v : x.flat()) v = rng.normal(0.0, 2.0);
        st = lstm_cell_step(tape, tape.input(std::move(x)), st, p);
        for (double v : tape.val(st.h).flat()) {
            EXPECT_GT(v, -1.0);
            EXPECT_LT(v, 1.0);
        }
        EXPECT_TRUE(tape.val(st.c).all_finite());
    }
}

TEST(LstmCell, DimensionMismatchThrows) {
    ParamStore store;
    LstmParams p = LstmParams::create(store, "m", 3, 4);
    Tape tape;
    LstmStateVal st{tape.input(Tensor({1, 4})), tape.input(Tensor({1, 4}))};
    EXPECT_THROW(lstm_cell_step(tape, tape.input(Tensor({1, 5})), st, p), ShapeError);
}

TEST(LstmSeq, SingleStepEqualsCellStep) {
    ParamStore store;
    LstmParams p = LstmParams::create(store, "s", 2, 3);
    randomize(store, 9);
    Tensor x({2, 2}, {0.1, -0.2, 0.4, 0.9});

    Tape t1;
    Value seq_out = lstm_seq_to_one(t1, {t1.input(x)}, p);
    Tape t2;
    LstmStateVal st{t2.input(Tensor({2, 3})), t2.input(Tensor({2, 3}))};
    LstmStateVal cell_out = lstm_cell_step(t2, t2.input(x), st, p);
    for (std::size_t i = 0; i < 6; ++i) {
        EXPECT_DOUBLE_EQ(t1.val(seq_out)[i], t2.val(cell_out.h)[i]);
    }
}

TEST(LstmSeq, EmptySequenceThrows) {
    ParamStore store;
    LstmParams p = LstmParams::create(store, "s", 2, 3);
    Tape tape;
    EXPECT_THROW(lstm_seq_to_one(tape, {}, p), ShapeError);
}

TEST(LstmSeq, ZeroParamsConstantInputStaysZero) {
    ParamStore store;
    LstmParams p = LstmParams::create(store, "s", 2, 3);
    Tape tape;
    std::vector<Value> xs(6, tape.input(Tensor::full({3, 2}, 0.37)));
    Value h = lstm_seq_to_one(tape, xs, p);
    for (double v : tape.val(h).flat()) EXPECT_EQ(v, 0.0);
}

TEST(LstmSeq, GradientCheckAcrossUnroll) {
    ParamStore store;
    LstmParams p = LstmParams::create(store, "g", 2, 3);
    randomize(store, 123);
    Rng rng(55);
    std::vector<Tensor> inputs;
    for (int s = 0; s < 5; ++s) {
        Tensor x({2, 2});
        for (double& v : x.flat()) v = rng.normal();
        inputs.push_back(std::move(x));
    }
    Tensor target({2, 3});
    for (double& v : target.flat()) v = rng.normal();

    auto loss_fn = [&](bool with_grad) {
        Tape tape;
        std::vector<Value> xs;
        for (const Tensor& x : inputs) xs.push_back(tape.input(x));
        Value h = lstm_seq_to_one(tape, xs, p);
        Value loss = tape.mean_squared_error(h, target);
        const double l = tape.scalar(loss);
        if (with_grad) tape.backward(loss);
        return l;
    };
    EXPECT_LT(check_gradient(loss_fn, store), 1e-4);
}

TEST(StackedLstm, SingleLayerEqualsSeqToOne) {
    ParamStore store;
    LstmParams p = LstmParams::create(store, "l0", 2, 4);
    randomize(store, 31);
    Rng rng(7);
    Tape tape;
    std::vector<Value> xs = input_steps(tape, 5, 3, 2, rng);
    Value a = stacked_lstm(tape, xs, {p}, 0.0, nullptr, false);
    Value b = lstm_seq_to_one(tape, xs, p);
    for (std::size_t i = 0; i < tape.val(a).size(); ++i) {
        EXPECT_DOUBLE_EQ(tape.val(a)[i], tape.val(b)[i]);
    }
}

TEST(StackedLstm, ZeroDropoutTrainEqualsEval) {
    ParamStore store;
    std::vector<LstmParams> layers{LstmParams::create(store, "l0", 2, 5),
                                   LstmParams::create(store, "l1", 5, 3)};
    randomize(store, 131);
    Rng data_rng(17);
    Tape t1, t2;
    Rng drop(3);
    std::vector<Value> xs1 = input_steps(t1, 4, 2, 2, data_rng);
    Value train_out = stacked_lstm(t1, xs1, layers, 0.0, &drop, true);
    Rng data_rng2(17);
    std::vector<Value> xs2 = input_steps(t2, 4, 2, 2, data_rng2);
    Value eval_out = stacked_lstm(t2, xs2, layers, 0.0, nullptr, false);
    for (std::size_t i = 0; i < t1.val(train_out).size(); ++i) {
        EXPECT_DOUBLE_EQ(t1.val(train_out)[i], t2.val(eval_out)[i]);
    }
}

TEST(StackedLstm, BrokenDimChainThrows) {
    ParamStore store;
    std::vector<LstmParams> layers{LstmParams::create(store, "l0", 2, 5),
                                   LstmParams::create(store, "l1", 4, 3)};  // expects 4, gets 5
    Tape tape;
    Rng rng(1);
    std::vector<Value> xs = input_steps(tape, 3, 2, 2, rng);
    EXPECT_THROW(stacked_lstm(tape, xs, layers, 0.0, nullptr, false), ShapeError);
}

TEST(StackedLstm, TwoLayerGradientCheck) {
    ParamStore store;
    std::vector<LstmParams> layers{LstmParams::create(store, "l0", 2, 8),
                                   LstmParams::create(store, "l1", 8, 4)};
    randomize(store, 999);
    Rng rng(21);
    std::vector<Tensor> inputs;
    for (int s = 0; s < 4; ++s) {
        Tensor x({2, 2});
        for (double& v : x.flat()) v = rng.normal();
        inputs.push_back(std::move(x));
    }
    Tensor target({2, 4});
    for (double& v : target.flat()) v = rng.normal();

    auto loss_fn = [&](bool with_grad) {
        Tape tape;
        std::vector<Value> xs;
        for (const Tensor& x : inputs) xs.push_back(tape.input(x));
        Value h = stacked_lstm(tape, xs, layers, 0.0, nullptr, false);
        Value loss = tape.mean_squared_error(h, target);
        const double l = tape.scalar(loss);
        if (with_grad) tape.backward(loss);
        return l;
    };
    EXPECT_LT(check_gradient(loss_fn, store), 1e-4);
}

TEST(StackedLstm, TimeShiftWithZeroParamsLeavesOutputZero) {
    ParamStore store;
    LstmParams p = LstmParams::create(store, "t", 2, 3);
    Tape tape;
    std::vector<Value> shifted;
    for (int s = 0; s < 3; ++s) shifted.push_back(tape.input(Tensor({2, 2})));
    Rng rng(40);
    std::vector<Value> tail = input_steps(tape, 4, 2, 2, rng);
    shifted.insert(shifted.end(), tail.begin(), tail.end());
    Value with_prefix = lstm_seq_to_one(tape, shifted, p);
    Value without = lstm_seq_to_one(tape, tail, p);
    for (std::size_t i = 0; i < tape.val(with_prefix).size(); ++i) {
        EXPECT_EQ(tape.val(with_prefix)[i], 0.0);
        EXPECT_EQ(tape.val(without)[i], 0.0);
    }
}
