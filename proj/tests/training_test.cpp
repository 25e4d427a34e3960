#include "parkcast/trainer.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "parkcast/gridsearch.hpp"

using namespace parkcast;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ScaledLaplacian pair_graph() {
    Tensor tt = Tensor::full({2, 2}, kInf);
    tt.at(0, 0) = 0.0;
    tt.at(1, 1) = 0.0;
    tt.at(0, 1) = 60.0;
    tt.at(1, 0) = 60.0;
    return scale_laplacian(build_weight_matrix(tt));
}

// Two-vertex model over one static feature source: affine pair with a ReLU
// between, then a linear decoder. Learns a linear target map quickly.
ModelSpec tiny_spec() {
    DataSourceSpec src;
    src.name = "static";
    src.schema = SourceSchema::kND;
    src.feature_dim = 3;
    src.fc_dims = {6, 6};

    ModelSpec spec;
    spec.vertex_count = 2;
    spec.window = 1;
    spec.horizon = 1;
    spec.decoder.hidden = 0;
    spec.sources = {src};
    spec.validate();
    return spec;
}

// Targets are a fixed linear map of the inputs plus a bias.
Dataset linear_dataset(std::size_t train_n, std::size_t test_n, std::uint64_t seed) {
    Rng rng(seed);
    const Tensor w = [&] {
        Tensor t({3, 2});
        for (double& x : t.flat()) x = rng.uniform(-1.0, 1.0);
        return t;
    }();

    auto make_split = [&](std::size_t n) {
        SplitData s;
        s.count = n;
        Tensor x({n, 3});
        for (double& v : x.flat()) v = rng.uniform(-1.0, 1.0);
        Tensor y({n, 2});
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < 2; ++j) {
                double acc = 0.1;
                for (std::size_t k = 0; k < 3; ++k) acc += x.at(i, k) * w.at(k, j);
                y.at(i, j) = acc;
            }
        }
        s.inputs["static"] = std::move(x);
        s.targets = std::move(y);
        return s;
    };

    Dataset d;
    d.vertex_count = 2;
    d.window = 1;
    d.horizon = 1;
    d.train = make_split(train_n);
    d.test = make_split(test_n);
    return d;
}

TrainConfig quick_config() {
    TrainConfig cfg;
    cfg.learning_rate = 0.02;
    cfg.weight_decay = 0.0;
    cfg.max_epochs = 30;
    cfg.patience = 5;
    cfg.batch_size = 16;
    cfg.seed = 7;
    return cfg;
}

ParamTensor* single_param(ParamStore& store, double init) {
    ParamTensor& p = store.add("w", Shape{1});
    p.value = Tensor::full({1}, init);
    return &p;
}

} // namespace

TEST(MseLoss, MatchesHandComputedCases) {
    Tensor a({2, 2}, {1.0, 2.0, 3.0, 4.0});
    EXPECT_DOUBLE_EQ(mse_loss(a, a), 0.0);

    Tensor b({2, 2}, {1.5, 2.5, 3.5, 4.5});
    EXPECT_DOUBLE_EQ(mse_loss(a, b), 0.25);

    Rng rng(3);
    Tensor p({4, 3});
    Tensor q({4, 3});
    for (double& v : p.flat()) v = rng.normal();
    for (double& v : q.flat()) v = rng.normal();
    double sse = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) sse += (p[i] - q[i]) * (p[i] - q[i]);
    EXPECT_NEAR(mse_loss(p, q), sse / 12.0, 1e-15);

    Tensor c({2, 3});
    EXPECT_THROW(mse_loss(a, c), ShapeError);
}

TEST(Adam, FirstStepHasLearningRateMagnitude) {
    // Bias correction makes the first normalized step g/|g|, so the move is
    // about lr regardless of gradient scale.
    for (double g : {0.25, 7.0, 1e-3}) {
        ParamStore store;
        ParamTensor* w = single_param(store, 1.0);
        w->grad = Tensor::full({1}, g);

        TrainConfig cfg;
        cfg.weight_decay = 0.0;
        AdamState state = AdamState::init(store);
        adam_step(store, state, cfg);

        EXPECT_EQ(state.t, 1u);
        EXPECT_NEAR(w->value[0], 1.0 - cfg.learning_rate, cfg.learning_rate * 1e-4);
    }
}

TEST(Adam, ZeroGradZeroDecayLeavesValueUntouched) {
    ParamStore store;
    ParamTensor* w = single_param(store, 0.73);
    w->grad = Tensor::full({1}, 0.0);

    TrainConfig cfg;
    cfg.weight_decay = 0.0;
    AdamState state = AdamState::init(store);
    for (int i = 0; i < 5; ++i) adam_step(store, state, cfg);

    EXPECT_DOUBLE_EQ(w->value[0], 0.73);
    EXPECT_EQ(state.t, 5u);
}

TEST(Adam, DecayOnlyShrinksTowardZeroAndMatchesScalarIteration) {
    ParamStore store;
    ParamTensor* w = single_param(store, 1.0);

    TrainConfig cfg;
    cfg.weight_decay = 0.1;

    AdamState state = AdamState::init(store);
    double ref = 1.0, m = 0.0, v = 0.0;
    double prev = 1.0;
    for (int t = 1; t <= 50; ++t) {
        w->grad = Tensor::full({1}, 0.0);
        adam_step(store, state, cfg);

        const double g = cfg.weight_decay * ref;
        m = cfg.beta1 * m + (1 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1 - cfg.beta2) * g * g;
        const double mh = m / (1 - std::pow(cfg.beta1, t));
        const double vh = v / (1 - std::pow(cfg.beta2, t));
        ref -= cfg.learning_rate * mh / (std::sqrt(vh) + cfg.epsilon);

        EXPECT_NEAR(w->value[0], ref, 1e-12);
        EXPECT_LT(w->value[0], prev);
        EXPECT_GT(w->value[0], 0.0);
        prev = w->value[0];
    }
}

TEST(Adam, NonFiniteGradientRaisesDivergence) {
    ParamStore store;
    ParamTensor* w = single_param(store, 1.0);
    w->grad = Tensor::full({1}, std::numeric_limits<double>::quiet_NaN());

    TrainConfig cfg;
    AdamState state = AdamState::init(store);
    EXPECT_THROW(adam_step(store, state, cfg), DivergenceError);
}

TEST(Adam, StateSizeMismatchIsConfigError) {
    ParamStore store;
    single_param(store, 1.0);
    AdamState state;  // empty
    TrainConfig cfg;
    EXPECT_THROW(adam_step(store, state, cfg), ConfigError);
}

TEST(TrainConfigJson, RoundTripAndValidation) {
    TrainConfig cfg;
    cfg.learning_rate = 0.005;
    cfg.batch_size = 8;
    cfg.seed = 99;
    const TrainConfig back = TrainConfig::from_json(cfg.to_json());
    EXPECT_DOUBLE_EQ(back.learning_rate, 0.005);
    EXPECT_EQ(back.batch_size, 8u);
    EXPECT_EQ(back.seed, 99u);

    TrainConfig bad;
    bad.beta1 = 1.0;
    EXPECT_THROW(bad.validate(), ConfigError);
    bad = TrainConfig();
    bad.patience = 0;
    EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(EarlyStopperTest, PatienceOneWorseningStopsAtEpochTwo) {
    EarlyStopper s(1);
    EXPECT_FALSE(s.update(1.0));
    EXPECT_TRUE(s.update(2.0));
    EXPECT_EQ(s.epochs_seen(), 2u);
    EXPECT_EQ(s.best_epoch(), 1u);
    EXPECT_DOUBLE_EQ(s.best_loss(), 1.0);
}

TEST(EarlyStopperTest, CountsOnlyConsecutiveStaleEpochs) {
    EarlyStopper s(2);
    EXPECT_FALSE(s.update(5.0));
    EXPECT_FALSE(s.update(6.0));   // stale 1
    EXPECT_FALSE(s.update(4.0));   // improvement resets
    EXPECT_FALSE(s.update(4.0));   // equal is not improvement: stale 1
    EXPECT_TRUE(s.update(4.5));    // stale 2 = patience
    EXPECT_EQ(s.best_epoch(), 3u);
}

TEST(GatherRowsTest, PicksRowsInOrder) {
    Tensor t({4, 2}, {0, 1, 10, 11, 20, 21, 30, 31});
    const Tensor g = gather_rows(t, {2, 0, 2});
    ASSERT_EQ(g.rows(), 3u);
    EXPECT_DOUBLE_EQ(g.at(0, 0), 20.0);
    EXPECT_DOUBLE_EQ(g.at(1, 1), 1.0);
    EXPECT_DOUBLE_EQ(g.at(2, 0), 20.0);
    EXPECT_THROW(gather_rows(t, {4}), ShapeError);
}

TEST(GatherInputsTest, ReordersSampleBlocksPerSchema) {
    // NTD with window 2, D = 1, three samples: row t*total + s.
    DataSourceSpec src;
    src.name = "seq";
    src.schema = SourceSchema::kNTD;
    src.feature_dim = 1;
    src.lstm_dims = {3};

    ModelSpec spec;
    spec.vertex_count = 2;
    spec.window = 2;
    spec.horizon = 1;
    spec.decoder.hidden = 0;
    spec.sources = {src};
    spec.validate();

    BatchInputs full;
    full["seq"] = Tensor({6, 1}, {0, 1, 2, 10, 11, 12});  // steps x total

    const BatchInputs got = gather_inputs(spec, full, 3, {2, 0});
    const Tensor& x = got.at("seq");
    ASSERT_EQ(x.rows(), 4u);
    EXPECT_DOUBLE_EQ(x.at(0, 0), 2.0);   // t=0 sample 2
    EXPECT_DOUBLE_EQ(x.at(1, 0), 0.0);   // t=0 sample 0
    EXPECT_DOUBLE_EQ(x.at(2, 0), 12.0);  // t=1 sample 2
    EXPECT_DOUBLE_EQ(x.at(3, 0), 10.0);  // t=1 sample 0

    BatchInputs missing;
    EXPECT_THROW(gather_inputs(spec, missing, 3, {0}), DataError);
}

TEST(TrainModel, LearnsLinearTargetsAndRestoresBestParams) {
    const ScaledLaplacian g = pair_graph();
    Model model(tiny_spec(), g);
    const Dataset data = linear_dataset(80, 20, 11);
    const TrainConfig cfg = quick_config();

    const TrainResult res = train_model(model, data, cfg);

    ASSERT_FALSE(res.history.empty());
    ASSERT_LE(res.history.size(), cfg.max_epochs);
    EXPECT_LT(res.history.back().train_mse, res.history.front().train_mse);
    EXPECT_LT(res.best_test_mse, res.history.front().test_mse);

    // Every epoch visits each training sample exactly once.
    ASSERT_EQ(res.samples_seen.size(), res.history.size());
    for (std::size_t n : res.samples_seen) EXPECT_EQ(n, 80u);

    // best_epoch is the argmin of recorded test MSE.
    double min_test = kInf;
    std::size_t argmin = 0;
    for (const EpochRecord& r : res.history) {
        if (r.test_mse < min_test) {
            min_test = r.test_mse;
            argmin = r.epoch;
        }
    }
    EXPECT_EQ(res.best_epoch, argmin);
    EXPECT_DOUBLE_EQ(res.best_test_mse, min_test);

    // The model's parameters were restored to that epoch.
    EXPECT_DOUBLE_EQ(dataset_mse(model, data.test, cfg.batch_size), res.best_test_mse);
}

TEST(TrainModel, StopsWithinPatienceOfBestEpoch) {
    const ScaledLaplacian g = pair_graph();
    Model model(tiny_spec(), g);
    const Dataset data = linear_dataset(60, 20, 5);
    TrainConfig cfg = quick_config();
    cfg.max_epochs = 200;
    cfg.patience = 3;

    const TrainResult res = train_model(model, data, cfg);
    ASSERT_FALSE(res.history.empty());
    EXPECT_LE(res.history.back().epoch, res.best_epoch + cfg.patience);
}

TEST(TrainModel, SameSeedReproducesLossesExactly) {
    const ScaledLaplacian g = pair_graph();
    const Dataset data = linear_dataset(40, 10, 2);
    TrainConfig cfg = quick_config();
    cfg.max_epochs = 6;

    Model a(tiny_spec(), g);
    Model b(tiny_spec(), g);
    const TrainResult ra = train_model(a, data, cfg);
    const TrainResult rb = train_model(b, data, cfg);

    ASSERT_EQ(ra.history.size(), rb.history.size());
    for (std::size_t i = 0; i < ra.history.size(); ++i) {
        EXPECT_DOUBLE_EQ(ra.history[i].train_mse, rb.history[i].train_mse);
        EXPECT_DOUBLE_EQ(ra.history[i].test_mse, rb.history[i].test_mse);
    }
}

TEST(TrainModel, EmptySplitIsDataError) {
    const ScaledLaplacian g = pair_graph();
    Model model(tiny_spec(), g);
    Dataset data = linear_dataset(10, 5, 1);
    data.test.count = 0;
    EXPECT_THROW(train_model(model, data, quick_config()), DataError);
}

TEST(TrainModel, DivergenceNamesTheEpoch) {
    const ScaledLaplacian g = pair_graph();
    Model model(tiny_spec(), g);
    Dataset data = linear_dataset(20, 5, 3);
    data.train.inputs["static"].at(0, 0) = std::numeric_limits<double>::quiet_NaN();

    TrainConfig cfg = quick_config();
    try {
        train_model(model, data, cfg);
        FAIL() << "expected DivergenceError";
    } catch (const DivergenceError& err) {
        EXPECT_NE(std::string(err.what()).find("epoch 1"), std::string::npos);
    }
}

TEST(TrainModel, ResumeContinuesEpochNumbering) {
    const ScaledLaplacian g = pair_graph();
    const Dataset data = linear_dataset(40, 10, 9);
    TrainConfig cfg = quick_config();
    cfg.max_epochs = 4;

    Model model(tiny_spec(), g);
    AdamState adam;
    const TrainResult first = train_model(model, data, cfg, nullptr, &adam);
    ASSERT_EQ(first.history.back().epoch, 4u);
    EXPECT_EQ(adam.t, first.adam_steps);

    const TrainResult second =
        train_model(model, data, cfg, nullptr, &adam, first.history.back().epoch, false);
    EXPECT_EQ(second.history.front().epoch, 5u);
    EXPECT_GE(second.best_epoch, 5u);

    // The resumed leg starts from the first leg's best params and keeps
    // learning; it should not be worse than where leg one ended up.
    EXPECT_LE(second.best_test_mse, first.best_test_mse * 1.5);
}

TEST(HistoryCsv, RoundTripsAndRejectsBadHeader) {
    std::vector<EpochRecord> h = {{1, 0.5, 0.6}, {2, 0.25, 0.3}};
    std::ostringstream out;
    write_history_csv(out, h);

    std::istringstream in(out.str());
    const std::vector<EpochRecord> back = read_history_csv(in);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[1].epoch, 2u);
    EXPECT_DOUBLE_EQ(back[1].train_mse, 0.25);
    EXPECT_DOUBLE_EQ(back[0].test_mse, 0.6);

    std::istringstream bad("nope\n1,2,3\n");
    EXPECT_THROW(read_history_csv(bad), DataError);
}

TEST(ApplyOverride, DescendsObjectsAndArrays) {
    nlohmann::json j = {{"train", {{"learning_rate", 0.001}}},
                        {"model", {{"sources", nlohmann::json::array({{{"dropout", 0.0}}})}}}};
    apply_override(j, "train.learning_rate", 0.5);
    apply_override(j, "model.sources.0.dropout", 0.25);
    EXPECT_DOUBLE_EQ(j["train"]["learning_rate"].get<double>(), 0.5);
    EXPECT_DOUBLE_EQ(j["model"]["sources"][0]["dropout"].get<double>(), 0.25);

    EXPECT_THROW(apply_override(j, "train.nope", 1), ConfigError);
    EXPECT_THROW(apply_override(j, "model.sources.7.dropout", 1), ConfigError);
    EXPECT_THROW(apply_override(j, "train.learning_rate.deeper", 1), ConfigError);
}

TEST(GridSearch, SinglePointGridMatchesOneTrainCall) {
    const ScaledLaplacian g = pair_graph();
    const Dataset data = linear_dataset(40, 10, 4);
    TrainConfig cfg = quick_config();
    cfg.max_epochs = 5;

    GridAxes axes;
    axes["train.learning_rate"] = {nlohmann::json(0.01)};

    const std::vector<GridResult> rows = grid_search(tiny_spec(), g, data, cfg, axes, 3);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].combo_index, 0u);

    TrainConfig direct = cfg;
    direct.learning_rate = 0.01;
    direct.max_epochs = 3;
    direct.seed = Rng(cfg.seed).fork(0).next_u64();
    Model model(tiny_spec(), g);
    const TrainResult tr = train_model(model, data, direct);
    EXPECT_DOUBLE_EQ(rows[0].best_test_mse, tr.best_test_mse);
    EXPECT_EQ(rows[0].best_epoch, tr.best_epoch);
}

TEST(GridSearch, TwoByTwoYieldsFourRankedRows) {
    const ScaledLaplacian g = pair_graph();
    const Dataset data = linear_dataset(30, 10, 8);
    TrainConfig cfg = quick_config();

    GridAxes axes;
    axes["train.learning_rate"] = {nlohmann::json(0.02), nlohmann::json(1e-5)};
    axes["train.batch_size"] = {nlohmann::json(8), nlohmann::json(30)};

    const std::vector<GridResult> rows = grid_search(tiny_spec(), g, data, cfg, axes, 4);
    ASSERT_EQ(rows.size(), 4u);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_LE(rows[i - 1].best_test_mse, rows[i].best_test_mse);
    }
    for (const GridResult& r : rows) {
        EXPECT_EQ(r.overrides.size(), 2u);
        EXPECT_TRUE(r.overrides.count("train.learning_rate"));
    }

    // A tiny learning rate barely moves from init, so some lr=0.02 combo
    // must beat every lr=1e-5 combo; the top row uses the big step.
    EXPECT_DOUBLE_EQ(rows[0].overrides.at("train.learning_rate").get<double>(), 0.02);
}

TEST(GridSearch, RankingIsReproducible) {
    const ScaledLaplacian g = pair_graph();
    const Dataset data = linear_dataset(30, 10, 8);
    TrainConfig cfg = quick_config();

    GridAxes axes;
    axes["train.learning_rate"] = {nlohmann::json(0.02), nlohmann::json(0.005)};

    const std::vector<GridResult> a = grid_search(tiny_spec(), g, data, cfg, axes, 3);
    const std::vector<GridResult> b = grid_search(tiny_spec(), g, data, cfg, axes, 3);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].combo_index, b[i].combo_index);
        EXPECT_DOUBLE_EQ(a[i].best_test_mse, b[i].best_test_mse);
    }
}

TEST(GridSearch, EmptyAxisIsConfigError) {
    const ScaledLaplacian g = pair_graph();
    const Dataset data = linear_dataset(10, 5, 1);
    GridAxes axes;
    axes["train.learning_rate"] = {};
    EXPECT_THROW(grid_search(tiny_spec(), g, data, quick_config(), axes, 2), ConfigError);
}
