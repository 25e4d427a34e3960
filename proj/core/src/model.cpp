#include "parkcast/model.hpp"

#include <utility>

#include "parkcast/error.hpp"

namespace parkcast {

const char* schema_name(SourceSchema s) {
    switch (s) {
        case SourceSchema::kND: return "ND";
        case SourceSchema::kNTD: return "NTD";
        case SourceSchema::kNVD: return "NVD";
        case SourceSchema::kNVTD: return "NVTD";
    }
    throw Error("schema_name: bad schema");
}

SourceSchema parse_schema(const std::string& name) {
    if (name == "ND") return SourceSchema::kND;
    if (name == "NTD") return SourceSchema::kNTD;
    if (name == "NVD") return SourceSchema::kNVD;
    if (name == "NVTD") return SourceSchema::kNVTD;
    throw ConfigError("unknown source schema '" + name + "'");
}

bool schema_uses_graph(SourceSchema s) {
    return s == SourceSchema::kNVD || s == SourceSchema::kNVTD;
}

bool schema_uses_time(SourceSchema s) {
    return s == SourceSchema::kNTD || s == SourceSchema::kNVTD;
}

std::size_t DataSourceSpec::vertex_out_dim() const {
    return fc_dims.empty() ? gcnn.channels : fc_dims.back();
}

std::size_t DataSourceSpec::embedding_dim(std::size_t vertex_count) const {
    switch (schema) {
        case SourceSchema::kND: return fc_dims.back();
        case SourceSchema::kNTD: return lstm_dims.back();
        case SourceSchema::kNVD: return vertex_count * vertex_out_dim();
        case SourceSchema::kNVTD: return lstm_dims.back();
    }
    throw Error("embedding_dim: bad schema");
}

void DataSourceSpec::validate(std::size_t vertex_count) const {
    const std::string who = "source '" + name + "': ";
    if (name.empty()) throw ConfigError("data source with empty name");
    if (feature_dim == 0) throw ConfigError(who + "feature_dim must be positive");
    if (dropout < 0.0 || dropout >= 1.0) {
        throw ConfigError(who + "dropout must be in [0, 1), got " + std::to_string(dropout));
    }
    for (std::size_t d : fc_dims) {
        if (d == 0) throw ConfigError(who + "zero FC width");
    }
    for (std::size_t d : lstm_dims) {
        if (d == 0) throw ConfigError(who + "zero LSTM width");
    }
    if (uses_graph()) {
        if (vertex_count == 0) throw ConfigError(who + "graph schema needs a vertex count");
        if (gcnn.order == 0) throw ConfigError(who + "filter order must be positive");
        if (gcnn.channels == 0) throw ConfigError(who + "filter channels must be positive");
    }
    switch (schema) {
        case SourceSchema::kND:
            if (fc_dims.size() != 2) {
                throw ConfigError(who + "ND embedding is exactly two FC layers, got " +
                                  std::to_string(fc_dims.size()) + " dims");
            }
            if (!lstm_dims.empty()) throw ConfigError(who + "ND schema takes no LSTM layers");
            break;
        case SourceSchema::kNTD:
            if (lstm_dims.empty()) throw ConfigError(who + "NTD schema needs LSTM layers");
            break;
        case SourceSchema::kNVD:
            if (!lstm_dims.empty()) throw ConfigError(who + "NVD schema takes no LSTM layers");
            break;
        case SourceSchema::kNVTD:
            if (lstm_dims.empty()) throw ConfigError(who + "NVTD schema needs LSTM layers");
            break;
    }
}

namespace {

std::vector<std::size_t> dims_from_json(const nlohmann::json& j, const char* key) {
    std::vector<std::size_t> out;
    if (!j.contains(key)) return out;
    for (const auto& v : j.at(key)) out.push_back(v.get<std::size_t>());
    return out;
}

} // namespace

nlohmann::json DataSourceSpec::to_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["schema"] = schema_name(schema);
    j["feature_dim"] = feature_dim;
    if (uses_graph()) j["gcnn"] = {{"order", gcnn.order}, {"channels", gcnn.channels}};
    if (!fc_dims.empty()) j["fc"] = fc_dims;
    if (!lstm_dims.empty()) j["lstm"] = lstm_dims;
    j["dropout"] = dropout;
    j["activation"] = activation_name(activation);
    return j;
}

DataSourceSpec DataSourceSpec::from_json(const nlohmann::json& j) {
    DataSourceSpec s;
    try {
        s.name = j.at("name").get<std::string>();
        s.schema = parse_schema(j.at("schema").get<std::string>());
        s.feature_dim = j.value("feature_dim", std::size_t{1});
        if (j.contains("gcnn")) {
            const auto& g = j.at("gcnn");
            s.gcnn.order = g.value("order", std::size_t{3});
            s.gcnn.channels = g.value("channels", std::size_t{8});
        }
        s.fc_dims = dims_from_json(j, "fc");
        s.lstm_dims = dims_from_json(j, "lstm");
        s.dropout = j.value("dropout", 0.0);
        s.activation = parse_activation(j.value("activation", std::string("relu")));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad data source config: ") + e.what());
    }
    return s;
}

void ModelSpec::validate() const {
    if (sources.empty()) throw ConfigError("model needs at least one data source");
    if (window == 0) throw ConfigError("window must be positive");
    if (horizon == 0) throw ConfigError("horizon must be positive");
    if (vertex_count == 0) throw ConfigError("vertex_count must be positive");
    for (std::size_t i = 0; i < sources.size(); ++i) {
        sources[i].validate(vertex_count);
        for (std::size_t k = i + 1; k < sources.size(); ++k) {
            if (sources[i].name == sources[k].name) {
                throw ConfigError("duplicate data source '" + sources[i].name + "'");
            }
        }
    }
}

std::size_t ModelSpec::combined_dim() const {
    std::size_t total = 0;
    for (const DataSourceSpec& s : sources) total += s.embedding_dim(vertex_count);
    return total;
}

const DataSourceSpec* ModelSpec::find_source(const std::string& name) const {
    for (const DataSourceSpec& s : sources) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

nlohmann::json ModelSpec::to_json() const {
    nlohmann::json j;
    j["window"] = window;
    j["horizon"] = horizon;
    j["vertex_count"] = vertex_count;
    j["decoder"] = {{"hidden", decoder.hidden}};
    j["sources"] = nlohmann::json::array();
    for (const DataSourceSpec& s : sources) j["sources"].push_back(s.to_json());
    return j;
}

ModelSpec ModelSpec::from_json(const nlohmann::json& j) {
    ModelSpec spec;
    try {
        spec.window = j.value("window", std::size_t{24});
        spec.horizon = j.value("horizon", std::size_t{3});
        spec.vertex_count = j.at("vertex_count").get<std::size_t>();
        if (j.contains("decoder")) {
            spec.decoder.hidden = j.at("decoder").value("hidden", std::size_t{1024});
        }
        for (const auto& s : j.at("sources")) spec.sources.push_back(DataSourceSpec::from_json(s));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad model config: ") + e.what());
    }
    spec.validate();
    return spec;
}

ModelSpec ModelSpec::final_architecture(std::size_t vertex_count) {
    ModelSpec spec;
    spec.vertex_count = vertex_count;
    spec.window = 24;
    spec.horizon = 3;
    spec.decoder.hidden = 1024;

    DataSourceSpec occupancy;
    occupancy.name = "occupancy";
    occupancy.schema = SourceSchema::kNVTD;
    occupancy.feature_dim = 1;
    occupancy.gcnn = {3, 8};
    occupancy.fc_dims = {16, 16};
    occupancy.lstm_dims = {256};
    occupancy.dropout = 0.25;

    DataSourceSpec speed;
    speed.name = "speed";
    speed.schema = SourceSchema::kNVTD;
    speed.feature_dim = 1;
    speed.gcnn = {3, 4};
    speed.fc_dims = {8, 8};
    speed.lstm_dims = {256};
    speed.dropout = 0.0;

    DataSourceSpec weather;
    weather.name = "weather";
    weather.schema = SourceSchema::kNTD;
    weather.feature_dim = 14;
    weather.lstm_dims = {128};
    weather.dropout = 0.0;

    spec.sources = {occupancy, speed, weather};
    return spec;
}

ModelSpec ModelSpec::lstm_only(std::size_t vertex_count) {
    ModelSpec spec;
    spec.vertex_count = vertex_count;
    spec.window = 24;
    spec.horizon = 3;
    spec.decoder.hidden = 0;

    DataSourceSpec occupancy;
    occupancy.name = "occupancy";
    occupancy.schema = SourceSchema::kNTD;
    occupancy.feature_dim = vertex_count;
    occupancy.lstm_dims = {1024, 256};
    occupancy.dropout = 0.25;

    spec.sources = {occupancy};
    return spec;
}

BranchParams register_branch(ParamStore& store, const DataSourceSpec& spec,
                             std::size_t vertex_count) {
    spec.validate(vertex_count);
    BranchParams bp;
    std::size_t width = spec.feature_dim;
    if (spec.uses_graph()) {
        bp.theta = &store.add(spec.name + ".theta",
                              {spec.gcnn.order, spec.feature_dim, spec.gcnn.channels});
        bp.gcnn_bias =
            &store.add(spec.name + ".gcnn_bias", {spec.gcnn.channels}, ParamTensor::Kind::kBias);
        width = spec.gcnn.channels;
    }
    for (std::size_t i = 0; i < spec.fc_dims.size(); ++i) {
        const std::string fc = spec.name + ".fc" + std::to_string(i);
        bp.fc_w.push_back(&store.add(fc + ".w", {width, spec.fc_dims[i]}));
        bp.fc_b.push_back(&store.add(fc + ".b", {spec.fc_dims[i]}, ParamTensor::Kind::kBias));
        width = spec.fc_dims[i];
    }
    if (spec.uses_graph()) width *= vertex_count;
    for (std::size_t i = 0; i < spec.lstm_dims.size(); ++i) {
        bp.lstm.push_back(LstmParams::create(store, spec.name + ".lstm" + std::to_string(i), width,
                                             spec.lstm_dims[i]));
        width = spec.lstm_dims[i];
    }
    return bp;
}

namespace {

Value affine(Tape& tape, Value x, ParamTensor& w, ParamTensor& b) {
    return tape.add_rowvec(tape.matmul(x, tape.param(w)), tape.param(b));
}

// FC stack with activation and dropout after every layer.
Value fc_chain(Tape& tape, Value h, const BranchParams& bp, const DataSourceSpec& spec, Rng* rng,
               bool training) {
    for (std::size_t i = 0; i < bp.fc_w.size(); ++i) {
        h = tape.apply(affine(tape, h, *bp.fc_w[i], *bp.fc_b[i]), spec.activation);
        if (training && spec.dropout > 0.0) {
            if (!rng) throw ConfigError("dropout in training mode needs an rng");
            h = tape.dropout(h, spec.dropout, *rng, true);
        }
    }
    return h;
}

void check_cols(const Tensor& x, const DataSourceSpec& spec) {
    require_rank(x, 2, "embedding input");
    if (x.cols() != spec.feature_dim) {
        throw ShapeError("source '" + spec.name + "': input has " + std::to_string(x.cols()) +
                         " features, spec says " + std::to_string(spec.feature_dim));
    }
}

} // namespace

Value embed_nd(Tape& tape, Value x, const BranchParams& bp, const DataSourceSpec& spec, Rng* rng,
               bool training) {
    check_cols(tape.val(x), spec);
    if (bp.fc_w.size() != 2) throw ConfigError("embed_nd: expected exactly two FC layers");
    Value h = tape.apply(affine(tape, x, *bp.fc_w[0], *bp.fc_b[0]), spec.activation);
    if (training && spec.dropout > 0.0) {
        if (!rng) throw ConfigError("dropout in training mode needs an rng");
        h = tape.dropout(h, spec.dropout, *rng, true);
    }
    return affine(tape, h, *bp.fc_w[1], *bp.fc_b[1]);
}

Value embed_ntd(Tape& tape, Value x_all, std::size_t window, const BranchParams& bp,
                const DataSourceSpec& spec, Rng* rng, bool training) {
    check_cols(tape.val(x_all), spec);
    if (window == 0 || tape.val(x_all).rows() % window != 0) {
        throw ShapeError("source '" + spec.name + "': packed rows " +
                         std::to_string(tape.val(x_all).rows()) + " not divisible by window " +
                         std::to_string(window));
    }
    Value h = fc_chain(tape, x_all, bp, spec, rng, training);
    return stacked_lstm(tape, h, window, bp.lstm, spec.dropout, rng, training);
}

Value embed_nvd(Tape& tape, Value x, std::size_t batch, const ScaledLaplacian& sl,
                const BranchParams& bp, const DataSourceSpec& spec, Rng* rng, bool training) {
    check_cols(tape.val(x), spec);
    const std::size_t v = sl.n();
    if (v == 0 || tape.val(x).rows() != batch * v) {
        throw ShapeError("source '" + spec.name + "': expected " + std::to_string(batch) + "*" +
                         std::to_string(v) + " packed rows, got " +
                         std::to_string(tape.val(x).rows()));
    }
    Value y = gcnn_layer(tape, x, sl, tape.param(*bp.theta), tape.param(*bp.gcnn_bias),
                         spec.activation);
    Value h = fc_chain(tape, y, bp, spec, rng, training);
    return tape.reshape(h, {batch, v * spec.vertex_out_dim()});
}

Value nvtd_stamp_features(Tape& tape, Value x_all, std::size_t window, std::size_t batch,
                          const ScaledLaplacian& sl, const BranchParams& bp,
                          const DataSourceSpec& spec, Rng* rng, bool training) {
    check_cols(tape.val(x_all), spec);
    const std::size_t v = sl.n();
    if (v == 0 || window == 0 || tape.val(x_all).rows() != window * batch * v) {
        throw ShapeError("source '" + spec.name + "': expected " + std::to_string(window) + "*" +
                         std::to_string(batch) + "*" + std::to_string(v) + " packed rows, got " +
                         std::to_string(tape.val(x_all).rows()));
    }
    // One filter pass over every stamp: rows are (t, sample, vertex) blocks and
    // the filter acts per n-row block, so stacking stamps is free sharing.
    Value y = gcnn_layer(tape, x_all, sl, tape.param(*bp.theta), tape.param(*bp.gcnn_bias),
                         spec.activation);
    Value h = fc_chain(tape, y, bp, spec, rng, training);
    // ((t*N + s)*V + v, f) and (t*N + s, v*F + f) index the same buffer cell.
    return tape.reshape(h, {window * batch, v * spec.vertex_out_dim()});
}

Value embed_nvtd(Tape& tape, Value x_all, std::size_t window, std::size_t batch,
                 const ScaledLaplacian& sl, const BranchParams& bp, const DataSourceSpec& spec,
                 Rng* rng, bool training) {
    Value seq = nvtd_stamp_features(tape, x_all, window, batch, sl, bp, spec, rng, training);
    return stacked_lstm(tape, seq, window, bp.lstm, spec.dropout, rng, training);
}

Model::Model(ModelSpec spec, ScaledLaplacian graph)
    : spec_(std::move(spec)), graph_(std::move(graph)) {
    spec_.validate();
    bool needs_graph = false;
    for (const DataSourceSpec& s : spec_.sources) needs_graph |= s.uses_graph();
    if (needs_graph && graph_.n() != spec_.vertex_count) {
        throw ConfigError("model: graph has " + std::to_string(graph_.n()) +
                          " nodes, spec says vertex_count " + std::to_string(spec_.vertex_count));
    }
    for (const DataSourceSpec& s : spec_.sources) {
        branches_.push_back(register_branch(params_, s, spec_.vertex_count));
    }
    const std::size_t combined = spec_.combined_dim();
    if (spec_.decoder.hidden > 0) {
        dec_hidden_w_ = &params_.add("decoder.fc.w", {combined, spec_.decoder.hidden});
        dec_hidden_b_ =
            &params_.add("decoder.fc.b", {spec_.decoder.hidden}, ParamTensor::Kind::kBias);
        dec_out_w_ = &params_.add("decoder.out.w", {spec_.decoder.hidden, spec_.vertex_count});
    } else {
        dec_out_w_ = &params_.add("decoder.out.w", {combined, spec_.vertex_count});
    }
    dec_out_b_ = &params_.add("decoder.out.b", {spec_.vertex_count}, ParamTensor::Kind::kBias);
}

Value Model::forward(Tape& tape, const BatchInputs& inputs, RunMode mode, Rng* dropout_rng) {
    const bool training = mode == RunMode::kTrain;
    const std::size_t v = spec_.vertex_count;
    std::size_t batch = 0;
    std::vector<Value> embeddings;
    embeddings.reserve(spec_.sources.size());
    for (std::size_t i = 0; i < spec_.sources.size(); ++i) {
        const DataSourceSpec& s = spec_.sources[i];
        auto it = inputs.find(s.name);
        if (it == inputs.end()) {
            throw DataError("model forward: missing input for source '" + s.name + "'");
        }
        const Tensor& x = it->second;
        if (x.rank() != 2 || x.cols() != s.feature_dim) {
            throw DataError("model forward: source '" + s.name + "' input shape " +
                            shape_str(x.shape()) + " does not carry " +
                            std::to_string(s.feature_dim) + " features");
        }
        std::size_t unit = 1;
        if (s.uses_graph()) unit *= v;
        if (schema_uses_time(s.schema)) unit *= spec_.window;
        if (unit == 0 || x.rows() % unit != 0 || x.rows() == 0) {
            throw DataError("model forward: source '" + s.name + "' row count " +
                            std::to_string(x.rows()) + " is not a multiple of " +
                            std::to_string(unit));
        }
        const std::size_t n = x.rows() / unit;
        if (i == 0) {
            batch = n;
        } else if (n != batch) {
            throw DataError("model forward: source '" + s.name + "' implies batch " +
                            std::to_string(n) + ", expected " + std::to_string(batch));
        }
        Value xv = tape.input(x);
        switch (s.schema) {
            case SourceSchema::kND:
                embeddings.push_back(embed_nd(tape, xv, branches_[i], s, dropout_rng, training));
                break;
            case SourceSchema::kNTD:
                embeddings.push_back(
                    embed_ntd(tape, xv, spec_.window, branches_[i], s, dropout_rng, training));
                break;
            case SourceSchema::kNVD:
                embeddings.push_back(
                    embed_nvd(tape, xv, n, graph_, branches_[i], s, dropout_rng, training));
                break;
            case SourceSchema::kNVTD:
                embeddings.push_back(embed_nvtd(tape, xv, spec_.window, n, graph_, branches_[i], s,
                                                dropout_rng, training));
                break;
        }
    }
    Value combined = embeddings.size() == 1 ? embeddings[0] : tape.concat_cols(embeddings);
    Value out;
    if (spec_.decoder.hidden > 0) {
        Value h = tape.relu(affine(tape, combined, *dec_hidden_w_, *dec_hidden_b_));
        out = affine(tape, h, *dec_out_w_, *dec_out_b_);
    } else {
        out = affine(tape, combined, *dec_out_w_, *dec_out_b_);
    }
    if (!tape.val(out).all_finite()) {
        throw DivergenceError("model forward produced non-finite predictions");
    }
    return out;
}

Tensor Model::predict(const BatchInputs& inputs) {
    Tape tape;
    Value out = forward(tape, inputs, RunMode::kEval, nullptr);
    return tape.val(out);
}

std::size_t Model::branch_parameter_count(const std::string& source_name) const {
    const std::string prefix = source_name + ".";
    std::size_t total = 0;
    for (const ParamTensor* p : params_.all()) {
        if (p->name.rfind(prefix, 0) == 0) total += p->value.size();
    }
    return total;
}

} // namespace parkcast
