#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "parkcast/activation.hpp"
#include "parkcast/graph.hpp"
#include "parkcast/lstm.hpp"
#include "parkcast/params.hpp"
#include "parkcast/tape.hpp"

namespace parkcast {

// Input layout of one data source. N samples, T time steps, V graph vertices,
// D features per unit.
enum class SourceSchema {
    kND,    // static per-sample features
    kNTD,   // per-sample sequence
    kNVD,   // per-vertex snapshot
    kNVTD,  // per-vertex sequence
};

const char* schema_name(SourceSchema s);
SourceSchema parse_schema(const std::string& name);  // ConfigError on unknown
bool schema_uses_graph(SourceSchema s);
bool schema_uses_time(SourceSchema s);

struct GcnnConfig {
    std::size_t order = 3;     // Chebyshev K
    std::size_t channels = 8;  // output channels per vertex
};

// One embedding branch. Which fields are read depends on the schema:
//   ND    exactly two FC dims (affine, activation between, none after)
//   NTD   optional FC chain per stamp, then LSTM stack (seq-to-one)
//   NVD   graph filter, per-vertex FC chain, flattened to V*out
//   NVTD  shared graph filter + FC chain per stamp, then LSTM stack
// Dropout applies after each activated FC layer and between stacked LSTM
// layers; never after the graph filter itself or the final ND affine map.
struct DataSourceSpec {
    std::string name;
    SourceSchema schema = SourceSchema::kNTD;
    std::size_t feature_dim = 1;
    GcnnConfig gcnn;
    std::vector<std::size_t> fc_dims;
    std::vector<std::size_t> lstm_dims;
    double dropout = 0.0;
    Activation activation = Activation::kRelu;

    bool uses_graph() const { return schema_uses_graph(schema); }
    // Feature width per vertex after the FC chain (graph schemas).
    std::size_t vertex_out_dim() const;
    // Columns this branch contributes to the combining layer.
    std::size_t embedding_dim(std::size_t vertex_count) const;
    void validate(std::size_t vertex_count) const;  // ConfigError

    nlohmann::json to_json() const;
    static DataSourceSpec from_json(const nlohmann::json& j);
};

struct DecoderConfig {
    std::size_t hidden = 1024;  // 0 collapses the decoder to one linear map
};

struct ModelSpec {
    std::vector<DataSourceSpec> sources;
    DecoderConfig decoder;
    std::size_t window = 24;   // input steps T
    std::size_t horizon = 3;   // intervals ahead the target sits
    std::size_t vertex_count = 0;

    void validate() const;  // ConfigError
    std::size_t combined_dim() const;
    const DataSourceSpec* find_source(const std::string& name) const;

    nlohmann::json to_json() const;
    static ModelSpec from_json(const nlohmann::json& j);

    // The shipped configuration: occupancy NVTD (K=3, 8 channels, FC 16/16,
    // dropout 0.25, LSTM 256), speed NVTD (K=3, 4 channels, FC 8/8, LSTM 256),
    // weather NTD (14 features, LSTM 128), decoder hidden 1024.
    static ModelSpec final_architecture(std::size_t vertex_count);
    // Graph-free reference: occupancy panel flattened to NTD with a 1024/256
    // two-layer LSTM and a single linear readout.
    static ModelSpec lstm_only(std::size_t vertex_count);
};

// Trainable tensors of one branch, owned by the ParamStore.
struct BranchParams {
    ParamTensor* theta = nullptr;      // {K, D, C} filter stack
    ParamTensor* gcnn_bias = nullptr;  // {C}
    std::vector<ParamTensor*> fc_w;
    std::vector<ParamTensor*> fc_b;
    std::vector<LstmParams> lstm;
};

// Registers every tensor of the branch under "<name>." prefixes, in a fixed
// order so two identical specs initialize identically from the same seed.
BranchParams register_branch(ParamStore& store, const DataSourceSpec& spec,
                             std::size_t vertex_count);

// Packed input layouts (row-major, rank 2):
//   ND    N x D
//   NTD   (T*N) x D,     row t*N + s
//   NVD   (N*V) x D,     row s*V + v
//   NVTD  (T*N*V) x D,   row (t*N + s)*V + v
// rng may be null when training is false or the spec has zero dropout.
Value embed_nd(Tape& tape, Value x, const BranchParams& bp, const DataSourceSpec& spec, Rng* rng,
               bool training);
Value embed_ntd(Tape& tape, Value x_all, std::size_t window, const BranchParams& bp,
                const DataSourceSpec& spec, Rng* rng, bool training);
Value embed_nvd(Tape& tape, Value x, std::size_t batch, const ScaledLaplacian& sl,
                const BranchParams& bp, const DataSourceSpec& spec, Rng* rng, bool training);
Value embed_nvtd(Tape& tape, Value x_all, std::size_t window, std::size_t batch,
                 const ScaledLaplacian& sl, const BranchParams& bp, const DataSourceSpec& spec,
                 Rng* rng, bool training);

// Pre-LSTM stage of embed_nvtd: the shared filter and FC chain over all T
// stamps at once, reshaped to the (T*N) x (V*out) sequence the LSTM consumes.
// Exposed so parameter sharing across stamps is directly testable.
Value nvtd_stamp_features(Tape& tape, Value x_all, std::size_t window, std::size_t batch,
                          const ScaledLaplacian& sl, const BranchParams& bp,
                          const DataSourceSpec& spec, Rng* rng, bool training);

enum class RunMode { kTrain, kEval };

// One packed tensor per source name, laid out per the schema table above.
// Entries for sources absent from the spec are ignored, so one batch can feed
// both a full model and its ablated variants.
using BatchInputs = std::map<std::string, Tensor>;

class Model {
public:
    // graph may be default-constructed when no source uses it; otherwise its
    // node count must equal spec.vertex_count.
    Model(ModelSpec spec, ScaledLaplacian graph);

    const ModelSpec& spec() const { return spec_; }
    const ScaledLaplacian& graph() const { return graph_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }

    void init_params(Rng& rng) { params_.init(rng); }

    // Builds the forward graph: one embedding per source (spec order), column
    // concatenation, decoder. Returns N x V predictions. Throws DataError when
    // a source input is missing or misshapen, DivergenceError when the output
    // is not finite.
    Value forward(Tape& tape, const BatchInputs& inputs, RunMode mode, Rng* dropout_rng);

    // Eval-mode forward on a throwaway tape.
    Tensor predict(const BatchInputs& inputs);

    // Total scalar count of parameters named "<source_name>.*".
    std::size_t branch_parameter_count(const std::string& source_name) const;

private:
    ModelSpec spec_;
    ScaledLaplacian graph_;
    ParamStore params_;
    std::vector<BranchParams> branches_;
    ParamTensor* dec_hidden_w_ = nullptr;
    ParamTensor* dec_hidden_b_ = nullptr;
    ParamTensor* dec_out_w_ = nullptr;
    ParamTensor* dec_out_b_ = nullptr;
};

} // namespace parkcast
