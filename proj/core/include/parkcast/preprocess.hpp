#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "parkcast/tensor.hpp"

namespace parkcast {

// Column-wise scaling steps, applied left to right. All statistics come from
// the training rows only.
enum class ScaleOp {
    kStandardize,  // z-score; zero-variance columns pass through with a warning
    kNormalize,    // divide by max |x|; all-zero columns pass through
    kWinsorize,    // clip to the [p, 100-p] linear-interpolated percentiles
    kMinMax,       // affine map onto [-1, 1]; min = max maps to 0
};

struct ScaleStep {
    ScaleOp op = ScaleOp::kMinMax;
    double winsor_p = 5.0;  // only kWinsorize reads this
};

const char* scale_op_name(ScaleOp op);
ScaleOp parse_scale_op(const std::string& name);  // ConfigError

// Chain from names like {"normalize", "minmax"} or {"winsorize:5", "minmax"}.
std::vector<ScaleStep> parse_scale_chain(const std::vector<std::string>& names);

// Fitted per-column parameters for one step: interpretation depends on op.
//   standardize: a = mean, b = stddev (b = 1 marks a skipped column)
//   normalize:   a = max-abs divisor (1 for all-zero columns), b unused
//   winsorize:   a = low clip, b = high clip
//   minmax:      a = train min, b = train max
struct FittedStep {
    ScaleStep step;
    std::vector<double> a, b;
};

// Everything needed to reapply the transform to new data and to map model
// outputs back to raw units. Winsorize inverts as the identity; clipped
// values do not round-trip.
struct TransformRecord {
    std::vector<FittedStep> steps;
    std::vector<std::string> warnings;

    nlohmann::json to_json() const;
    static TransformRecord from_json(const nlohmann::json& j);
};

// Fits on the given training rows ({N, C}); later steps see the output of
// earlier ones, exactly as apply_transform will compute it.
TransformRecord fit_transform(const Tensor& train, const std::vector<ScaleStep>& chain);

// In-place column-wise application / inversion on any {N, C} tensor.
void apply_transform(const TransformRecord& rec, Tensor& data);
void invert_transform(const TransformRecord& rec, Tensor& data);

// Linear-interpolated percentile of a sample, q in [0, 100].
double percentile_linear(std::vector<double> values, double q);

} // namespace parkcast
