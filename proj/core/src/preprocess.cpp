#include "parkcast/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "parkcast/error.hpp"

namespace parkcast {

const char* scale_op_name(ScaleOp op) {
    switch (op) {
        case ScaleOp::kStandardize: return "standardize";
        case ScaleOp::kNormalize: return "normalize";
        case ScaleOp::kWinsorize: return "winsorize";
        case ScaleOp::kMinMax: return "minmax";
    }
    throw ConfigError("unknown scale op");
}

ScaleOp parse_scale_op(const std::string& name) {
    if (name == "standardize") return ScaleOp::kStandardize;
    if (name == "normalize") return ScaleOp::kNormalize;
    if (name == "winsorize") return ScaleOp::kWinsorize;
    if (name == "minmax") return ScaleOp::kMinMax;
    throw ConfigError("unknown scale op '" + name + "'");
}

std::vector<ScaleStep> parse_scale_chain(const std::vector<std::string>& names) {
    std::vector<ScaleStep> chain;
    for (const std::string& name : names) {
        ScaleStep step;
        const std::size_t colon = name.find(':');
        if (colon == std::string::npos) {
            step.op = parse_scale_op(name);
        } else {
            step.op = parse_scale_op(name.substr(0, colon));
            if (step.op != ScaleOp::kWinsorize) {
                throw ConfigError("only winsorize takes a parameter: '" + name + "'");
            }
            try {
                step.winsor_p = std::stod(name.substr(colon + 1));
            } catch (const std::exception&) {
                throw ConfigError("bad winsorize percent in '" + name + "'");
            }
        }
        if (step.op == ScaleOp::kWinsorize && (step.winsor_p <= 0.0 || step.winsor_p >= 50.0)) {
            throw ConfigError("winsorize percent must lie in (0, 50)");
        }
        chain.push_back(step);
    }
    return chain;
}

double percentile_linear(std::vector<double> values, double q) {
    if (values.empty()) throw DataError("percentile of empty sample");
    if (q < 0.0 || q > 100.0) throw ConfigError("percentile q outside [0, 100]");
    std::sort(values.begin(), values.end());
    const double rank = q / 100.0 * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(rank);
    if (lo + 1 >= values.size()) return values.back();
    const double w = rank - static_cast<double>(lo);
    return (1.0 - w) * values[lo] + w * values[lo + 1];
}

namespace {

void check_matrix(const Tensor& t, const char* what) {
    if (t.rank() != 2) throw ShapeError(std::string(what) + ": expected a rank-2 tensor");
}

// Applies one fitted step to a column value.
double forward_one(const FittedStep& f, std::size_t c, double x) {
    switch (f.step.op) {
        case ScaleOp::kStandardize: return (x - f.a[c]) / f.b[c];
        case ScaleOp::kNormalize: return x / f.a[c];
        case ScaleOp::kWinsorize: return std::clamp(x, f.a[c], f.b[c]);
        case ScaleOp::kMinMax:
            if (f.a[c] == f.b[c]) return 0.0;
            return -1.0 + 2.0 * (x - f.a[c]) / (f.b[c] - f.a[c]);
    }
    throw ConfigError("unknown scale op");
}

double inverse_one(const FittedStep& f, std::size_t c, double y) {
    switch (f.step.op) {
        case ScaleOp::kStandardize: return y * f.b[c] + f.a[c];
        case ScaleOp::kNormalize: return y * f.a[c];
        case ScaleOp::kWinsorize: return y;  // clipping has no inverse
        case ScaleOp::kMinMax:
            if (f.a[c] == f.b[c]) return f.a[c];
            return f.a[c] + (y + 1.0) * 0.5 * (f.b[c] - f.a[c]);
    }
    throw ConfigError("unknown scale op");
}

FittedStep fit_step(const Tensor& data, const ScaleStep& step, std::vector<std::string>& warnings) {
    const std::size_t n = data.rows();
    const std::size_t cols = data.cols();
    if (n == 0) throw DataError("fit_transform: no training rows");

    FittedStep f;
    f.step = step;
    f.a.resize(cols);
    f.b.resize(cols, 0.0);
    for (std::size_t c = 0; c < cols; ++c) {
        switch (step.op) {
            case ScaleOp::kStandardize: {
                double mean = 0.0;
                for (std::size_t i = 0; i < n; ++i) mean += data.at(i, c);
                mean /= static_cast<double>(n);
                double var = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = data.at(i, c) - mean;
                    var += d * d;
                }
                var /= static_cast<double>(n);
                if (var == 0.0) {
                    warnings.push_back("standardize: column " + std::to_string(c) +
                                       " has zero variance, left unscaled");
                    f.a[c] = 0.0;
                    f.b[c] = 1.0;
                } else {
                    f.a[c] = mean;
                    f.b[c] = std::sqrt(var);
                }
                break;
            }
            case ScaleOp::kNormalize: {
                double maxabs = 0.0;
                for (std::size_t i = 0; i < n; ++i) maxabs = std::max(maxabs, std::abs(data.at(i, c)));
                if (maxabs == 0.0) {
                    warnings.push_back("normalize: column " + std::to_string(c) +
                                       " is all zero, left unscaled");
                    maxabs = 1.0;
                }
                f.a[c] = maxabs;
                break;
            }
            case ScaleOp::kWinsorize: {
                std::vector<double> col(n);
                for (std::size_t i = 0; i < n; ++i) col[i] = data.at(i, c);
                f.a[c] = percentile_linear(col, step.winsor_p);
                f.b[c] = percentile_linear(col, 100.0 - step.winsor_p);
                break;
            }
            case ScaleOp::kMinMax: {
                double lo = data.at(0, c), hi = data.at(0, c);
                for (std::size_t i = 1; i < n; ++i) {
                    lo = std::min(lo, data.at(i, c));
                    hi = std::max(hi, data.at(i, c));
                }
                f.a[c] = lo;
                f.b[c] = hi;
                break;
            }
        }
    }
    return f;
}

} // namespace

TransformRecord fit_transform(const Tensor& train, const std::vector<ScaleStep>& chain) {
    check_matrix(train, "fit_transform");
    TransformRecord rec;
    Tensor work = train;
    for (const ScaleStep& step : chain) {
        const FittedStep f = fit_step(work, step, rec.warnings);
        for (std::size_t i = 0; i < work.rows(); ++i) {
            for (std::size_t c = 0; c < work.cols(); ++c) {
                work.at(i, c) = forward_one(f, c, work.at(i, c));
            }
        }
        rec.steps.push_back(f);
    }
    return rec;
}

void apply_transform(const TransformRecord& rec, Tensor& data) {
    check_matrix(data, "apply_transform");
    for (const FittedStep& f : rec.steps) {
        if (f.a.size() != data.cols()) {
            throw ShapeError("apply_transform: record fitted for " + std::to_string(f.a.size()) +
                             " columns, data has " + std::to_string(data.cols()));
        }
        for (std::size_t i = 0; i < data.rows(); ++i) {
            for (std::size_t c = 0; c < data.cols(); ++c) {
                data.at(i, c) = forward_one(f, c, data.at(i, c));
            }
        }
    }
}

void invert_transform(const TransformRecord& rec, Tensor& data) {
    check_matrix(data, "invert_transform");
    for (auto it = rec.steps.rbegin(); it != rec.steps.rend(); ++it) {
        if (it->a.size() != data.cols()) {
            throw ShapeError("invert_transform: record fitted for " + std::to_string(it->a.size()) +
                             " columns, data has " + std::to_string(data.cols()));
        }
        for (std::size_t i = 0; i < data.rows(); ++i) {
            for (std::size_t c = 0; c < data.cols(); ++c) {
                data.at(i, c) = inverse_one(*it, c, data.at(i, c));
            }
        }
    }
}

nlohmann::json TransformRecord::to_json() const {
    nlohmann::json steps_j = nlohmann::json::array();
    for (const FittedStep& f : steps) {
        steps_j.push_back({{"op", scale_op_name(f.step.op)},
                           {"winsor_p", f.step.winsor_p},
                           {"a", f.a},
                           {"b", f.b}});
    }
    return {{"steps", steps_j}, {"warnings", warnings}};
}

TransformRecord TransformRecord::from_json(const nlohmann::json& j) {
    try {
        TransformRecord rec;
        for (const nlohmann::json& sj : j.at("steps")) {
            FittedStep f;
            f.step.op = parse_scale_op(sj.at("op").get<std::string>());
            f.step.winsor_p = sj.value("winsor_p", 5.0);
            f.a = sj.at("a").get<std::vector<double>>();
            f.b = sj.at("b").get<std::vector<double>>();
            if (f.a.size() != f.b.size()) throw ConfigError("transform record: a/b length mismatch");
            rec.steps.push_back(std::move(f));
        }
        rec.warnings = j.value("warnings", std::vector<std::string>{});
        return rec;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("transform record: ") + e.what());
    }
}

} // namespace parkcast
