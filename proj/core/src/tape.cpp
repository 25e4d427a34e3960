#include "parkcast/tape.hpp"

#include <cmath>
#include <memory>

namespace parkcast {

Value Tape::push(Tensor value, BackwardFn backward) {
    nodes_.push_back(Node{std::move(value), nullptr, std::move(backward)});
    return Value{nodes_.size() - 1};
}

Value Tape::input(Tensor t) {
    if (t.size() == 0) throw ShapeError("Tape::input: empty tensor");
    return push(std::move(t), nullptr);
}

Value Tape::param(ParamTensor& p) {
    auto it = param_nodes_.find(&p);
    if (it != param_nodes_.end()) return Value{it->second};
    nodes_.push_back(Node{p.value, &p, nullptr});
    const std::size_t idx = nodes_.size() - 1;
    param_nodes_[&p] = idx;
    return Value{idx};
}

const Tensor& Tape::val(Value v) const {
    if (!v.valid() || v.idx >= nodes_.size()) throw Error("Tape::val: bad handle");
    return nodes_[v.idx].value;
}

double Tape::scalar(Value v) const {
    const Tensor& t = val(v);
    if (t.size() != 1) throw ShapeError("Tape::scalar: value has shape " + shape_str(t.shape()));
    return t[0];
}

const Tensor& Tape::cotangent(std::size_t idx) const {
    if (idx >= grads_.size() || grads_[idx].size() == 0) {
        throw Error("Tape::cotangent: node has no gradient yet");
    }
    return grads_[idx];
}

Tensor& Tape::grad_slot(std::size_t idx) {
    if (grads_[idx].size() == 0) grads_[idx] = Tensor(nodes_[idx].value.shape());
    return grads_[idx];
}

void Tape::accumulate(std::size_t idx, const Tensor& g) {
    require_same_shape(nodes_[idx].value, g, "Tape::accumulate");
    grad_slot(idx) += g;
}

void Tape::accumulate_rows(std::size_t idx, std::size_t row0, const Tensor& g) {
    Tensor& slot = grad_slot(idx);
    require_rank(slot, 2, "Tape::accumulate_rows target");
    require_rank(g, 2, "Tape::accumulate_rows update");
    if (g.cols() != slot.cols() || row0 + g.rows() > slot.rows()) {
        throw ShapeError("Tape::accumulate_rows: block " + shape_str(g.shape()) + " at row " +
                         std::to_string(row0) + " does not fit " + shape_str(slot.shape()));
    }
    double* dst = slot.data() + row0 * slot.cols();
    const double* src = g.data();
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] += src[i];
}

void Tape::accumulate_gemm(std::size_t idx, const Tensor& a, const Tensor& b) {
    linalg::gemm(a, b, grad_slot(idx), true);
}

void Tape::accumulate_gemm_tn(std::size_t idx, const Tensor& a, const Tensor& b) {
    linalg::gemm_tn(a, b, grad_slot(idx), true);
}

void Tape::accumulate_gemm_nt(std::size_t idx, const Tensor& a, const Tensor& b) {
    linalg::gemm_nt(a, b, grad_slot(idx), true);
}

Value Tape::add(Value a, Value b) {
    const Tensor& ta = val(a);
    const Tensor& tb = val(b);
    require_same_shape(ta, tb, "Tape::add");
    Tensor out = ta;
    out += tb;
    return push(std::move(out), [ai = a.idx, bi = b.idx](Tape& t, std::size_t self) {
        const Tensor& g = t.cotangent(self);
        t.accumulate(ai, g);
        t.accumulate(bi, g);
    });
}

Value Tape::sub(Value a, Value b) {
    const Tensor& ta = val(a);
    const Tensor& tb = val(b);
    require_same_shape(ta, tb, "Tape::sub");
    Tensor out = ta;
    out -= tb;
    return push(std::move(out), [ai = a.idx, bi = b.idx](Tape& t, std::size_t self) {
        const Tensor& g = t.cotangent(self);
        t.accumulate(ai, g);
        Tensor neg = g;
        neg *= -1.0;
        t.accumulate(bi, neg);
    });
}

Value Tape::mul(Value a, Value b) {
    const Tensor& ta = val(a);
    const Tensor& tb = val(b);
    require_same_shape(ta, tb, "Tape::mul");
    Tensor out = ta;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= tb[i];
    return push(std::move(out), [ai = a.idx, bi = b.idx](Tape& t, std::size_t self) {
        const Tensor& g = t.cotangent(self);
        const Tensor& va = t.node_value(ai);
        const Tensor& vb = t.node_value(bi);
        Tensor ga = g;
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= vb[i];
        t.accumulate(ai, ga);
        Tensor gb = g;
        for (std::size_t i = 0; i < gb.size(); ++i) gb[i] *= va[i];
        t.accumulate(bi, gb);
    });
}

Value Tape::scale(Value a, double s) {
    Tensor out = val(a);
    out *= s;
    return push(std::move(out), [ai = a.idx, s](Tape& t, std::size_t self) {
        Tensor g = t.cotangent(self);
        g *= s;
        t.accumulate(ai, g);
    });
}

Value Tape::matmul(Value a, Value b) {
    const Tensor& ta = val(a);
    const Tensor& tb = val(b);
    Tensor out;
    linalg::gemm(ta, tb, out);
    return push(std::move(out), [ai = a.idx, bi = b.idx](Tape& t, std::size_t self) {
        const Tensor& g = t.cotangent(self);
        t.accumulate_gemm_nt(ai, g, t.node_value(bi));    // dA += g B^T
        t.accumulate_gemm_tn(bi, t.node_value(ai), g);    // dB += A^T g
    });
}

Value Tape::add_rowvec(Value m, Value row) {
    const Tensor& tm = val(m);
    const Tensor& tr = val(row);
    require_rank(tm, 2, "Tape::add_rowvec lhs");
    if (tr.rank() != 1 || tr.dim(0) != tm.cols()) {
        throw ShapeError("Tape::add_rowvec: bias shape " + shape_str(tr.shape()) +
                         " does not match matrix " + shape_str(tm.shape()));
    }
    Tensor out = tm;
    const std::size_t n = tm.rows(), c = tm.cols();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < c; ++j) out[i * c + j] += tr[j];
    }
    return push(std::move(out), [mi = m.idx, ri = row.idx](Tape& t, std::size_t self) {
        const Tensor& g = t.cotangent(self);
        t.accumulate(mi, g);
        const std::size_t n = g.rows(), c = g.cols();
        Tensor gr({c});
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < c; ++j) gr[j] += g[i * c + j];
        }
        t.accumulate(ri, gr);
    });
}

Value Tape::sigmoid(Value a) {
    Tensor out = val(a);
    for (double& v : out.flat()) v = 1.0 / (1.0 + std::exp(-v));
    return push(std::move(out), [ai = a.idx](Tape& t, std::size_t self) {
        const Tensor& g = t.cotangent(self);
        const Tensor& y = t.node_value(self);
        Tensor ga = g;
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= y[i] * (1.0 - y[i]);
        t.accumulate(ai, ga);
    });
}

Value Tape::tanh(Value a) {
    Tensor out = val(a);
    for (double& v : out.flat()) v = std::tanh(v);
    return push(std::move(out), [ai = a.idx](Tape& t, std::size_t self) {
        const Tensor& g = t.cotangent(self);
        const Tensor& y = t.node_value(self);
        Tensor ga = g;
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= 1.0 - y[i] * y[i];
        t.accumulate(ai, ga);
    });
}

Value Tape::relu(Value a) {
    Tensor out = val(a);
    // 0*v instead of 0 so NaN stays visible to divergence checks.
    for (double& v : out.flat()) v = v > 0.0 ? v : 0.0 * v;
    return push(std::move(out), [ai = a.idx](Tape& t, std::size_t self) {
        const Tensor& g = t.cotangent(self);
        const Tensor& y = t.node_value(self);
        Tensor ga = g;
        for (std::size_t i = 0; i < ga.size(); ++i) {
            if (y[i] <= 0.0) ga[i] = 0.0;
        }
        t.accumulate(ai, ga);
    });
}

Value Tape::apply(Value a, Activation act) {
    switch (act) {
        case Activation::kIdentity: return a;
        case Activation::kRelu: return relu(a);
        case Activation::kSigmoid: return sigmoid(a);
        case Activation::kTanh: return tanh(a);
    }
    throw Error("Tape::apply: bad activation");
}

Value Tape::concat_cols(const std::vector<Value>& parts) {
    if (parts.empty()) throw ShapeError("Tape::concat_cols: no inputs");
    std::size_t rows = 0, total = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const Tensor& t = val(parts[i]);
        require_rank(t, 2, "Tape::concat_cols");
        if (i == 0) {
            rows = t.rows();
        } else if (t.rows() != rows) {
            throw ShapeError("Tape::concat_cols: row mismatch " + std::to_string(t.rows()) +
                             " vs " + std::to_string(rows));
        }
        total += t.cols();
    }
    Tensor out({rows, total});
    std::vector<std::size_t> offs(parts.size());
    std::size_t off = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const Tensor& t = val(parts[i]);
        offs[i] = off;
        const std::size_t c = t.cols();
        for (std::size_t r = 0; r < rows; ++r) {
            const double* src = t.data() + r * c;
            double* dst = out.data() + r * total + off;
            std::copy(src, src + c, dst);
        }
        off += c;
    }
    std::vector<std::size_t> idxs;
    idxs.reserve(parts.size());
    for (Value v : parts) idxs.push_back(v.idx);
    return push(std::move(out),
                [idxs = std::move(idxs), offs = std::move(offs)](Tape& t, std::size_t self) {
                    const Tensor& g = t.cotangent(self);
                    const std::size_t rows = g.rows(), total = g.cols();
                    for (std::size_t i = 0; i < idxs.size(); ++i) {
                        const Tensor& vi = t.node_value(idxs[i]);
                        const std::size_t c = vi.cols();
                        Tensor gi({rows, c});
                        for (std::size_t r = 0; r < rows; ++r) {
                            const double* src = g.data() + r * total + offs[i];
                            std::copy(src, src + c, gi.data() + r * c);
                        }
                        t.accumulate(idxs[i], gi);
                    }
                });
}

Value Tape::concat_rows(const std::vector<Value>& parts) {
    if (parts.empty()) throw ShapeError("Tape::concat_rows: no inputs");
    std::size_t cols = 0, total = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const Tensor& t = val(parts[i]);
        require_rank(t, 2, "Tape::concat_rows");
        if (i == 0) {
            cols = t.cols();
        } else if (t.cols() != cols) {
            throw ShapeError("Tape::concat_rows: column mismatch " + std::to_string(t.cols()) +
                             " vs " + std::to_string(cols));
        }
        total += t.rows();
    }
    if (parts.size() == 1) return parts[0];
    Tensor out({total, cols});
    std::vector<std::size_t> row_offs(parts.size());
    std::size_t off = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const Tensor& t = val(parts[i]);
        row_offs[i] = off;
        std::copy(t.data(), t.data() + t.size(), out.data() + off * cols);
        off += t.rows();
    }
    std::vector<std::size_t> idxs;
    idxs.reserve(parts.size());
    for (Value v : parts) idxs.push_back(v.idx);
    return push(std::move(out),
                [idxs = std::move(idxs), row_offs = std::move(row_offs)](Tape& t, std::size_t self) {
                    const Tensor& g = t.cotangent(self);
                    const std::size_t cols = g.cols();
                    for (std::size_t i = 0; i < idxs.size(); ++i) {
                        const std::size_t r = t.node_value(idxs[i]).rows();
                        Tensor gi({r, cols});
                        const double* src = g.data() + row_offs[i] * cols;
                        std::copy(src, src + r * cols, gi.data());
                        t.accumulate(idxs[i], gi);
                    }
                });
}

Value Tape::slice_rows(Value a, std::size_t row0, std::size_t rows) {
    const Tensor& ta = val(a);
    require_rank(ta, 2, "Tape::slice_rows");
    if (rows == 0 || row0 + rows > ta.rows()) {
        throw ShapeError("Tape::slice_rows: rows [" + std::to_string(row0) + ", " +
                         std::to_string(row0 + rows) + ") out of range for " +
                         shape_str(ta.shape()));
    }
    const std::size_t cols = ta.cols();
    Tensor out({rows, cols});
    const double* src = ta.data() + row0 * cols;
    std::copy(src, src + rows * cols, out.data());
    return push(std::move(out), [ai = a.idx, row0](Tape& t, std::size_t self) {
        t.accumulate_rows(ai, row0, t.cotangent(self));
    });
}

Value Tape::reshape(Value a, Shape shape) {
    Tensor out = val(a).reshaped(std::move(shape));
    return push(std::move(out), [ai = a.idx](Tape& t, std::size_t self) {
        const Tensor& g = t.cotangent(self);
        t.accumulate(ai, g.reshaped(t.node_value(ai).shape()));
    });
}

Value Tape::dropout(Value a, double rate, Rng& rng, bool training) {
    if (rate < 0.0 || rate >= 1.0) {
        throw ConfigError("dropout rate must be in [0,1), got " + std::to_string(rate));
    }
    if (!training || rate == 0.0) return a;
    const Tensor& ta = val(a);
    const double keep_scale = 1.0 / (1.0 - rate);
    auto mask = std::make_shared<Tensor>(ta.shape());
    Tensor out = ta;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double m = rng.uniform() < rate ? 0.0 : keep_scale;
        (*mask)[i] = m;
        out[i] *= m;
    }
    return push(std::move(out), [ai = a.idx, mask](Tape& t, std::size_t self) {
        Tensor g = t.cotangent(self);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] *= (*mask)[i];
        t.accumulate(ai, g);
    });
}

Value Tape::sum(Value a) {
    const Tensor& ta = val(a);
    double s = 0.0;
    for (double v : ta.flat()) s += v;
    return push(Tensor::scalar(s), [ai = a.idx](Tape& t, std::size_t self) {
        const double g = t.cotangent(self)[0];
        Tensor ga = Tensor::full(t.node_value(ai).shape(), g);
        t.accumulate(ai, ga);
    });
}

Value Tape::mean_squared_error(Value pred, const Tensor& target) {
    const Tensor& p = val(pred);
    require_same_shape(p, target, "Tape::mean_squared_error");
    auto diff = std::make_shared<Tensor>(p);
    *diff -= target;
    double s = 0.0;
    for (double v : diff->flat()) s += v * v;
    const double inv_n = 1.0 / static_cast<double>(p.size());
    return push(Tensor::scalar(s * inv_n), [pi = pred.idx, diff, inv_n](Tape& t, std::size_t self) {
        const double g = t.cotangent(self)[0];
        Tensor gp = *diff;
        gp *= 2.0 * inv_n * g;
        t.accumulate(pi, gp);
    });
}

Value Tape::custom(Tensor value, std::vector<Value> inputs, BackwardFn backward) {
    for (Value v : inputs) {
        if (!v.valid() || v.idx >= nodes_.size()) throw Error("Tape::custom: bad input handle");
    }
    return push(std::move(value), std::move(backward));
}

void Tape::backward(Value root) {
    const Tensor& r = val(root);
    if (r.size() != 1) {
        throw ShapeError("Tape::backward: root must be scalar, got " + shape_str(r.shape()));
    }
    grads_.clear();
    grads_.resize(nodes_.size());
    grads_[root.idx] = Tensor::full(r.shape(), 1.0);
    for (std::size_t i = root.idx + 1; i-- > 0;) {
        if (grads_[i].size() == 0) continue;
        Node& n = nodes_[i];
        if (n.backward) n.backward(*this, i);
        if (n.leaf) n.leaf->grad += grads_[i];
    }
}

} // namespace parkcast
