#include "parkcast/params.hpp"

#include <cmath>

namespace parkcast {

ParamTensor& ParamStore::add(const std::string& name, Shape shape, ParamTensor::Kind kind) {
    if (name.empty()) throw Error("ParamStore::add: empty name");
    if (index_.count(name)) throw Error("ParamStore::add: duplicate parameter '" + name + "'");
    auto p = std::make_unique<ParamTensor>();
    p->name = name;
    p->kind = kind;
    p->value = Tensor(shape);
    p->grad = Tensor(std::move(shape));
    index_[name] = items_.size();
    items_.push_back(std::move(p));
    return *items_.back();
}

ParamTensor& ParamStore::get(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw Error("ParamStore::get: unknown parameter '" + name + "'");
    return *items_[it->second];
}

const ParamTensor& ParamStore::get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw Error("ParamStore::get: unknown parameter '" + name + "'");
    return *items_[it->second];
}

std::size_t ParamStore::parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : items_) n += p->value.size();
    return n;
}

void ParamStore::zero_grads() {
    for (auto& p : items_) {
        std::fill(p->grad.flat().begin(), p->grad.flat().end(), 0.0);
    }
}

std::vector<ParamTensor*> ParamStore::all() {
    std::vector<ParamTensor*> out;
    out.reserve(items_.size());
    for (auto& p : items_) out.push_back(p.get());
    return out;
}

std::vector<const ParamTensor*> ParamStore::all() const {
    std::vector<const ParamTensor*> out;
    out.reserve(items_.size());
    for (const auto& p : items_) out.push_back(p.get());
    return out;
}

namespace {

// fan_in/fan_out per tensor rank: vectors are treated as (n, 1), matrices as
// (in, out), rank-3 banks (K, in, out) as (K*in, out).
std::pair<std::size_t, std::size_t> fans(const Tensor& t) {
    switch (t.rank()) {
        case 1:
            return {t.dim(0), 1};
        case 2:
            return {t.dim(0), t.dim(1)};
        case 3:
            return {t.dim(0) * t.dim(1), t.dim(2)};
        default:
            throw ShapeError("glorot init: unsupported rank " + std::to_string(t.rank()));
    }
}

} // namespace

void ParamStore::init(Rng& rng) {
    for (auto& p : items_) {
        switch (p->kind) {
            case ParamTensor::Kind::kWeight: {
                auto [fi, fo] = fans(p->value);
                const double bound = std::sqrt(6.0 / static_cast<double>(fi + fo));
                for (double& v : p->value.flat()) v = rng.uniform(-bound, bound);
                break;
            }
            case ParamTensor::Kind::kBias:
                std::fill(p->value.flat().begin(), p->value.flat().end(), 0.0);
                break;
            case ParamTensor::Kind::kForgetBias:
                std::fill(p->value.flat().begin(), p->value.flat().end(), 1.0);
                break;
        }
    }
}

} // namespace parkcast
