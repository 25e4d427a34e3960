#pragma once

#include <string>

#include "parkcast/error.hpp"

namespace parkcast {

enum class Activation { kIdentity, kRelu, kSigmoid, kTanh };

inline const char* activation_name(Activation a) {
    switch (a) {
        case Activation::kIdentity: return "identity";
        case Activation::kRelu: return "relu";
        case Activation::kSigmoid: return "sigmoid";
        case Activation::kTanh: return "tanh";
    }
    throw Error("activation_name: bad enum value");
}

inline Activation parse_activation(const std::string& s) {
    if (s == "identity") return Activation::kIdentity;
    if (s == "relu") return Activation::kRelu;
    if (s == "sigmoid") return Activation::kSigmoid;
    if (s == "tanh") return Activation::kTanh;
    throw ConfigError("unknown activation '" + s + "'");
}

} // namespace parkcast
