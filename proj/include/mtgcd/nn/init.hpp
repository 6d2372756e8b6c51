#pragma once

#include <cmath>

#include "mtgcd/core/rng.hpp"
#include "mtgcd/nn/autograd.hpp"

namespace mtgcd::nn {

// He-normal for conv weights feeding ReLU: std = sqrt(2 / fan_in).
template <typename T>
void kaiming_normal(Tensor<T>& w, Rng& rng) {
    if (w.ndim() != 4) throw ConfigError("kaiming_normal: expects {Cout,Cin,K,K}");
    const double fan_in = double(w.dim(1)) * w.dim(2) * w.dim(3);
    const double stddev = std::sqrt(2.0 / fan_in);
    for (int64_t i = 0; i < w.numel(); ++i) w[i] = static_cast<T>(rng.normal(0.0, stddev));
}

} // namespace mtgcd::nn
