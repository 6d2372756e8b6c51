#pragma once

#include <cmath>
#include <vector>

#include "mtgcd/core/errors.hpp"
#include "mtgcd/nn/autograd.hpp"

namespace mtgcd::nn {

// SGD with classic momentum and decoupled-from-graph weight decay:
//   v <- mu * v + (g + wd * w);  w <- w - lr * v
template <typename T>
class SgdOptimizer {
  public:
    SgdOptimizer(std::vector<Var<T>> params, T momentum, T weight_decay)
        : params_(std::move(params)), momentum_(momentum), weight_decay_(weight_decay) {
        velocity_.reserve(params_.size());
        for (const auto& p : params_) velocity_.push_back(Tensor<T>::zeros_like(p->value));
    }

    void step(T lr) {
        for (size_t i = 0; i < params_.size(); ++i) {
            auto& p = *params_[i];
            if (!p.grad_ready) continue; // parameter unreachable this pass
            Tensor<T>& v = velocity_[i];
            for (int64_t j = 0; j < p.value.numel(); ++j) {
                const T g = p.grad[j] + weight_decay_ * p.value[j];
                v[j] = momentum_ * v[j] + g;
                p.value[j] -= lr * v[j];
            }
        }
    }

    void zero_grad() {
        for (auto& p : params_) p->zero_grad();
    }

    // Any non-finite gradient anywhere; checked before stepping so a bad batch
    // cannot poison the weights.
    bool grads_finite() const {
        for (const auto& p : params_) {
            if (!p->grad_ready) continue;
            for (int64_t j = 0; j < p->grad.numel(); ++j)
                if (!std::isfinite(static_cast<double>(p->grad[j]))) return false;
        }
        return true;
    }

    const std::vector<Var<T>>& params() const { return params_; }

  private:
    std::vector<Var<T>> params_;
    std::vector<Tensor<T>> velocity_;
    T momentum_;
    T weight_decay_;
};

} // namespace mtgcd::nn
