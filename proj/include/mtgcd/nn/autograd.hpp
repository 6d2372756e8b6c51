#pragma once

#include <functional>
#include <memory>
#include <unordered_set>
#include <utility>
#include <vector>

#include "mtgcd/core/errors.hpp"
#include "mtgcd/core/tensor.hpp"

namespace mtgcd::nn {

// Reverse-mode tape. Nodes own their value; gradients are allocated lazily on
// the first backward pass. Ops that see only non-differentiable inputs create
// detached nodes, so evaluation does not retain a graph.

template <typename T>
struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    bool requires_grad = false;
    bool grad_ready = false;
    std::vector<std::shared_ptr<Node<T>>> parents;
    std::function<void(Node<T>&)> backward_fn;

    explicit Node(Tensor<T> v) : value(std::move(v)) {}

    Tensor<T>& ensure_grad() {
        if (!grad_ready) {
            grad = Tensor<T>::zeros_like(value);
            grad_ready = true;
        }
        return grad;
    }
    void zero_grad() {
        if (grad_ready) grad.fill(T(0));
    }
};

template <typename T>
using Var = std::shared_ptr<Node<T>>;

namespace detail {
inline bool& grad_enabled_flag() {
    static thread_local bool enabled = true;
    return enabled;
}
} // namespace detail

struct NoGrad {
    bool previous;
    NoGrad() : previous(detail::grad_enabled_flag()) { detail::grad_enabled_flag() = false; }
    ~NoGrad() { detail::grad_enabled_flag() = previous; }
    NoGrad(const NoGrad&) = delete;
    NoGrad& operator=(const NoGrad&) = delete;
};

inline bool grad_enabled() { return detail::grad_enabled_flag(); }

template <typename T>
Var<T> make_leaf(Tensor<T> value, bool requires_grad = false) {
    auto n = std::make_shared<Node<T>>(std::move(value));
    n->requires_grad = requires_grad;
    return n;
}

template <typename T>
Var<T> make_node(Tensor<T> value, std::vector<Var<T>> parents,
                 std::function<void(Node<T>&)> backward_fn) {
    auto n = std::make_shared<Node<T>>(std::move(value));
    bool needs = false;
    if (grad_enabled()) {
        for (const auto& p : parents)
            if (p && p->requires_grad) {
                needs = true;
                break;
            }
    }
    if (needs) {
        n->requires_grad = true;
        n->parents = std::move(parents);
        n->backward_fn = std::move(backward_fn);
    }
    return n;
}

// Runs one reverse pass from `root`, accumulating into each reachable
// parameter's grad. `seed` defaults to ones (the usual scalar-loss case).
template <typename T>
void backward(const Var<T>& root, const Tensor<T>* seed = nullptr) {
    if (!root) throw NumericalError("backward on null variable");
    if (!root->requires_grad) return;

    if (seed) {
        if (!seed->same_shape(root->value))
            throw NumericalError("backward seed shape mismatch");
        Tensor<T>& g = root->ensure_grad();
        for (int64_t i = 0; i < g.numel(); ++i) g[i] += (*seed)[i];
    } else {
        Tensor<T>& g = root->ensure_grad();
        for (int64_t i = 0; i < g.numel(); ++i) g[i] += T(1);
    }

    // Iterative postorder so deep graphs cannot blow the call stack.
    std::vector<Node<T>*> order;
    std::unordered_set<Node<T>*> seen;
    std::vector<std::pair<Node<T>*, size_t>> stack;
    stack.emplace_back(root.get(), 0);
    seen.insert(root.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node<T>* p = node->parents[next++].get();
            if (p && p->requires_grad && !seen.count(p)) {
                seen.insert(p);
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    // Postorder lists parents before children; walk reversed so every node's
    // grad is complete before it pushes into its parents.
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node<T>* n = *it;
        if (n->backward_fn) {
            n->ensure_grad();
            n->backward_fn(*n);
        }
    }
}

} // namespace mtgcd::nn
