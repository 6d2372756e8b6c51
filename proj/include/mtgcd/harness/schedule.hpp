#pragma once

#include <cmath>

#include "mtgcd/harness/config.hpp"

namespace mtgcd::harness {

inline double poly_lr(int64_t iter, double lr0, int64_t max_iters, double power) {
    if (iter < 0 || iter > max_iters) throw ConfigError("poly_lr: iteration out of range");
    return lr0 * std::pow(1.0 - static_cast<double>(iter) / static_cast<double>(max_iters), power);
}

inline double poly_lr(int64_t iter, const ExperimentConfig& cfg) {
    return poly_lr(iter, cfg.optimizer.lr0, cfg.schedule.max_iters, cfg.schedule.poly_power);
}

} // namespace mtgcd::harness
