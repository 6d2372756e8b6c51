#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <json.hpp>
#include "mtgcd/core/serialize.hpp"
#include "mtgcd/losses/losses.hpp"
#include "mtgcd/scenegen/json.hpp"
#include "mtgcd/vecfield/json.hpp"

namespace mtgcd::harness {

struct OptimizerConfig {
    double lr0 = 0.01;
    double momentum = 0.9;
    double weight_decay = 5e-4;
};

struct ScheduleConfig {
    int64_t max_iters = 40000;
    double poly_power = 0.9;
};

struct AugmentConfig {
    bool hflip = true;
    bool vflip = true;
    bool rot90 = true;
    bool color_jitter = true;
    double jitter = 0.2; // brightness/contrast/saturation amplitude
};

struct DataConfig {
    std::string root = "data";
    int train_pairs = 256;
    int val_pairs = 32;
    int test_in_pairs = 32;
    int test_out_pairs = 32;
    scenegen::SceneDistribution base;
    scenegen::SceneDistribution shifted; // out-domain split

    DataConfig() {
        // Out-domain shift: steeper tilts and denser, slightly smaller blocks.
        shifted.tilt_min = 0.25;
        shifted.tilt_max = 0.75;
        shifted.buildings_min = 3;
        shifted.buildings_max = 7;
        shifted.side_max = 18.0;
    }
};

// The one experiment document every subcommand consumes. The defaults are the
// full-scale training recipe; desk-scale runs override the budget knobs in JSON.
struct ExperimentConfig {
    uint64_t seed = 42; // master seed: init, shuffling, augmentation, datagen
    DataConfig data;
    model::ModelConfig model;
    losses::LossConfig loss;
    vecfield::BinTable bins = vecfield::BinTable::standard();
    OptimizerConfig optimizer;
    ScheduleConfig schedule;
    int batch_size = 16;
    int crop_size = 128;
    AugmentConfig augment;
    int64_t eval_interval = 200;
    std::string output_dir = "runs/exp";

    void validate() const {
        model.validate();
        loss.validate();
        bins.validate();
        if (optimizer.lr0 <= 0) throw ConfigError("lr0 must be positive");
        if (optimizer.momentum < 0 || optimizer.momentum >= 1)
            throw ConfigError("momentum must lie in [0, 1)");
        if (optimizer.weight_decay < 0) throw ConfigError("weight_decay must be non-negative");
        if (schedule.max_iters < 1) throw ConfigError("max_iters must be at least 1");
        if (schedule.poly_power <= 0) throw ConfigError("poly_power must be positive");
        if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
        if (crop_size < model.stride || crop_size % model.stride != 0)
            throw ConfigError("crop_size must be a positive multiple of the encoder stride");
        if (eval_interval < 1) throw ConfigError("eval_interval must be at least 1");
        if (bins.categories() != model.offset_bins)
            throw ConfigError("bin table category count disagrees with offset_bins");
        if (loss.field_mode != model.vector_mode)
            throw ConfigError("loss field_mode disagrees with the model's vector_mode");
        if (output_dir.empty()) throw ConfigError("output_dir must be set");
    }
};

inline void to_json(nlohmann::json& j, const OptimizerConfig& c) {
    j = nlohmann::json{
        {"lr0", c.lr0}, {"momentum", c.momentum}, {"weight_decay", c.weight_decay}};
}
inline void from_json(const nlohmann::json& j, OptimizerConfig& c) {
    OptimizerConfig d;
    c.lr0 = j.value("lr0", d.lr0);
    c.momentum = j.value("momentum", d.momentum);
    c.weight_decay = j.value("weight_decay", d.weight_decay);
}

inline void to_json(nlohmann::json& j, const ScheduleConfig& c) {
    j = nlohmann::json{{"max_iters", c.max_iters}, {"poly_power", c.poly_power}};
}
inline void from_json(const nlohmann::json& j, ScheduleConfig& c) {
    ScheduleConfig d;
    c.max_iters = j.value("max_iters", d.max_iters);
    c.poly_power = j.value("poly_power", d.poly_power);
}

inline void to_json(nlohmann::json& j, const AugmentConfig& c) {
    j = nlohmann::json{{"hflip", c.hflip},
                       {"vflip", c.vflip},
                       {"rot90", c.rot90},
                       {"color_jitter", c.color_jitter},
                       {"jitter", c.jitter}};
}
inline void from_json(const nlohmann::json& j, AugmentConfig& c) {
    AugmentConfig d;
    c.hflip = j.value("hflip", d.hflip);
    c.vflip = j.value("vflip", d.vflip);
    c.rot90 = j.value("rot90", d.rot90);
    c.color_jitter = j.value("color_jitter", d.color_jitter);
    c.jitter = j.value("jitter", d.jitter);
}

inline void to_json(nlohmann::json& j, const DataConfig& c) {
    j = nlohmann::json{{"root", c.root},
                       {"train_pairs", c.train_pairs},
                       {"val_pairs", c.val_pairs},
                       {"test_in_pairs", c.test_in_pairs},
                       {"test_out_pairs", c.test_out_pairs},
                       {"base", c.base},
                       {"shifted", c.shifted}};
}
inline void from_json(const nlohmann::json& j, DataConfig& c) {
    DataConfig d;
    c.root = j.value("root", d.root);
    c.train_pairs = j.value("train_pairs", d.train_pairs);
    c.val_pairs = j.value("val_pairs", d.val_pairs);
    c.test_in_pairs = j.value("test_in_pairs", d.test_in_pairs);
    c.test_out_pairs = j.value("test_out_pairs", d.test_out_pairs);
    if (j.contains("base")) c.base = j.at("base").get<scenegen::SceneDistribution>();
    if (j.contains("shifted")) c.shifted = j.at("shifted").get<scenegen::SceneDistribution>();
}

inline void to_json(nlohmann::json& j, const ExperimentConfig& c) {
    j = nlohmann::json{{"seed", c.seed},
                       {"data", c.data},
                       {"model", c.model},
                       {"loss", c.loss},
                       {"bins", c.bins},
                       {"optimizer", c.optimizer},
                       {"schedule", c.schedule},
                       {"batch_size", c.batch_size},
                       {"crop_size", c.crop_size},
                       {"augment", c.augment},
                       {"eval_interval", c.eval_interval},
                       {"output_dir", c.output_dir}};
}
inline void from_json(const nlohmann::json& j, ExperimentConfig& c) {
    ExperimentConfig d;
    c.seed = j.value("seed", d.seed);
    if (j.contains("data")) c.data = j.at("data").get<DataConfig>();
    if (j.contains("model")) c.model = j.at("model").get<model::ModelConfig>();
    if (j.contains("loss")) c.loss = j.at("loss").get<losses::LossConfig>();
    if (j.contains("bins")) c.bins = j.at("bins").get<vecfield::BinTable>();
    if (j.contains("optimizer")) c.optimizer = j.at("optimizer").get<OptimizerConfig>();
    if (j.contains("schedule")) c.schedule = j.at("schedule").get<ScheduleConfig>();
    c.batch_size = j.value("batch_size", d.batch_size);
    c.crop_size = j.value("crop_size", d.crop_size);
    if (j.contains("augment")) c.augment = j.at("augment").get<AugmentConfig>();
    c.eval_interval = j.value("eval_interval", d.eval_interval);
    c.output_dir = j.value("output_dir", d.output_dir);
}

// Reads a config document and applies the MTGCD_SEED override when present.
inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(io::read_text(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse config " + path.string() + ": " + e.what());
    }
    ExperimentConfig cfg = j.get<ExperimentConfig>();
    if (const char* env = std::getenv("MTGCD_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0')
            throw ConfigError("MTGCD_SEED must be an unsigned integer, got '" + std::string(env) +
                              "'");
        cfg.seed = static_cast<uint64_t>(v);
    }
    cfg.validate();
    return cfg;
}

} // namespace mtgcd::harness
