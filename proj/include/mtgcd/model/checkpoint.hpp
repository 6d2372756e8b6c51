#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>
#include "mtgcd/core/serialize.hpp"
#include "mtgcd/model/network.hpp"

namespace mtgcd::model {

// On-disk layout: <dir>/manifest.json describing the config, training
// position and every tensor (name, kind, shape, offset into the blob), plus
// <dir>/params.f32 holding all values as little-endian float32 in manifest
// order. Buffers (running norm stats) ride along with the parameters.

struct CheckpointInfo {
    ModelConfig config;
    int64_t iteration = 0;
    nlohmann::json metrics; // free-form snapshot, e.g. best validation IoU
};

template <typename T>
void save_checkpoint(const std::filesystem::path& dir, MTGCDNet<T>& net, int64_t iteration,
                     const nlohmann::json& metrics = nlohmann::json::object()) {
    std::filesystem::create_directories(dir);
    ParamMap<T> m = net.named_tensors();

    nlohmann::json entries = nlohmann::json::array();
    std::vector<float> blob;
    auto append = [&](const std::string& name, const char* kind, const std::vector<int>& shape,
                      const T* data, int64_t count) {
        entries.push_back({{"name", name},
                           {"kind", kind},
                           {"shape", shape},
                           {"offset", static_cast<int64_t>(blob.size())},
                           {"count", count}});
        for (int64_t i = 0; i < count; ++i) blob.push_back(static_cast<float>(data[i]));
    };
    for (auto& [name, v] : m.params)
        append(name, "param", v->value.shape(), v->value.data(), v->value.numel());
    for (auto& [name, t] : m.buffers) append(name, "buffer", t->shape(), t->data(), t->numel());

    nlohmann::json manifest{{"format", "mtgcd-checkpoint"},
                            {"version", 1},
                            {"model", net.config()},
                            {"iteration", iteration},
                            {"metrics", metrics},
                            {"tensors", entries}};
    io::write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    io::write_f32(dir / "params.f32", blob.data(), blob.size());
}

inline CheckpointInfo read_checkpoint_info(const std::filesystem::path& dir) {
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(io::read_text(dir / "manifest.json"));
    } catch (const nlohmann::json::exception& e) {
        throw IoError("bad checkpoint manifest in " + dir.string() + ": " + e.what());
    }
    if (manifest.value("format", "") != "mtgcd-checkpoint")
        throw ConfigError("not a checkpoint manifest: " + (dir / "manifest.json").string());
    CheckpointInfo info;
    info.config = manifest.at("model").get<ModelConfig>();
    info.iteration = manifest.value("iteration", int64_t(0));
    info.metrics = manifest.value("metrics", nlohmann::json::object());
    return info;
}

// Rebuilds the network described by the manifest and fills every tensor.
// Tensor sets must match exactly in both directions.
template <typename T>
MTGCDNet<T> load_checkpoint(const std::filesystem::path& dir, CheckpointInfo* info_out = nullptr) {
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(io::read_text(dir / "manifest.json"));
    } catch (const nlohmann::json::exception& e) {
        throw IoError("bad checkpoint manifest in " + dir.string() + ": " + e.what());
    }
    if (manifest.value("format", "") != "mtgcd-checkpoint")
        throw ConfigError("not a checkpoint manifest: " + (dir / "manifest.json").string());

    CheckpointInfo info;
    info.config = manifest.at("model").get<ModelConfig>();
    info.iteration = manifest.value("iteration", int64_t(0));
    info.metrics = manifest.value("metrics", nlohmann::json::object());

    MTGCDNet<T> net(info.config, /*init_seed=*/0);
    ParamMap<T> m = net.named_tensors();
    const std::vector<float> blob = io::read_f32(dir / "params.f32");

    auto fill = [&](const nlohmann::json& e, T* dst, const std::vector<int>& shape) {
        const auto want = e.at("shape").get<std::vector<int>>();
        if (want != shape)
            throw ConfigError("checkpoint tensor '" + e.at("name").get<std::string>() +
                              "' shape mismatch");
        const int64_t off = e.at("offset").get<int64_t>();
        const int64_t count = e.at("count").get<int64_t>();
        if (off < 0 || off + count > static_cast<int64_t>(blob.size()))
            throw IoError("checkpoint blob out of range for '" +
                          e.at("name").get<std::string>() + "'");
        for (int64_t i = 0; i < count; ++i) dst[i] = static_cast<T>(blob[off + i]);
    };

    size_t matched = 0;
    for (const auto& e : manifest.at("tensors")) {
        const std::string name = e.at("name").get<std::string>();
        const std::string kind = e.at("kind").get<std::string>();
        bool found = false;
        if (kind == "param") {
            for (auto& [n, v] : m.params)
                if (n == name) {
                    fill(e, v->value.data(), v->value.shape());
                    found = true;
                    break;
                }
        } else if (kind == "buffer") {
            for (auto& [n, t] : m.buffers)
                if (n == name) {
                    fill(e, t->data(), t->shape());
                    found = true;
                    break;
                }
        } else {
            throw ConfigError("checkpoint tensor '" + name + "' has unknown kind '" + kind + "'");
        }
        if (!found) throw ConfigError("checkpoint tensor '" + name + "' not present in model");
        ++matched;
    }
    if (matched != m.params.size() + m.buffers.size())
        throw ConfigError("checkpoint is missing tensors the model requires");
    if (info_out) *info_out = info;
    return net;
}

} // namespace mtgcd::model
