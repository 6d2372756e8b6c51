#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "mtgcd/harness/config.hpp"
#include "mtgcd/io/dataset.hpp"
#include "mtgcd/scenegen/pair.hpp"
#include "mtgcd/scenegen/sampler.hpp"

namespace mtgcd::harness {

// Fixed per-split salts so each split draws an independent, reproducible
// stream from the master seed regardless of generation order.
inline constexpr uint64_t kTrainSalt = 1;
inline constexpr uint64_t kValSalt = 2;
inline constexpr uint64_t kTestInSalt = 3;
inline constexpr uint64_t kTestOutSalt = 4;

inline uint64_t split_salt(const std::string& split) {
    if (split == "train") return kTrainSalt;
    if (split == "val") return kValSalt;
    if (split == "test_in") return kTestInSalt;
    if (split == "test_out") return kTestOutSalt;
    throw ConfigError("unknown split '" + split + "' (expected train, val, test_in, test_out)");
}

inline std::string pair_dir_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "pair_%04d", index);
    return buf;
}

// Generates one split under root/<split>/pair_NNNN. Each pair's seed depends
// only on (master_seed, split, index), so regeneration is stable even when
// counts change.
inline std::vector<std::filesystem::path> generate_split(const std::filesystem::path& root,
                                                         const std::string& split,
                                                         const scenegen::SceneDistribution& dist,
                                                         int count, uint64_t master_seed) {
    const uint64_t salt = split_salt(split);
    const std::filesystem::path dir = root / split;
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        const uint64_t seed = Rng(master_seed).fork(salt).fork(uint64_t(i) + 1).seed();
        const scenegen::SceneSpec scene = scenegen::sample_scene_seeded(dist, seed);
        const scenegen::SamplePair pair = scenegen::make_pair(scene);
        const std::filesystem::path pdir = dir / pair_dir_name(i);
        io::write_pair(pdir, pair, scene);
        out.push_back(pdir);
    }
    return out;
}

// All four splits. test_out draws from the shifted distribution; the other
// three share the base distribution with disjoint seed streams.
inline void generate_dataset(const ExperimentConfig& cfg, const std::string& root_override = {}) {
    const std::filesystem::path root = root_override.empty() ? cfg.data.root : root_override;
    generate_split(root, "train", cfg.data.base, cfg.data.train_pairs, cfg.seed);
    generate_split(root, "val", cfg.data.base, cfg.data.val_pairs, cfg.seed);
    generate_split(root, "test_in", cfg.data.base, cfg.data.test_in_pairs, cfg.seed);
    generate_split(root, "test_out", cfg.data.shifted, cfg.data.test_out_pairs, cfg.seed);
}

// Loads every pair of a split into memory. Desk-scale datasets fit easily.
inline std::vector<scenegen::SamplePair> load_split(const std::filesystem::path& root,
                                                    const std::string& split) {
    split_salt(split); // validates the name
    const auto dirs = io::list_pairs(root / split);
    if (dirs.empty())
        throw IoError("no pairs found under " + (root / split).string() + " (run datagen first)");
    std::vector<scenegen::SamplePair> pairs;
    pairs.reserve(dirs.size());
    for (const auto& d : dirs) pairs.push_back(io::read_pair(d).pair);
    return pairs;
}

} // namespace mtgcd::harness
