#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "mtgcd/harness/evaluate.hpp"
#include "mtgcd/harness/train.hpp"

namespace mtgcd::harness {

struct AblationRow {
    std::string name;
    uint64_t seed = 0;
    int64_t best_iter = -1;
    double val_iou = 0.0;
    double test_in_iou = 0.0, test_in_f1 = 0.0;
    double test_out_iou = 0.0, test_out_f1 = 0.0;
};

// Grid file: {"runs": [{"name": "...", "overrides": {...}}, ...]} where each
// overrides object is a JSON merge patch against the base experiment config.
inline nlohmann::json load_grid(const std::filesystem::path& path) {
    nlohmann::json grid;
    try {
        grid = nlohmann::json::parse(io::read_text(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad ablation grid " + path.string() + ": " + e.what());
    }
    if (!grid.contains("runs") || !grid.at("runs").is_array() || grid.at("runs").empty())
        throw ConfigError("ablation grid " + path.string() + " has no runs array");
    return grid;
}

inline void write_ablation_csv(const std::filesystem::path& path,
                               const std::vector<AblationRow>& rows) {
    std::string text = "name,seed,best_iter,val_iou,test_in_iou,test_in_f1,test_out_iou,test_out_f1\n";
    for (const auto& r : rows) {
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%s,%llu,%lld,%.6f,%.6f,%.6f,%.6f,%.6f\n", r.name.c_str(),
                      static_cast<unsigned long long>(r.seed), static_cast<long long>(r.best_iter),
                      r.val_iou, r.test_in_iou, r.test_in_f1, r.test_out_iou, r.test_out_f1);
        text += buf;
    }
    io::write_text(path, text);
}

// Trains one run per grid entry and scores its best checkpoint on both test
// splits. Every run trains on the same generated dataset; each writes under
// <base output_dir>/<run name>, and the combined table lands in
// <base output_dir>/ablation_summary.csv.
template <typename T = float>
std::vector<AblationRow> run_ablation(const ExperimentConfig& base, const nlohmann::json& grid,
                                      bool quiet = false) {
    const std::filesystem::path base_out = base.output_dir;
    nlohmann::json base_json = base;

    std::vector<AblationRow> rows;
    for (const auto& run : grid.at("runs")) {
        if (!run.contains("name")) throw ConfigError("ablation run without a name");
        const std::string name = run.at("name").get<std::string>();
        nlohmann::json j = base_json;
        if (run.contains("overrides")) j.merge_patch(run.at("overrides"));
        ExperimentConfig cfg = j.get<ExperimentConfig>();
        cfg.output_dir = (base_out / name).string();
        cfg.validate();

        if (!quiet) std::printf("== ablation run %s (seed %llu) ==\n", name.c_str(),
                                static_cast<unsigned long long>(cfg.seed));
        const TrainResult tr = train<T>(cfg, quiet);
        model::MTGCDNet<T> net = model::load_checkpoint<T>(tr.best_checkpoint);

        AblationRow row;
        row.name = name;
        row.seed = cfg.seed;
        row.best_iter = tr.best_iter;
        row.val_iou = tr.best_val_iou;
        const EvalReport in = evaluate_split(net, cfg.data.root, "test_in");
        const EvalReport out = evaluate_split(net, cfg.data.root, "test_out");
        row.test_in_iou = in.summary.iou;
        row.test_in_f1 = in.summary.f1;
        row.test_out_iou = out.summary.iou;
        row.test_out_f1 = out.summary.f1;
        rows.push_back(row);
        if (!quiet)
            std::printf("== %s: val IoU %.4f  test_in IoU %.4f  test_out IoU %.4f ==\n", name.c_str(),
                        row.val_iou, row.test_in_iou, row.test_out_iou);
        write_ablation_csv(base_out / "ablation_summary.csv", rows);
    }
    return rows;
}

} // namespace mtgcd::harness
