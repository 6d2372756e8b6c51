#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "mtgcd/harness/batch.hpp"
#include "mtgcd/harness/config.hpp"
#include "mtgcd/harness/datagen.hpp"
#include "mtgcd/metrics/confusion.hpp"
#include "mtgcd/model/checkpoint.hpp"
#include "mtgcd/model/network.hpp"

namespace mtgcd::harness {

template <typename T>
Tensor<T> image_tensor(const Image& img) {
    Tensor<T> t({1, 3, img.height(), img.width()});
    detail::fill_image(t, 0, img);
    return t;
}

// Foreground-change confusion over a set of pairs. Pairs are scored one at a
// time in eval mode with gradients off; counts merge associatively.
template <typename T>
metrics::ConfusionCounts evaluate_pairs(model::MTGCDNet<T>& net,
                                        const std::vector<scenegen::SamplePair>& pairs) {
    nn::NoGrad guard;
    const bool was_training = net.training();
    net.set_training(false);
    metrics::ConfusionCounts counts;
    for (const auto& p : pairs) {
        const auto out = net.forward(image_tensor<T>(p.image_t1), image_tensor<T>(p.image_t2));
        const Grid<uint8_t> pred = argmax_classes(out.change->value, 0);
        counts += metrics::accumulate(pred, p.change_mask, &p.change_ignore);
    }
    net.set_training(was_training);
    return counts;
}

struct EvalReport {
    std::string split;
    int pairs = 0;
    metrics::ConfusionCounts counts;
    metrics::MetricSummary summary;
};

inline std::string eval_csv_header() { return "split,pairs,iou,f1,recall,precision"; }

inline std::string eval_csv_row(const EvalReport& r) {
    char buf[192];
    std::snprintf(buf, sizeof(buf), "%s,%d,%.6f,%.6f,%.6f,%.6f", r.split.c_str(), r.pairs,
                  r.summary.iou, r.summary.f1, r.summary.recall, r.summary.precision);
    return buf;
}

inline void write_eval_csv(const std::filesystem::path& path, const std::vector<EvalReport>& rows) {
    std::string text = eval_csv_header() + "\n";
    for (const auto& r : rows) text += eval_csv_row(r) + "\n";
    io::write_text(path, text);
}

inline std::string format_eval_summary(const EvalReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "%s: %d pairs  IoU %.4f  F1 %.4f  Recall %.4f  Precision %.4f%s", r.split.c_str(),
                  r.pairs, r.summary.iou, r.summary.f1, r.summary.recall, r.summary.precision,
                  r.summary.degenerate ? "  (degenerate ratios reported as 0)" : "");
    return buf;
}

// Pulls the experiment config a training run embedded in its checkpoint, so
// `eval --checkpoint P --split S` needs no separate config file.
inline ExperimentConfig experiment_from_checkpoint(const model::CheckpointInfo& info) {
    if (!info.metrics.contains("experiment"))
        throw ConfigError("checkpoint carries no experiment config; pass --data-root explicitly");
    ExperimentConfig cfg = info.metrics.at("experiment").get<ExperimentConfig>();
    cfg.validate();
    return cfg;
}

template <typename T>
EvalReport evaluate_split(model::MTGCDNet<T>& net, const std::filesystem::path& data_root,
                          const std::string& split) {
    EvalReport r;
    r.split = split;
    const auto pairs = load_split(data_root, split);
    r.pairs = static_cast<int>(pairs.size());
    r.counts = evaluate_pairs(net, pairs);
    r.summary = metrics::summarize(r.counts);
    return r;
}

// CLI entry: loads the checkpoint, scores one split, writes
// <checkpoint>/eval_<split>.csv and returns the report.
template <typename T = float>
EvalReport run_eval(const std::filesystem::path& checkpoint_dir, const std::string& split,
                    const std::string& data_root_override = {}) {
    model::CheckpointInfo info;
    model::MTGCDNet<T> net = model::load_checkpoint<T>(checkpoint_dir, &info);
    std::filesystem::path root = data_root_override;
    if (root.empty()) root = experiment_from_checkpoint(info).data.root;
    EvalReport r = evaluate_split(net, root, split);
    write_eval_csv(checkpoint_dir / ("eval_" + split + ".csv"), {r});
    return r;
}

} // namespace mtgcd::harness
