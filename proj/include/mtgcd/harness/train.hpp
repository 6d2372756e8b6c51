#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "mtgcd/harness/augment.hpp"
#include "mtgcd/harness/batch.hpp"
#include "mtgcd/harness/config.hpp"
#include "mtgcd/harness/datagen.hpp"
#include "mtgcd/harness/evaluate.hpp"
#include "mtgcd/harness/schedule.hpp"
#include "mtgcd/losses/losses.hpp"
#include "mtgcd/model/checkpoint.hpp"
#include "mtgcd/model/network.hpp"
#include "mtgcd/nn/optim.hpp"

namespace mtgcd::harness {

// Seed-stream salts. Each consumer forks its own stream off the master seed
// so adding draws to one never perturbs the others.
inline constexpr uint64_t kInitSalt = 10;
inline constexpr uint64_t kShuffleSalt = 11;
inline constexpr uint64_t kAugmentSalt = 12;

struct TrainResult {
    double best_val_iou = -1.0;
    int64_t best_iter = -1;
    metrics::MetricSummary final_val;
    std::filesystem::path best_checkpoint;
    std::filesystem::path last_checkpoint;
};

namespace detail {

// Platform-stable Fisher-Yates (std::shuffle's draw sequence is
// implementation-defined).
inline void shuffle_indices(std::vector<int>& idx, Rng& rng) {
    for (size_t i = idx.size(); i > 1; --i) {
        const size_t j = static_cast<size_t>(rng.uniform_int(0, static_cast<int>(i) - 1));
        std::swap(idx[i - 1], idx[j]);
    }
}

} // namespace detail

// Momentum-SGD training over preloaded pairs. Logs one train_log.csv row per
// iteration and one val_log.csv row per validation; keeps the best-IoU
// checkpoint in <output_dir>/best and the newest in <output_dir>/last. The
// whole run is a pure function of (cfg, pairs): data order, augmentation and
// initialization all derive from cfg.seed.
template <typename T = float>
TrainResult train_loaded(const ExperimentConfig& cfg,
                         const std::vector<scenegen::SamplePair>& train_pairs,
                         const std::vector<scenegen::SamplePair>& val_pairs, bool quiet = false) {
    cfg.validate();
    if (train_pairs.empty()) throw ConfigError("train: no training pairs");
    if (val_pairs.empty()) throw ConfigError("train: no validation pairs");

    model::MTGCDNet<T> net(cfg.model, Rng(cfg.seed).fork(kInitSalt).seed());
    nn::SgdOptimizer<T> opt(net.parameters(), T(cfg.optimizer.momentum),
                            T(cfg.optimizer.weight_decay));

    const std::filesystem::path out_dir = cfg.output_dir;
    std::filesystem::create_directories(out_dir);
    std::ofstream train_log(out_dir / "train_log.csv");
    std::ofstream val_log(out_dir / "val_log.csv");
    if (!train_log || !val_log) throw IoError("cannot open logs under " + out_dir.string());
    train_log << "iter,lr,total,l_cd,l_cd_ce,l_cd_dice,l_seg,l_st,l_bt,degenerate\n";
    val_log << "iter,iou,f1,precision,recall\n";

    TrainResult res;
    res.best_checkpoint = out_dir / "best";
    res.last_checkpoint = out_dir / "last";

    auto checkpoint_metrics = [&](int64_t iter, const metrics::MetricSummary& s) {
        nlohmann::json j;
        j["experiment"] = cfg;
        j["split"] = "val";
        j["iteration"] = iter;
        j["iou"] = s.iou;
        j["f1"] = s.f1;
        j["precision"] = s.precision;
        j["recall"] = s.recall;
        return j;
    };
    // A valid checkpoint exists from iteration 0 on, so a NaN abort always
    // leaves something loadable behind.
    model::save_checkpoint(res.last_checkpoint, net, 0, checkpoint_metrics(0, {}));

    Rng aug_rng = Rng(cfg.seed).fork(kAugmentSalt);
    std::vector<int> order(train_pairs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    size_t cursor = order.size(); // forces a shuffle before the first batch
    int64_t epoch = 0;

    std::vector<scenegen::SamplePair> scratch(cfg.batch_size);
    std::vector<const scenegen::SamplePair*> batch_view(cfg.batch_size);

    for (int64_t iter = 0; iter < cfg.schedule.max_iters; ++iter) {
        for (int k = 0; k < cfg.batch_size; ++k) {
            if (cursor >= order.size()) {
                Rng shuffle_rng = Rng(cfg.seed).fork(kShuffleSalt).fork(uint64_t(epoch) + 1);
                detail::shuffle_indices(order, shuffle_rng);
                cursor = 0;
                ++epoch;
            }
            scratch[k] = augment(train_pairs[order[cursor++]], cfg.augment, cfg.crop_size, aug_rng);
            batch_view[k] = &scratch[k];
        }
        Batch<T> b = make_batch<T>(batch_view, cfg.bins, cfg.model.vector_mode);

        net.set_training(true);
        model::Outputs<T> out = net.forward(b.img_t1, b.img_t2);
        losses::LossBreakdown<T> bd = losses::total_loss(out, b.labels, cfg.loss);
        const double total = static_cast<double>(bd.total->value[0]);
        nn::backward(bd.total);
        if (!std::isfinite(total) || !opt.grads_finite())
            throw NumericalError("training diverged at iteration " + std::to_string(iter) +
                                 "; last good checkpoint: " + res.last_checkpoint.string());

        const double lr = poly_lr(iter, cfg);
        opt.step(T(lr));
        opt.zero_grad();

        char row[256];
        std::snprintf(row, sizeof(row), "%lld,%.8f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%d\n",
                      static_cast<long long>(iter), lr, total, double(bd.l_cd), double(bd.l_cd_ce),
                      double(bd.l_cd_dice), double(bd.l_seg), double(bd.l_st), double(bd.l_bt),
                      bd.any_degenerate() ? 1 : 0);
        train_log << row;

        const int64_t done = iter + 1;
        if (done % cfg.eval_interval == 0 || done == cfg.schedule.max_iters) {
            const metrics::MetricSummary s = metrics::summarize(evaluate_pairs(net, val_pairs));
            char vrow[160];
            std::snprintf(vrow, sizeof(vrow), "%lld,%.6f,%.6f,%.6f,%.6f\n",
                          static_cast<long long>(done), s.iou, s.f1, s.precision, s.recall);
            val_log << vrow;
            val_log.flush();
            train_log.flush();
            model::save_checkpoint(res.last_checkpoint, net, done, checkpoint_metrics(done, s));
            if (s.iou > res.best_val_iou) {
                res.best_val_iou = s.iou;
                res.best_iter = done;
                model::save_checkpoint(res.best_checkpoint, net, done, checkpoint_metrics(done, s));
            }
            res.final_val = s;
            if (!quiet)
                std::printf("iter %6lld  lr %.6f  loss %.4f  val IoU %.4f  best %.4f\n",
                            static_cast<long long>(done), lr, total, s.iou, res.best_val_iou);
        }
    }
    return res;
}

template <typename T = float>
TrainResult train(const ExperimentConfig& cfg, bool quiet = false) {
    return train_loaded<T>(cfg, load_split(cfg.data.root, "train"), load_split(cfg.data.root, "val"),
                           quiet);
}

} // namespace mtgcd::harness
