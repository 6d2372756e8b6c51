#pragma once

#include <filesystem>
#include <string>

#include "mtgcd/harness/batch.hpp"
#include "mtgcd/harness/evaluate.hpp"
#include "mtgcd/io/dataset.hpp"
#include "mtgcd/model/checkpoint.hpp"
#include "mtgcd/vecfield/json.hpp"

namespace mtgcd::harness {

// Decoding needs the table training used; checkpoints embed it with the rest
// of the experiment config. Fresh nets fall back to the standard table.
inline vecfield::BinTable bins_from_checkpoint(const model::CheckpointInfo& info) {
    if (info.metrics.contains("experiment") && info.metrics.at("experiment").contains("bins"))
        return info.metrics.at("experiment").at("bins").get<vecfield::BinTable>();
    return vecfield::BinTable::standard();
}

// Runs one persisted pair through a checkpoint and writes prediction rasters
// next to it (default <pair>/pred): pred_change.png (0/1), and with auxiliary
// heads pred_seg_t{1,2}.png (0/1/2) plus pred_st_t{1,2}.f32 / pred_bt.f32 in
// the dataset's field format. Classification fields are decoded to their bin
// representatives; regression fields are written as produced.
template <typename T = float>
std::filesystem::path run_predict(const std::filesystem::path& checkpoint_dir,
                                  const std::filesystem::path& pair_dir,
                                  const std::filesystem::path& out_override = {}) {
    model::CheckpointInfo info;
    model::MTGCDNet<T> net = model::load_checkpoint<T>(checkpoint_dir, &info);
    const io::LoadedPair loaded = io::read_pair(pair_dir);
    const scenegen::SamplePair& p = loaded.pair;

    nn::NoGrad guard;
    net.set_training(false);
    const model::Outputs<T> out = net.forward(image_tensor<T>(p.image_t1), image_tensor<T>(p.image_t2));

    const std::filesystem::path out_dir = out_override.empty() ? pair_dir / "pred" : out_override;
    std::filesystem::create_directories(out_dir);
    io::write_png_gray(out_dir / "pred_change.png", argmax_classes(out.change->value, 0));

    if (out.seg_t1) {
        io::write_png_gray(out_dir / "pred_seg_t1.png", argmax_classes(out.seg_t1->value, 0));
        io::write_png_gray(out_dir / "pred_seg_t2.png", argmax_classes(out.seg_t2->value, 0));
        if (net.config().vector_mode == model::VectorMode::classification) {
            const vecfield::BinTable bins = bins_from_checkpoint(info);
            io::detail::write_field(out_dir / "pred_st_t1.f32",
                                    decode_predicted_field(out.st_t1_x->value, out.st_t1_y->value, 0, bins));
            io::detail::write_field(out_dir / "pred_st_t2.f32",
                                    decode_predicted_field(out.st_t2_x->value, out.st_t2_y->value, 0, bins));
            io::detail::write_field(out_dir / "pred_bt.f32",
                                    decode_predicted_field(out.bt_x->value, out.bt_y->value, 0, bins));
        } else {
            auto raw_field = [&](const nn::Var<T>& x, const nn::Var<T>& y) {
                const int H = x->value.dim(2), W = x->value.dim(3);
                vecfield::VectorField f(H, W);
                for (int r = 0; r < H; ++r)
                    for (int c = 0; c < W; ++c) {
                        f.vx(r, c) = static_cast<float>(x->value.at4(0, 0, r, c));
                        f.vy(r, c) = static_cast<float>(y->value.at4(0, 0, r, c));
                    }
                return f;
            };
            io::detail::write_field(out_dir / "pred_st_t1.f32", raw_field(out.st_t1_x, out.st_t1_y));
            io::detail::write_field(out_dir / "pred_st_t2.f32", raw_field(out.st_t2_x, out.st_t2_y));
            io::detail::write_field(out_dir / "pred_bt.f32", raw_field(out.bt_x, out.bt_y));
        }
    }
    return out_dir;
}

} // namespace mtgcd::harness
