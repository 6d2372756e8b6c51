#pragma once

#include <vector>

#include "mtgcd/harness/config.hpp"
#include "mtgcd/labelgen/labels.hpp"
#include "mtgcd/losses/losses.hpp"
#include "mtgcd/scenegen/pair.hpp"

namespace mtgcd::harness {

template <typename T>
struct Batch {
    Tensor<T> img_t1, img_t2; // {N,3,H,W}, normalized
    losses::LabelBatch<T> labels;
};

namespace detail {

// 8-bit pixels to roughly unit range: (v/255 - 0.5) / 0.25.
template <typename T>
void fill_image(Tensor<T>& t, int n, const Image& img) {
    const int H = img.height(), W = img.width();
    for (int ch = 0; ch < 3; ++ch)
        for (int r = 0; r < H; ++r)
            for (int c = 0; c < W; ++c)
                t.at4(n, ch, r, c) = (T(img.at(r, c, ch)) / T(255) - T(0.5)) / T(0.25);
}

} // namespace detail

// Packs augmented samples into tensors and builds the supervision masks:
//   seg_t1: everywhere          seg_t2: outside the ignore region
//   st_t1:  roof pixels of t1   st_t2:  roof pixels of t2, outside ignore
//   bt:     unchanged t1 roof pixels outside ignore
//   change: outside its own (persisted) ignore raster
template <typename T>
Batch<T> make_batch(const std::vector<const scenegen::SamplePair*>& ps,
                    const vecfield::BinTable& bins, model::VectorMode mode) {
    if (ps.empty()) throw ConfigError("make_batch: empty batch");
    bins.validate();
    const int N = static_cast<int>(ps.size());
    const int H = ps[0]->height(), W = ps[0]->width();
    for (const auto* p : ps)
        if (p->height() != H || p->width() != W)
            throw ConfigError("make_batch: samples differ in size");

    Batch<T> b;
    b.img_t1 = Tensor<T>({N, 3, H, W});
    b.img_t2 = Tensor<T>({N, 3, H, W});
    auto& L = b.labels;
    L.change = Tensor<int32_t>({N, H, W});
    L.change_mask = Tensor<uint8_t>({N, H, W});
    L.seg_t1 = Tensor<int32_t>({N, H, W});
    L.seg_t2 = Tensor<int32_t>({N, H, W});
    L.seg_t1_mask = Tensor<uint8_t>({N, H, W});
    L.seg_t2_mask = Tensor<uint8_t>({N, H, W});
    L.st_t1_mask = Tensor<uint8_t>({N, H, W});
    L.st_t2_mask = Tensor<uint8_t>({N, H, W});
    L.bt_mask = Tensor<uint8_t>({N, H, W});
    const bool classify = mode == model::VectorMode::classification;
    if (classify) {
        L.st_t1_x = Tensor<int32_t>({N, H, W});
        L.st_t1_y = Tensor<int32_t>({N, H, W});
        L.st_t2_x = Tensor<int32_t>({N, H, W});
        L.st_t2_y = Tensor<int32_t>({N, H, W});
        L.bt_x = Tensor<int32_t>({N, H, W});
        L.bt_y = Tensor<int32_t>({N, H, W});
    } else {
        L.st_t1_field = Tensor<T>({N, 2, H, W});
        L.st_t2_field = Tensor<T>({N, 2, H, W});
        L.bt_field = Tensor<T>({N, 2, H, W});
    }

    for (int n = 0; n < N; ++n) {
        const scenegen::SamplePair& p = *ps[n];
        detail::fill_image(b.img_t1, n, p.image_t1);
        detail::fill_image(b.img_t2, n, p.image_t2);
        const int64_t base = int64_t(n) * H * W;
        for (int r = 0; r < H; ++r) {
            for (int c = 0; c < W; ++c) {
                const int64_t i = base + int64_t(r) * W + c;
                const bool ignored = p.ignore_mask(r, c) != 0;
                const bool roof1 = p.seg_t1(r, c) == labelgen::kRoof;
                const bool roof2 = p.seg_t2(r, c) == labelgen::kRoof;
                L.change[i] = p.change_mask(r, c);
                L.change_mask[i] = p.change_ignore(r, c) ? 0 : 1;
                L.seg_t1[i] = p.seg_t1(r, c);
                L.seg_t2[i] = p.seg_t2(r, c);
                L.seg_t1_mask[i] = 1;
                L.seg_t2_mask[i] = ignored ? 0 : 1;
                L.st_t1_mask[i] = roof1 ? 1 : 0;
                L.st_t2_mask[i] = (roof2 && !ignored) ? 1 : 0;
                L.bt_mask[i] = (roof1 && !p.change_mask(r, c) && !ignored) ? 1 : 0;
                if (classify) {
                    L.st_t1_x[i] = vecfield::encode_value(p.st_t1.vx(r, c), bins);
                    L.st_t1_y[i] = vecfield::encode_value(p.st_t1.vy(r, c), bins);
                    L.st_t2_x[i] = vecfield::encode_value(p.st_t2.vx(r, c), bins);
                    L.st_t2_y[i] = vecfield::encode_value(p.st_t2.vy(r, c), bins);
                    L.bt_x[i] = vecfield::encode_value(p.bt.vx(r, c), bins);
                    L.bt_y[i] = vecfield::encode_value(p.bt.vy(r, c), bins);
                } else {
                    L.st_t1_field.at4(n, 0, r, c) = T(p.st_t1.vx(r, c));
                    L.st_t1_field.at4(n, 1, r, c) = T(p.st_t1.vy(r, c));
                    L.st_t2_field.at4(n, 0, r, c) = T(p.st_t2.vx(r, c));
                    L.st_t2_field.at4(n, 1, r, c) = T(p.st_t2.vy(r, c));
                    L.bt_field.at4(n, 0, r, c) = T(p.bt.vx(r, c));
                    L.bt_field.at4(n, 1, r, c) = T(p.bt.vy(r, c));
                }
            }
        }
    }
    return b;
}

// Argmax over the channel axis for sample n.
template <typename T>
Grid<uint8_t> argmax_classes(const Tensor<T>& logits, int n) {
    const int C = logits.dim(1), H = logits.dim(2), W = logits.dim(3);
    Grid<uint8_t> out(H, W);
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c) {
            int best = 0;
            T bv = logits.at4(n, 0, r, c);
            for (int k = 1; k < C; ++k) {
                const T v = logits.at4(n, k, r, c);
                if (v > bv) {
                    bv = v;
                    best = k;
                }
            }
            out(r, c) = static_cast<uint8_t>(best);
        }
    return out;
}

// Per-axis argmax categories mapped back to representative displacements.
template <typename T>
vecfield::VectorField decode_predicted_field(const Tensor<T>& logits_x, const Tensor<T>& logits_y,
                                             int n, const vecfield::BinTable& bins) {
    const Grid<uint8_t> cx = argmax_classes(logits_x, n);
    const Grid<uint8_t> cy = argmax_classes(logits_y, n);
    return vecfield::decode(cx, cy, bins);
}

} // namespace mtgcd::harness
