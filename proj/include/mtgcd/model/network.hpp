#pragma once

#include <string>
#include <vector>

#include "mtgcd/model/modules.hpp"

namespace mtgcd::model {

// All logits are upsampled to the input resolution. Classification mode fills
// the per-axis category logits; regression mode fills the *_field members.
// Absent branches stay null.
template <typename T>
struct Outputs {
    Var<T> change;
    Var<T> change_coarse;
    Var<T> seg_t1, seg_t2;
    Var<T> st_t1_x, st_t1_y, st_t2_x, st_t2_y;
    Var<T> bt_x, bt_y;
    Var<T> st_t1_field, st_t2_field, bt_field;
};

template <typename T>
class MTGCDNet {
  public:
    MTGCDNet(const ModelConfig& cfg, uint64_t init_seed) : cfg_(cfg) {
        cfg_.validate();
        Rng rng(init_seed);
        const int ct = cfg_.tstl_channels;
        encoder = Encoder<T>(cfg_, rng);
        if (cfg_.aux_heads) {
            tstl_seg = ConvBlock<T>(cfg_.c_sh, ct, 3, 1, NormKind::batch, true, rng);
            tstl_st = ConvBlock<T>(cfg_.c_sh, ct, 3, 1, NormKind::batch, true, rng);
            tstl_bt = ConvBlock<T>(2 * cfg_.c_sh, ct, 3, 1, NormKind::batch, true, rng);
            head_seg = Head<T>(ct, cfg_.seg_classes, rng);
            const int vec_ch =
                cfg_.vector_mode == VectorMode::classification ? 2 * cfg_.offset_bins : 2;
            head_st = Head<T>(ct, vec_ch, rng);
            head_bt = Head<T>(ct, vec_ch, rng);
        }
        tstl_cd = ConvBlock<T>(2 * cfg_.c_sh, ct, 3, 1, NormKind::batch, true, rng);
        if (cfg_.use_mtfgm) {
            mtfgm = Mtfgm<T>(cfg_, rng);
            tstl_fcd = ConvBlock<T>(cfg_.c_att + ct, ct, 3, 1, NormKind::batch, true, rng);
        }
        head_change = Head<T>(ct, 2, rng);
        if (cfg_.coarse_change_head) head_coarse = Head<T>(ct, 2, rng);
    }

    const ModelConfig& config() const { return cfg_; }
    void set_training(bool t) { training_ = t; }
    bool training() const { return training_; }

    Var<T> encode(const Tensor<T>& image) {
        check_input(image);
        return encoder.forward(nn::make_leaf(image, false), training_);
    }

    Outputs<T> forward(const Tensor<T>& img_t1, const Tensor<T>& img_t2) {
        check_input(img_t1);
        if (!img_t1.same_shape(img_t2)) throw ConfigError("temporal images differ in shape");
        const int H = img_t1.dim(2), W = img_t1.dim(3);

        Var<T> e1 = encoder.forward(nn::make_leaf(img_t1, false), training_);
        Var<T> e2 = encoder.forward(nn::make_leaf(img_t2, false), training_);
        Var<T> f_cat = nn::concat_channels<T>({e1, e2});

        Outputs<T> out;
        Var<T> f_att;
        if (cfg_.aux_heads) {
            Var<T> f_seg_t1 = tstl_seg.forward(e1, training_);
            Var<T> f_seg_t2 = tstl_seg.forward(e2, training_);
            Var<T> f_st_t1 = tstl_st.forward(e1, training_);
            Var<T> f_st_t2 = tstl_st.forward(e2, training_);
            Var<T> f_bt = tstl_bt.forward(f_cat, training_);

            out.seg_t1 = nn::upsample_bilinear(head_seg.forward(f_seg_t1), H, W);
            out.seg_t2 = nn::upsample_bilinear(head_seg.forward(f_seg_t2), H, W);
            Var<T> st1 = nn::upsample_bilinear(head_st.forward(f_st_t1), H, W);
            Var<T> st2 = nn::upsample_bilinear(head_st.forward(f_st_t2), H, W);
            Var<T> bt = nn::upsample_bilinear(head_bt.forward(f_bt), H, W);
            if (cfg_.vector_mode == VectorMode::classification) {
                const int nb = cfg_.offset_bins;
                out.st_t1_x = nn::slice_channels(st1, 0, nb);
                out.st_t1_y = nn::slice_channels(st1, nb, 2 * nb);
                out.st_t2_x = nn::slice_channels(st2, 0, nb);
                out.st_t2_y = nn::slice_channels(st2, nb, 2 * nb);
                out.bt_x = nn::slice_channels(bt, 0, nb);
                out.bt_y = nn::slice_channels(bt, nb, 2 * nb);
            } else {
                out.st_t1_field = st1;
                out.st_t2_field = st2;
                out.bt_field = bt;
            }
            if (cfg_.use_mtfgm)
                f_att = mtfgm.forward(f_seg_t1, f_seg_t2, f_st_t1, f_st_t2, f_bt, training_);
        }

        Var<T> f_cd = tstl_cd.forward(f_cat, training_);
        if (cfg_.coarse_change_head)
            out.change_coarse = nn::upsample_bilinear(head_coarse.forward(f_cd), H, W);
        Var<T> f_fcd =
            cfg_.use_mtfgm ? tstl_fcd.forward(nn::concat_channels<T>({f_att, f_cd}), training_)
                           : f_cd;
        out.change = head_change.forward(nn::upsample_bilinear(f_fcd, H, W));
        return out;
    }

    ParamMap<T> named_tensors() {
        ParamMap<T> m;
        encoder.collect("encoder", m);
        if (cfg_.aux_heads) {
            tstl_seg.collect("tstl_seg", m);
            tstl_st.collect("tstl_st", m);
            tstl_bt.collect("tstl_bt", m);
            head_seg.collect("head_seg", m);
            head_st.collect("head_st", m);
            head_bt.collect("head_bt", m);
        }
        tstl_cd.collect("tstl_cd", m);
        if (cfg_.use_mtfgm) {
            mtfgm.collect("mtfgm", m);
            tstl_fcd.collect("tstl_fcd", m);
        }
        head_change.collect("head_change", m);
        if (cfg_.coarse_change_head) head_coarse.collect("head_coarse", m);
        return m;
    }

    std::vector<Var<T>> parameters() {
        std::vector<Var<T>> out;
        for (auto& [name, v] : named_tensors().params) out.push_back(v);
        return out;
    }

    // Submodules stay public so tests can drive pieces of the graph (for
    // example the zero-attention degradation path) without friend hackery.
    Encoder<T> encoder;
    ConvBlock<T> tstl_seg, tstl_st, tstl_bt, tstl_cd, tstl_fcd;
    Mtfgm<T> mtfgm;
    Head<T> head_seg, head_st, head_bt, head_change, head_coarse;

  private:
    void check_input(const Tensor<T>& img) const {
        if (img.ndim() != 4 || img.dim(1) != 3)
            throw ConfigError("model input must be {N,3,H,W}");
        if (img.dim(2) % cfg_.stride != 0 || img.dim(3) % cfg_.stride != 0)
            throw ConfigError("input H and W must be divisible by the encoder stride");
    }

    ModelConfig cfg_;
    bool training_ = true;
};

} // namespace mtgcd::model
