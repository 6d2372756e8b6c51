#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mtgcd/core/rng.hpp"
#include "mtgcd/model/config.hpp"
#include "mtgcd/nn/init.hpp"
#include "mtgcd/nn/ops.hpp"

namespace mtgcd::model {

using nn::Var;

// Named views over every trainable tensor and every persistent buffer,
// in a fixed traversal order (checkpoints and the optimizer rely on it).
template <typename T>
struct ParamMap {
    std::vector<std::pair<std::string, Var<T>>> params;
    std::vector<std::pair<std::string, Tensor<T>*>> buffers;
};

// conv(k x k) + norm + optional ReLU. Convs carry no bias; the norm's beta
// plays that role.
template <typename T>
struct ConvBlock {
    Var<T> w, gamma, beta;
    Tensor<T> run_mean, run_var;
    int stride = 1;
    int pad = 0;
    NormKind norm = NormKind::batch;
    bool activate = true;

    ConvBlock() = default;
    ConvBlock(int cin, int cout, int k, int stride_, NormKind norm_, bool activate_, Rng& rng)
        : stride(stride_), pad(k / 2), norm(norm_), activate(activate_) {
        Tensor<T> wt({cout, cin, k, k});
        nn::kaiming_normal(wt, rng);
        w = nn::make_leaf(std::move(wt), true);
        gamma = nn::make_leaf(Tensor<T>::full({cout}, T(1)), true);
        beta = nn::make_leaf(Tensor<T>({cout}), true);
        run_mean = Tensor<T>({cout});
        run_var = Tensor<T>::full({cout}, T(1));
    }

    Var<T> forward(const Var<T>& x, bool training) {
        Var<T> y = nn::conv2d(x, w, Var<T>{}, stride, pad);
        if (norm == NormKind::instance) {
            y = nn::norm2d(y, gamma, beta, nn::NormMode::instance);
        } else {
            y = nn::norm2d(y, gamma, beta,
                           training ? nn::NormMode::batch_train : nn::NormMode::batch_eval,
                           &run_mean, &run_var);
        }
        return activate ? nn::relu(y) : y;
    }

    void collect(const std::string& prefix, ParamMap<T>& m) {
        m.params.emplace_back(prefix + ".conv.weight", w);
        m.params.emplace_back(prefix + ".norm.gamma", gamma);
        m.params.emplace_back(prefix + ".norm.beta", beta);
        if (norm == NormKind::batch) {
            m.buffers.emplace_back(prefix + ".norm.running_mean", &run_mean);
            m.buffers.emplace_back(prefix + ".norm.running_var", &run_var);
        }
    }
};

// Basic residual unit; projects the skip when shape changes.
template <typename T>
struct ResidualBlock {
    ConvBlock<T> c1, c2, proj;
    bool has_proj = false;

    ResidualBlock() = default;
    ResidualBlock(int cin, int cout, int stride, Rng& rng)
        : c1(cin, cout, 3, stride, NormKind::batch, true, rng),
          c2(cout, cout, 3, 1, NormKind::batch, false, rng),
          has_proj(stride != 1 || cin != cout) {
        if (has_proj) proj = ConvBlock<T>(cin, cout, 1, stride, NormKind::batch, false, rng);
    }

    Var<T> forward(const Var<T>& x, bool training) {
        Var<T> h = c2.forward(c1.forward(x, training), training);
        Var<T> s = has_proj ? proj.forward(x, training) : x;
        return nn::relu(nn::add(h, s));
    }

    void collect(const std::string& prefix, ParamMap<T>& m) {
        c1.collect(prefix + ".c1", m);
        c2.collect(prefix + ".c2", m);
        if (has_proj) proj.collect(prefix + ".proj", m);
    }
};

// PSP-style context block: pooled summaries at 1x1 / 2x2 / 4x4 are squeezed,
// resized back and fused with the input.
template <typename T>
struct PyramidPooling {
    static constexpr int kLevels[3] = {1, 2, 4};
    ConvBlock<T> squeeze[3];
    ConvBlock<T> merge;

    PyramidPooling() = default;
    PyramidPooling(int channels, Rng& rng) {
        const int branch = channels / 4;
        for (int i = 0; i < 3; ++i)
            squeeze[i] = ConvBlock<T>(channels, branch, 1, 1, NormKind::batch, true, rng);
        merge = ConvBlock<T>(channels + 3 * branch, channels, 1, 1, NormKind::batch, true, rng);
    }

    Var<T> forward(const Var<T>& x, bool training) {
        const int h = x->value.dim(2), w = x->value.dim(3);
        std::vector<Var<T>> parts{x};
        for (int i = 0; i < 3; ++i) {
            Var<T> p = nn::adaptive_avg_pool(x, kLevels[i], kLevels[i]);
            p = squeeze[i].forward(p, training);
            parts.push_back(nn::upsample_bilinear(p, h, w));
        }
        return merge.forward(nn::concat_channels(parts), training);
    }

    void collect(const std::string& prefix, ParamMap<T>& m) {
        for (int i = 0; i < 3; ++i)
            squeeze[i].collect(prefix + ".squeeze" + std::to_string(kLevels[i]), m);
        merge.collect(prefix + ".merge", m);
    }
};

// Shared-weight feature extractor, total stride 8, output width c_sh.
template <typename T>
struct Encoder {
    ConvBlock<T> stem;
    ResidualBlock<T> b1, b2, b3;
    bool psp_on = false;
    PyramidPooling<T> psp;

    Encoder() = default;
    Encoder(const ModelConfig& cfg, Rng& rng)
        : stem(3, cfg.encoder_width / 2, 3, 2, cfg.norm_first_layer, true, rng),
          b1(cfg.encoder_width / 2, cfg.encoder_width, 2, rng),
          b2(cfg.encoder_width, cfg.c_sh, 2, rng),
          b3(cfg.c_sh, cfg.c_sh, 1, rng),
          psp_on(cfg.pyramid_pooling) {
        if (psp_on) psp = PyramidPooling<T>(cfg.c_sh, rng);
    }

    Var<T> forward(const Var<T>& x, bool training) {
        Var<T> h = stem.forward(x, training);
        h = b1.forward(h, training);
        h = b2.forward(h, training);
        h = b3.forward(h, training);
        if (psp_on) h = psp.forward(h, training);
        return h;
    }

    void collect(const std::string& prefix, ParamMap<T>& m) {
        stem.collect(prefix + ".stem", m);
        b1.collect(prefix + ".b1", m);
        b2.collect(prefix + ".b2", m);
        b3.collect(prefix + ".b3", m);
        if (psp_on) psp.collect(prefix + ".psp", m);
    }
};

// Attention fusion of the auxiliary branches. Per branch the temporal pair is
// concatenated (the BT feature is already bi-temporal and passes straight in),
// squeezed to a reduced feature and a sigmoid gate, and multiplied; the three
// gated features are fused down to c_att channels.
template <typename T>
struct Mtfgm {
    ConvBlock<T> seg_feat, seg_wgt, st_feat, st_wgt, bt_feat, bt_wgt, fuse;

    Mtfgm() = default;
    Mtfgm(const ModelConfig& cfg, Rng& rng) {
        const int ct = cfg.tstl_channels, ck = cfg.c_k;
        seg_feat = ConvBlock<T>(2 * ct, ck, 1, 1, NormKind::batch, true, rng);
        seg_wgt = ConvBlock<T>(2 * ct, ck, 1, 1, NormKind::batch, false, rng);
        st_feat = ConvBlock<T>(2 * ct, ck, 1, 1, NormKind::batch, true, rng);
        st_wgt = ConvBlock<T>(2 * ct, ck, 1, 1, NormKind::batch, false, rng);
        bt_feat = ConvBlock<T>(ct, ck, 1, 1, NormKind::batch, true, rng);
        bt_wgt = ConvBlock<T>(ct, ck, 1, 1, NormKind::batch, false, rng);
        fuse = ConvBlock<T>(3 * ck, cfg.c_att, 1, 1, NormKind::batch, true, rng);
    }

    Var<T> forward(const Var<T>& f_seg_t1, const Var<T>& f_seg_t2, const Var<T>& f_st_t1,
                   const Var<T>& f_st_t2, const Var<T>& f_bt, bool training) {
        Var<T> g_seg = nn::concat_channels<T>({f_seg_t1, f_seg_t2});
        Var<T> g_st = nn::concat_channels<T>({f_st_t1, f_st_t2});
        Var<T> a_seg = nn::mul(seg_feat.forward(g_seg, training),
                               nn::sigmoid(seg_wgt.forward(g_seg, training)));
        Var<T> a_st = nn::mul(st_feat.forward(g_st, training),
                              nn::sigmoid(st_wgt.forward(g_st, training)));
        Var<T> a_bt = nn::mul(bt_feat.forward(f_bt, training),
                              nn::sigmoid(bt_wgt.forward(f_bt, training)));
        return fuse.forward(nn::concat_channels<T>({a_seg, a_st, a_bt}), training);
    }

    void collect(const std::string& prefix, ParamMap<T>& m) {
        seg_feat.collect(prefix + ".seg_feat", m);
        seg_wgt.collect(prefix + ".seg_wgt", m);
        st_feat.collect(prefix + ".st_feat", m);
        st_wgt.collect(prefix + ".st_wgt", m);
        bt_feat.collect(prefix + ".bt_feat", m);
        bt_wgt.collect(prefix + ".bt_wgt", m);
        fuse.collect(prefix + ".fuse", m);
    }
};

// Final 1x1 classifier of an FCN-style head.
template <typename T>
struct Head {
    Var<T> w, b;

    Head() = default;
    Head(int cin, int cout, Rng& rng) {
        Tensor<T> wt({cout, cin, 1, 1});
        nn::kaiming_normal(wt, rng);
        w = nn::make_leaf(std::move(wt), true);
        b = nn::make_leaf(Tensor<T>({cout}), true);
    }

    Var<T> forward(const Var<T>& x) { return nn::conv2d(x, w, b, 1, 0); }

    void collect(const std::string& prefix, ParamMap<T>& m) {
        m.params.emplace_back(prefix + ".weight", w);
        m.params.emplace_back(prefix + ".bias", b);
    }
};

} // namespace mtgcd::model
