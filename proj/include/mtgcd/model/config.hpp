#pragma once

#include <string>

#include <json.hpp>
#include "mtgcd/core/errors.hpp"

namespace mtgcd::model {

enum class NormKind { batch, instance };
enum class VectorMode { classification, regression };

inline std::string to_string(NormKind k) { return k == NormKind::batch ? "batch" : "instance"; }
inline std::string to_string(VectorMode m) {
    return m == VectorMode::classification ? "classification" : "regression";
}

inline NormKind norm_kind_from_string(const std::string& s) {
    if (s == "batch") return NormKind::batch;
    if (s == "instance") return NormKind::instance;
    throw ConfigError("unknown norm kind '" + s + "'");
}
inline VectorMode vector_mode_from_string(const std::string& s) {
    if (s == "classification") return VectorMode::classification;
    if (s == "regression") return VectorMode::regression;
    throw ConfigError("unknown vector mode '" + s + "'");
}

// Channel bookkeeping for the whole graph. The encoder is a fixed 4-stage
// residual stack with total stride 8; c_sh is its output width and every
// concatenated pair (F_cat) is therefore 2*c_sh wide.
struct ModelConfig {
    int encoder_width = 32;     // stem runs at width/2, final stages at c_sh
    int stride = 8;
    int c_sh = 64;
    int tstl_channels = 64;     // full-scale value is 512
    int c_k = 64;               // per-branch attention width
    int c_att = 128;            // fused attention width
    int seg_classes = 3;
    int offset_bins = 10;       // per-axis categories for ST/BT heads
    NormKind norm_first_layer = NormKind::instance;
    bool pyramid_pooling = false;
    bool aux_heads = true;      // seg + ST + BT branches
    bool use_mtfgm = true;      // attention fusion into the change branch
    VectorMode vector_mode = VectorMode::classification;
    bool coarse_change_head = false; // extra supervision on the pre-fusion feature

    void validate() const {
        if (encoder_width < 2 || encoder_width % 2 != 0)
            throw ConfigError("encoder_width must be an even integer >= 2");
        if (stride != 8) throw ConfigError("the encoder realizes stride 8 only");
        if (c_sh != 2 * encoder_width)
            throw ConfigError("c_sh must equal 2*encoder_width (got " + std::to_string(c_sh) + ")");
        if (tstl_channels < 1) throw ConfigError("tstl_channels must be positive");
        if (c_k < 1 || c_att < 1) throw ConfigError("attention widths must be positive");
        if (seg_classes < 2) throw ConfigError("seg_classes must be >= 2");
        if (offset_bins < 2) throw ConfigError("offset_bins must be >= 2");
        if (use_mtfgm && !aux_heads)
            throw ConfigError("attention fusion needs all three auxiliary branches");
        if (pyramid_pooling && c_sh % 4 != 0)
            throw ConfigError("pyramid pooling needs c_sh divisible by 4");
    }
};

inline void to_json(nlohmann::json& j, const ModelConfig& c) {
    j = nlohmann::json{{"encoder_width", c.encoder_width},
                       {"stride", c.stride},
                       {"c_sh", c.c_sh},
                       {"tstl_channels", c.tstl_channels},
                       {"c_k", c.c_k},
                       {"c_att", c.c_att},
                       {"seg_classes", c.seg_classes},
                       {"offset_bins", c.offset_bins},
                       {"norm_first_layer", to_string(c.norm_first_layer)},
                       {"pyramid_pooling", c.pyramid_pooling},
                       {"aux_heads", c.aux_heads},
                       {"use_mtfgm", c.use_mtfgm},
                       {"vector_mode", to_string(c.vector_mode)},
                       {"coarse_change_head", c.coarse_change_head}};
}

inline void from_json(const nlohmann::json& j, ModelConfig& c) {
    ModelConfig d;
    c.encoder_width = j.value("encoder_width", d.encoder_width);
    c.stride = j.value("stride", d.stride);
    c.c_sh = j.value("c_sh", 2 * c.encoder_width);
    c.tstl_channels = j.value("tstl_channels", d.tstl_channels);
    c.c_k = j.value("c_k", d.c_k);
    c.c_att = j.value("c_att", d.c_att);
    c.seg_classes = j.value("seg_classes", d.seg_classes);
    c.offset_bins = j.value("offset_bins", d.offset_bins);
    c.norm_first_layer = norm_kind_from_string(
        j.value("norm_first_layer", to_string(d.norm_first_layer)));
    c.pyramid_pooling = j.value("pyramid_pooling", d.pyramid_pooling);
    c.aux_heads = j.value("aux_heads", d.aux_heads);
    c.use_mtfgm = j.value("use_mtfgm", d.use_mtfgm);
    c.vector_mode = vector_mode_from_string(j.value("vector_mode", to_string(d.vector_mode)));
    c.coarse_change_head = j.value("coarse_change_head", d.coarse_change_head);
}

} // namespace mtgcd::model
