#pragma once

#include <cmath>
#include <string>

#include <json.hpp>
#include "mtgcd/model/network.hpp"
#include "mtgcd/nn/ops.hpp"

namespace mtgcd::losses {

struct LossConfig {
    double lambda1 = 1.0; // segmentation
    double lambda2 = 1.0; // ST-offsets
    double lambda3 = 1.0; // BT-flows
    double change_ce_weight = 1.0;
    double change_dice_weight = 1.0;
    model::VectorMode field_mode = model::VectorMode::classification;

    void validate() const {
        if (lambda1 < 0 || lambda2 < 0 || lambda3 < 0)
            throw ConfigError("loss lambdas must be non-negative");
        if (change_ce_weight < 0 || change_dice_weight < 0)
            throw ConfigError("change loss weights must be non-negative");
    }
};

inline void to_json(nlohmann::json& j, const LossConfig& c) {
    j = nlohmann::json{{"lambda1", c.lambda1},
                       {"lambda2", c.lambda2},
                       {"lambda3", c.lambda3},
                       {"change_ce_weight", c.change_ce_weight},
                       {"change_dice_weight", c.change_dice_weight},
                       {"field_mode", model::to_string(c.field_mode)}};
}

inline void from_json(const nlohmann::json& j, LossConfig& c) {
    LossConfig d;
    c.lambda1 = j.value("lambda1", d.lambda1);
    c.lambda2 = j.value("lambda2", d.lambda2);
    c.lambda3 = j.value("lambda3", d.lambda3);
    c.change_ce_weight = j.value("change_ce_weight", d.change_ce_weight);
    c.change_dice_weight = j.value("change_dice_weight", d.change_dice_weight);
    c.field_mode = model::vector_mode_from_string(
        j.value("field_mode", model::to_string(d.field_mode)));
}

// Targets for one batch, all full resolution. The *_mask rasters hold 1 where
// the corresponding term is supervised; everything else never enters a sum.
// The float fields are only populated in regression mode.
template <typename T>
struct LabelBatch {
    Tensor<int32_t> change;
    Tensor<uint8_t> change_mask;
    Tensor<int32_t> seg_t1, seg_t2;
    Tensor<uint8_t> seg_t1_mask, seg_t2_mask;
    Tensor<int32_t> st_t1_x, st_t1_y, st_t2_x, st_t2_y;
    Tensor<uint8_t> st_t1_mask, st_t2_mask;
    Tensor<int32_t> bt_x, bt_y;
    Tensor<uint8_t> bt_mask;
    Tensor<T> st_t1_field, st_t2_field, bt_field;
};

namespace detail {
inline Tensor<uint8_t> invert_mask(const Tensor<uint8_t>& ignore) {
    Tensor<uint8_t> valid(ignore.shape());
    for (int64_t i = 0; i < ignore.numel(); ++i) valid[i] = ignore[i] ? 0 : 1;
    return valid;
}
} // namespace detail

// Contract-level wrappers: CE and Dice take an ignore raster (1 = excluded),
// EPE takes a supervision mask (1 = included).

template <typename T>
nn::MaskedLoss<T> ce_loss(const nn::Var<T>& logits, const Tensor<int32_t>& target,
                          const Tensor<uint8_t>& ignore) {
    return nn::masked_cross_entropy(logits, target, detail::invert_mask(ignore));
}

template <typename T>
nn::MaskedLoss<T> dice_loss(const nn::Var<T>& logits, const Tensor<int32_t>& target,
                            const Tensor<uint8_t>& ignore, T eps = T(1)) {
    return nn::masked_dice(logits, target, detail::invert_mask(ignore), eps);
}

template <typename T>
nn::MaskedLoss<T> epe_loss(const nn::Var<T>& pred_field, const Tensor<T>& target_field,
                           const Tensor<uint8_t>& mask) {
    return nn::masked_epe(pred_field, target_field, mask);
}

// Per-term values after intra-term averaging, before the lambda weighting.
// A degenerate flag records that at least one sub-map had zero supervised
// pixels (it contributed an exact zero).
template <typename T>
struct LossBreakdown {
    nn::Var<T> total;
    T l_cd = T(0), l_cd_ce = T(0), l_cd_dice = T(0);
    T l_seg = T(0), l_st = T(0), l_bt = T(0);
    bool cd_degenerate = false;
    bool seg_degenerate = false;
    bool st_degenerate = false;
    bool bt_degenerate = false;

    bool any_degenerate() const {
        return cd_degenerate || seg_degenerate || st_degenerate || bt_degenerate;
    }
};

namespace detail {
template <typename T>
void check_finite(T v, const char* term) {
    if (!std::isfinite(static_cast<double>(v)))
        throw NumericalError(std::string("loss term '") + term + "' is not finite");
}
} // namespace detail

// L_tot = L_cd + lambda1 L_seg + lambda2 L_st + lambda3 L_bt. Aux terms are
// averaged over their sub-maps (temporals, axes) so lambda keeps one meaning.
// Terms with a zero lambda are still evaluated for logging but contribute no
// gradient. Missing outputs (aux heads disabled) leave their terms at zero.
template <typename T>
LossBreakdown<T> total_loss(const model::Outputs<T>& out, const LabelBatch<T>& labels,
                            const LossConfig& cfg) {
    cfg.validate();
    LossBreakdown<T> bd;
    std::vector<std::pair<nn::Var<T>, T>> combo;

    auto ce_term = [&](const nn::Var<T>& logits, const Tensor<int32_t>& target,
                       const Tensor<uint8_t>& mask, const char* name,
                       bool& degenerate) -> nn::Var<T> {
        nn::MaskedLoss<T> r = nn::masked_cross_entropy(logits, target, mask);
        detail::check_finite(r.loss->value[0], name);
        if (r.count == 0) degenerate = true;
        return r.loss;
    };

    // change: CE + Dice on the fine mask; the optional coarse head shares the
    // target and both sub-losses average in with equal say.
    {
        std::vector<nn::Var<T>> fine_parts;
        nn::MaskedLoss<T> ce = nn::masked_cross_entropy(out.change, labels.change,
                                                        labels.change_mask);
        detail::check_finite(ce.loss->value[0], "cd_ce");
        nn::MaskedLoss<T> dice = nn::masked_dice(out.change, labels.change, labels.change_mask);
        detail::check_finite(dice.loss->value[0], "cd_dice");
        if (ce.count == 0 || dice.count == 0) bd.cd_degenerate = true;
        bd.l_cd_ce = ce.loss->value[0];
        bd.l_cd_dice = dice.loss->value[0];

        const T scale = out.change_coarse ? T(0.5) : T(1);
        combo.emplace_back(ce.loss, scale * T(cfg.change_ce_weight));
        combo.emplace_back(dice.loss, scale * T(cfg.change_dice_weight));
        bd.l_cd = T(cfg.change_ce_weight) * bd.l_cd_ce + T(cfg.change_dice_weight) * bd.l_cd_dice;
        if (out.change_coarse) {
            nn::MaskedLoss<T> cce = nn::masked_cross_entropy(out.change_coarse, labels.change,
                                                             labels.change_mask);
            detail::check_finite(cce.loss->value[0], "cd_coarse_ce");
            nn::MaskedLoss<T> cdice =
                nn::masked_dice(out.change_coarse, labels.change, labels.change_mask);
            detail::check_finite(cdice.loss->value[0], "cd_coarse_dice");
            combo.emplace_back(cce.loss, scale * T(cfg.change_ce_weight));
            combo.emplace_back(cdice.loss, scale * T(cfg.change_dice_weight));
            bd.l_cd = scale * (bd.l_cd + T(cfg.change_ce_weight) * cce.loss->value[0] +
                               T(cfg.change_dice_weight) * cdice.loss->value[0]);
        }
    }

    const bool aux = static_cast<bool>(out.seg_t1);
    if (aux) {
        // segmentation: mean of the two temporal maps
        nn::Var<T> s1 = ce_term(out.seg_t1, labels.seg_t1, labels.seg_t1_mask, "seg_t1",
                                bd.seg_degenerate);
        nn::Var<T> s2 = ce_term(out.seg_t2, labels.seg_t2, labels.seg_t2_mask, "seg_t2",
                                bd.seg_degenerate);
        bd.l_seg = (s1->value[0] + s2->value[0]) / T(2);
        detail::check_finite(bd.l_seg, "seg");

        if (cfg.field_mode == model::VectorMode::classification) {
            if (!out.st_t1_x)
                throw ConfigError("classification loss but model emits regression fields");
            nn::Var<T> a = ce_term(out.st_t1_x, labels.st_t1_x, labels.st_t1_mask, "st_t1_x",
                                   bd.st_degenerate);
            nn::Var<T> b = ce_term(out.st_t1_y, labels.st_t1_y, labels.st_t1_mask, "st_t1_y",
                                   bd.st_degenerate);
            nn::Var<T> c = ce_term(out.st_t2_x, labels.st_t2_x, labels.st_t2_mask, "st_t2_x",
                                   bd.st_degenerate);
            nn::Var<T> d = ce_term(out.st_t2_y, labels.st_t2_y, labels.st_t2_mask, "st_t2_y",
                                   bd.st_degenerate);
            bd.l_st = (a->value[0] + b->value[0] + c->value[0] + d->value[0]) / T(4);
            detail::check_finite(bd.l_st, "st");
            nn::Var<T> bx =
                ce_term(out.bt_x, labels.bt_x, labels.bt_mask, "bt_x", bd.bt_degenerate);
            nn::Var<T> by =
                ce_term(out.bt_y, labels.bt_y, labels.bt_mask, "bt_y", bd.bt_degenerate);
            bd.l_bt = (bx->value[0] + by->value[0]) / T(2);
            detail::check_finite(bd.l_bt, "bt");
            if (cfg.lambda1 > 0) {
                combo.emplace_back(s1, T(cfg.lambda1) / T(2));
                combo.emplace_back(s2, T(cfg.lambda1) / T(2));
            }
            if (cfg.lambda2 > 0) {
                combo.emplace_back(a, T(cfg.lambda2) / T(4));
                combo.emplace_back(b, T(cfg.lambda2) / T(4));
                combo.emplace_back(c, T(cfg.lambda2) / T(4));
                combo.emplace_back(d, T(cfg.lambda2) / T(4));
            }
            if (cfg.lambda3 > 0) {
                combo.emplace_back(bx, T(cfg.lambda3) / T(2));
                combo.emplace_back(by, T(cfg.lambda3) / T(2));
            }
        } else {
            if (!out.st_t1_field)
                throw ConfigError("regression loss but model emits category logits");
            nn::MaskedLoss<T> e1 =
                nn::masked_epe(out.st_t1_field, labels.st_t1_field, labels.st_t1_mask);
            detail::check_finite(e1.loss->value[0], "st_t1_epe");
            nn::MaskedLoss<T> e2 =
                nn::masked_epe(out.st_t2_field, labels.st_t2_field, labels.st_t2_mask);
            detail::check_finite(e2.loss->value[0], "st_t2_epe");
            if (e1.count == 0 || e2.count == 0) bd.st_degenerate = true;
            bd.l_st = (e1.loss->value[0] + e2.loss->value[0]) / T(2);
            nn::MaskedLoss<T> eb = nn::masked_epe(out.bt_field, labels.bt_field, labels.bt_mask);
            detail::check_finite(eb.loss->value[0], "bt_epe");
            if (eb.count == 0) bd.bt_degenerate = true;
            bd.l_bt = eb.loss->value[0];
            if (cfg.lambda1 > 0) {
                combo.emplace_back(s1, T(cfg.lambda1) / T(2));
                combo.emplace_back(s2, T(cfg.lambda1) / T(2));
            }
            if (cfg.lambda2 > 0) {
                combo.emplace_back(e1.loss, T(cfg.lambda2) / T(2));
                combo.emplace_back(e2.loss, T(cfg.lambda2) / T(2));
            }
            if (cfg.lambda3 > 0) combo.emplace_back(eb.loss, T(cfg.lambda3));
        }
    }

    bd.total = nn::affine_combine(combo);
    detail::check_finite(bd.total->value[0], "total");
    return bd;
}

} // namespace mtgcd::losses
