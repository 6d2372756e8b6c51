#pragma once

#include <cstdint>

#include "mtgcd/labelgen/labels.hpp"
#include "mtgcd/scenegen/render.hpp"
#include "mtgcd/vecfield/bins.hpp"

namespace mtgcd::scenegen {

// One training sample: both rasters plus the full label set. Auxiliary t2
// labels inside the ignore region are canonicalized to background so a pair
// round-trips bit-identically through the on-disk layout, where the ignore
// region is stored as 255 in seg_t2.
struct SamplePair {
    Image image_t1, image_t2;
    Grid<uint8_t> seg_t1, seg_t2;        // 0 background, 1 roof, 2 facade
    vecfield::VectorField st_t1, st_t2;  // roof-to-footprint offsets
    vecfield::VectorField bt;            // t1 -> t2 matching flow on unchanged roofs
    Grid<uint8_t> change_mask;           // 1 where building presence differs
    Grid<uint8_t> change_ignore;         // pixels excluded from change loss/metrics
    Grid<uint8_t> ignore_mask;           // pixels excluded from auxiliary losses

    int height() const { return image_t1.height(); }
    int width() const { return image_t1.width(); }

    bool operator==(const SamplePair& o) const {
        return image_t1 == o.image_t1 && image_t2 == o.image_t2 && seg_t1 == o.seg_t1 && seg_t2 == o.seg_t2 &&
               st_t1 == o.st_t1 && st_t2 == o.st_t2 && bt == o.bt && change_mask == o.change_mask &&
               change_ignore == o.change_ignore && ignore_mask == o.ignore_mask;
    }
};

inline labelgen::PresenceMap presence_map(const SceneSpec& scene) {
    labelgen::PresenceMap p;
    for (const BuildingSpec& b : scene.buildings) p[b.id] = {b.present_t1, b.present_t2};
    return p;
}

// Renders both epochs and derives every label. The change mask is the union
// of a changed building's roof regions in whichever epochs it exists.
inline SamplePair make_pair(const SceneSpec& scene) {
    const EpochRender r1 = render_scene(scene, Epoch::t1);
    const EpochRender r2 = render_scene(scene, Epoch::t2);
    const labelgen::PresenceMap presence = presence_map(scene);

    SamplePair out;
    out.image_t1 = r1.image;
    out.image_t2 = r2.image;
    out.seg_t1 = labelgen::derive_segmentation(r1);
    out.seg_t2 = labelgen::derive_segmentation(r2);
    out.st_t1 = labelgen::derive_st_offsets(r1.roof_ids, r1.offsets);
    out.st_t2 = labelgen::derive_st_offsets(r2.roof_ids, r2.offsets);
    out.bt = labelgen::derive_bt_flows(r1.roof_ids, r2.roof_ids, r1.offsets, r2.offsets, presence);
    out.ignore_mask = labelgen::derive_ignore_mask(presence, r2.roof_ids, r2.facade_ids);

    const int H = scene.height, W = scene.width;
    out.change_mask = Grid<uint8_t>(H, W, 0);
    out.change_ignore = Grid<uint8_t>(H, W, 0);
    auto changed = [&](int32_t id) {
        if (id == 0) return false;
        const auto it = presence.find(id);
        return it != presence.end() && it->second.first != it->second.second;
    };
    for (int r = 0; r < H; ++r) {
        for (int c = 0; c < W; ++c) {
            if (changed(r1.roof_ids(r, c)) || changed(r2.roof_ids(r, c))) out.change_mask(r, c) = 1;
            if (out.ignore_mask(r, c)) {
                out.seg_t2(r, c) = labelgen::kBackground;
                out.st_t2.vx(r, c) = 0.0f;
                out.st_t2.vy(r, c) = 0.0f;
            }
        }
    }
    return out;
}

} // namespace mtgcd::scenegen
