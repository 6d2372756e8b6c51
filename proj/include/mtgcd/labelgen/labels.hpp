#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "mtgcd/core/errors.hpp"
#include "mtgcd/core/grid.hpp"
#include "mtgcd/scenegen/render.hpp"
#include "mtgcd/vecfield/bins.hpp"

namespace mtgcd::labelgen {

// Segmentation classes.
constexpr uint8_t kBackground = 0;
constexpr uint8_t kRoof = 1;
constexpr uint8_t kFacade = 2;
constexpr uint8_t kIgnoreLabel = 255;

// Instance-level views of a bi-temporal scene; ids are shared across epochs.
struct InstanceMaps {
    Grid<int32_t> roof_ids_t1, roof_ids_t2;
    Grid<int32_t> footprint_ids_t1, footprint_ids_t2;
    std::map<int, geom::Vec2> offsets_t1, offsets_t2;
};

// id -> (present at t1, present at t2)
using PresenceMap = std::map<int, std::pair<bool, bool>>;

inline Grid<uint8_t> derive_segmentation(const scenegen::EpochRender& render) {
    const int H = render.roof_ids.height(), W = render.roof_ids.width();
    Grid<uint8_t> seg(H, W, kBackground);
    for (int r = 0; r < H; ++r) {
        for (int c = 0; c < W; ++c) {
            if (render.roof_ids(r, c) != 0)
                seg(r, c) = kRoof;
            else if (render.facade_ids(r, c) != 0)
                seg(r, c) = kFacade;
        }
    }
    return seg;
}

// V_st points from roof toward footprint, i.e. -d on roof pixels, zero
// elsewhere. Background gets no sentinel; offset heads mask it out instead.
inline vecfield::VectorField derive_st_offsets(const Grid<int32_t>& roof_ids,
                                               const std::map<int, geom::Vec2>& offsets) {
    vecfield::VectorField f(roof_ids.height(), roof_ids.width());
    for (int r = 0; r < roof_ids.height(); ++r) {
        for (int c = 0; c < roof_ids.width(); ++c) {
            const int32_t id = roof_ids(r, c);
            if (id == 0) continue;
            const auto it = offsets.find(id);
            if (it == offsets.end()) throw LabelError("no offset vector for building id " + std::to_string(id));
            f.vx(r, c) = static_cast<float>(-it->second.x);
            f.vy(r, c) = static_cast<float>(-it->second.y);
        }
    }
    return f;
}

// Matching flow between identical roofs: on t1-roof pixels of buildings
// present in both epochs, V_bt = V_st_t1 - V_st_t2 = d2 - d1. Zero elsewhere.
inline vecfield::VectorField derive_bt_flows(const Grid<int32_t>& roof_ids_t1,
                                             const Grid<int32_t>& /*roof_ids_t2*/,
                                             const std::map<int, geom::Vec2>& offsets_t1,
                                             const std::map<int, geom::Vec2>& offsets_t2,
                                             const PresenceMap& presence) {
    vecfield::VectorField f(roof_ids_t1.height(), roof_ids_t1.width());
    for (int r = 0; r < roof_ids_t1.height(); ++r) {
        for (int c = 0; c < roof_ids_t1.width(); ++c) {
            const int32_t id = roof_ids_t1(r, c);
            if (id == 0) continue;
            const auto pit = presence.find(id);
            if (pit == presence.end() || !pit->second.first || !pit->second.second) continue;
            const auto d1 = offsets_t1.find(id);
            const auto d2 = offsets_t2.find(id);
            if (d1 == offsets_t1.end() || d2 == offsets_t2.end())
                throw LabelError("unchanged building " + std::to_string(id) + " lacks an epoch offset");
            f.vx(r, c) = static_cast<float>(d2->second.x - d1->second.x);
            f.vy(r, c) = static_cast<float>(d2->second.y - d1->second.y);
        }
    }
    return f;
}

// Auxiliary-label ignore region: the t2 roof and facade pixels of buildings
// whose presence differs between epochs. Removed buildings have no t2 pixels,
// so only additions contribute. Change supervision never consumes this mask.
inline Grid<uint8_t> derive_ignore_mask(const PresenceMap& presence,
                                        const Grid<int32_t>& roof_ids_t2,
                                        const Grid<int32_t>& facade_ids_t2) {
    const int H = roof_ids_t2.height(), W = roof_ids_t2.width();
    Grid<uint8_t> mask(H, W, 0);
    auto changed = [&](int32_t id) {
        if (id == 0) return false;
        const auto it = presence.find(id);
        return it != presence.end() && it->second.first != it->second.second;
    };
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c)
            if (changed(roof_ids_t2(r, c)) || changed(facade_ids_t2(r, c))) mask(r, c) = 1;
    return mask;
}

} // namespace mtgcd::labelgen
