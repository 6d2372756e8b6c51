#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <vector>

#include "mtgcd/core/grid.hpp"
#include "mtgcd/core/rng.hpp"
#include "mtgcd/scenegen/types.hpp"

namespace mtgcd::scenegen {

// One building as seen by one camera. The facade hull is the Minkowski sum of
// the footprint with the displacement segment; the visible facade region is
// that hull minus the roof, resolved at raster time.
struct InstanceRender {
    geom::Polygon roof;
    geom::Polygon facade_hull;
    geom::Polygon footprint;
    geom::Vec2 displacement;
};

inline InstanceRender project_building(const BuildingSpec& b, const CameraSpec& cam, int frame_h, int frame_w) {
    validate_building(b);
    validate_camera(cam);
    const geom::Vec2 d = cam.displacement(b.height);
    InstanceRender out;
    out.displacement = d;
    out.footprint = b.footprint;
    out.roof = geom::translated(b.footprint, d);
    out.facade_hull = geom::swept(b.footprint, d);
    const geom::BBox bb = geom::bounds(out.facade_hull);
    if (bb.minx < 0.0 || bb.miny < 0.0 || bb.maxx > frame_w || bb.maxy > frame_h)
        throw GenerationError("projected building leaves the frame");
    return out;
}

struct EpochRender {
    Image image;
    Grid<int32_t> roof_ids;      // owning building id per roof pixel, 0 = none
    Grid<int32_t> facade_ids;    // owning building id per visible facade pixel
    Grid<int32_t> footprint_ids; // ground-plane footprint instances (not drawn)
    std::map<int, geom::Vec2> offsets; // building id -> displacement d
    std::map<int, InstanceRender> instances;
};

// Flat-shaded composition: all facades first (ascending id), then all roofs,
// so roofs always occlude facades; later ids occlude earlier ones within a
// layer. Uniform noise of +-10 intensity levels is applied last, pixel by
// pixel, so the raster is a pure function of the scene spec.
inline EpochRender render_scene(const SceneSpec& scene, Epoch epoch) {
    const int H = scene.height, W = scene.width;
    EpochRender out;
    out.image = Image(H, W);
    out.roof_ids = Grid<int32_t>(H, W, 0);
    out.facade_ids = Grid<int32_t>(H, W, 0);
    out.footprint_ids = Grid<int32_t>(H, W, 0);

    const CameraSpec& cam = scene.camera(epoch);
    std::vector<const BuildingSpec*> present;
    for (const BuildingSpec& b : scene.buildings)
        if (b.present(epoch)) present.push_back(&b);
    std::sort(present.begin(), present.end(), [](auto* a, auto* b) { return a->id < b->id; });

    constexpr uint8_t kBackgroundShade = 96;
    Grid<uint8_t> shade(H, W, kBackgroundShade);

    for (const BuildingSpec* b : present) {
        InstanceRender inst = project_building(*b, cam, H, W);
        geom::for_each_pixel(inst.facade_hull, H, W, [&](int r, int c) {
            if (geom::contains(inst.roof, geom::Vec2{c + 0.5, r + 0.5})) return; // roof part of the hull
            shade(r, c) = b->facade_shade;
            out.facade_ids(r, c) = b->id;
        });
        geom::for_each_pixel(inst.footprint, H, W, [&](int r, int c) { out.footprint_ids(r, c) = b->id; });
        out.offsets[b->id] = inst.displacement;
        out.instances[b->id] = std::move(inst);
    }
    for (const BuildingSpec* b : present) {
        const InstanceRender& inst = out.instances[b->id];
        geom::for_each_pixel(inst.roof, H, W, [&](int r, int c) {
            shade(r, c) = b->roof_shade;
            out.roof_ids(r, c) = b->id;
            out.facade_ids(r, c) = 0;
        });
    }

    Rng noise(scene.background_noise_seed + (epoch == Epoch::t1 ? 0u : 0x9e3779b9u));
    for (int r = 0; r < H; ++r) {
        for (int c = 0; c < W; ++c) {
            const int n = noise.uniform_int(-10, 10);
            const int v = std::clamp(int(shade(r, c)) + n, 0, 255);
            out.image.at(r, c, 0) = static_cast<uint8_t>(v);
            out.image.at(r, c, 1) = static_cast<uint8_t>(v);
            out.image.at(r, c, 2) = static_cast<uint8_t>(v);
        }
    }
    return out;
}

} // namespace mtgcd::scenegen
