#pragma once

#include <cmath>
#include <vector>

#include "mtgcd/core/rng.hpp"
#include "mtgcd/scenegen/types.hpp"

namespace mtgcd::scenegen {

// Distribution a random scene is drawn from. The defaults are the desk-scale
// training distribution; the out-domain test split shifts tilt and density.
struct SceneDistribution {
    int image_height = 128;
    int image_width = 128;
    int buildings_min = 2;
    int buildings_max = 6;
    double height_min = 5.0;
    double height_max = 30.0;
    double tilt_min = 0.0;
    double tilt_max = 0.6;
    double side_min = 8.0;
    double side_max = 24.0;
    double p_present_both = 0.7;   // remaining mass splits evenly: only-t1 / only-t2
    int min_changed = 0;           // lower bound on changed buildings per scene
    int roof_shade_min = 150;
    int roof_shade_max = 230;
    int facade_delta_min = 40;     // facade_shade = roof_shade - delta
    int facade_delta_max = 80;
};

namespace detail {

// Axis-aligned rectangle footprint, positively oriented.
inline geom::Polygon rect(double x0, double y0, double w, double h) {
    return {{x0, y0}, {x0 + w, y0}, {x0 + w, y0 + h}, {x0, y0 + h}};
}

} // namespace detail

// Rejection-samples a scene whose buildings have pairwise disjoint projected
// extents across BOTH epochs, inflated by a safety margin. That is stricter
// than the roof-disjointness invariant and keeps every per-building label
// region exact. Throws GenerationError when placement fails repeatedly.
inline SceneSpec sample_scene(const SceneDistribution& dist, Rng& rng) {
    SceneSpec scene;
    scene.height = dist.image_height;
    scene.width = dist.image_width;
    scene.background_noise_seed = rng.next_u64();
    scene.camera_t1.tilt = rng.uniform(dist.tilt_min, dist.tilt_max);
    scene.camera_t1.azimuth = rng.uniform(0.0, 2.0 * M_PI);
    scene.camera_t2.tilt = rng.uniform(dist.tilt_min, dist.tilt_max);
    scene.camera_t2.azimuth = rng.uniform(0.0, 2.0 * M_PI);

    const int target = rng.uniform_int(dist.buildings_min, dist.buildings_max);
    std::vector<geom::BBox> occupied;
    int failures = 0;
    while (static_cast<int>(scene.buildings.size()) < target) {
        if (failures > 200) {
            if (static_cast<int>(scene.buildings.size()) >= dist.buildings_min) break;
            throw GenerationError("could not place the minimum number of buildings");
        }
        BuildingSpec b;
        b.id = static_cast<int>(scene.buildings.size()) + 1;
        b.height = rng.uniform(dist.height_min, dist.height_max);
        const double w = rng.uniform(dist.side_min, dist.side_max);
        const double h = rng.uniform(dist.side_min, dist.side_max);
        const double x0 = rng.uniform(0.0, scene.width - w);
        const double y0 = rng.uniform(0.0, scene.height - h);
        b.footprint = detail::rect(x0, y0, w, h);
        const double u = rng.uniform(0.0, 1.0);
        if (u < dist.p_present_both) {
            b.present_t1 = b.present_t2 = true;
        } else if (u < dist.p_present_both + 0.5 * (1.0 - dist.p_present_both)) {
            b.present_t1 = true;
            b.present_t2 = false;
        } else {
            b.present_t1 = false;
            b.present_t2 = true;
        }
        b.roof_shade = static_cast<uint8_t>(rng.uniform_int(dist.roof_shade_min, dist.roof_shade_max));
        b.facade_shade = static_cast<uint8_t>(int(b.roof_shade) - rng.uniform_int(dist.facade_delta_min, dist.facade_delta_max));

        const geom::BBox e1 = geom::bounds(geom::swept(b.footprint, scene.camera_t1.displacement(b.height)));
        const geom::BBox e2 = geom::bounds(geom::swept(b.footprint, scene.camera_t2.displacement(b.height)));
        const geom::BBox extent = e1.merged(e2).inflated(2.0);
        const bool in_frame = extent.minx >= 0 && extent.miny >= 0 && extent.maxx <= scene.width && extent.maxy <= scene.height;
        bool clear = in_frame;
        for (const geom::BBox& o : occupied)
            if (extent.intersects(o)) { clear = false; break; }
        if (!clear) {
            ++failures;
            continue;
        }
        occupied.push_back(extent);
        scene.buildings.push_back(std::move(b));
    }

    int changed = 0;
    for (const BuildingSpec& b : scene.buildings)
        if (b.changed()) ++changed;
    for (size_t i = 0; i < scene.buildings.size() && changed < dist.min_changed; ++i) {
        BuildingSpec& b = scene.buildings[i];
        if (!b.changed()) {
            b.present_t2 = !b.present_t2;
            ++changed;
        }
    }
    return scene;
}

// Retries whole scenes under derived seeds until one satisfies the
// distribution; the result is a pure function of (dist, seed).
inline SceneSpec sample_scene_seeded(const SceneDistribution& dist, uint64_t seed) {
    for (uint64_t attempt = 0; attempt < 32; ++attempt) {
        Rng rng = Rng(seed).fork(attempt + 1);
        try {
            return sample_scene(dist, rng);
        } catch (const GenerationError&) {
            continue;
        }
    }
    throw GenerationError("scene sampling failed after repeated attempts");
}

} // namespace mtgcd::scenegen
