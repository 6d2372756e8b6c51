#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "mtgcd/core/errors.hpp"
#include "mtgcd/geom/polygon.hpp"

namespace mtgcd::scenegen {

enum class Epoch { t1, t2 };

struct BuildingSpec {
    int id = 0;
    geom::Polygon footprint;            // convex, ground-plane pixel coordinates
    double height = 0.0;                // vertical extent in pixels
    bool present_t1 = true;
    bool present_t2 = true;
    uint8_t roof_shade = 200;
    uint8_t facade_shade = 140;

    bool present(Epoch e) const { return e == Epoch::t1 ? present_t1 : present_t2; }
    bool changed() const { return present_t1 != present_t2; }
};

struct CameraSpec {
    double tilt = 0.0;       // off-nadir angle, radians, [0, 0.9]
    double azimuth = 0.0;    // view direction, radians
    double resolution = 1.0; // ground units per image pixel

    // Image-plane displacement of a roof at the given height relative to its
    // footprint. Zero tilt collapses to the near-nadir identity.
    geom::Vec2 displacement(double height) const {
        const double mag = height * std::tan(tilt) / resolution;
        return {mag * std::sin(azimuth), mag * std::cos(azimuth)};
    }
};

struct SceneSpec {
    int height = 128;
    int width = 128;
    std::vector<BuildingSpec> buildings;
    CameraSpec camera_t1;
    CameraSpec camera_t2;
    uint64_t background_noise_seed = 0;

    const CameraSpec& camera(Epoch e) const { return e == Epoch::t1 ? camera_t1 : camera_t2; }
};

inline void validate_building(const BuildingSpec& b) {
    if (b.footprint.size() < 3) throw GenerationError("footprint needs at least 3 vertices");
    if (geom::area(b.footprint) < 4.0) throw GenerationError("footprint is degenerate (area < 4)");
    if (geom::signed_area(b.footprint) <= 0.0) throw GenerationError("footprint must be positively oriented");
    const size_t n = b.footprint.size();
    for (size_t i = 0; i < n; ++i) {
        const geom::Vec2 e0 = b.footprint[(i + 1) % n] - b.footprint[i];
        const geom::Vec2 e1 = b.footprint[(i + 2) % n] - b.footprint[(i + 1) % n];
        if (geom::cross(e0, e1) < 0.0) throw GenerationError("footprint must be convex");
    }
    if (b.height < 0.0) throw GenerationError("negative building height");
    if (!(b.facade_shade < b.roof_shade)) throw GenerationError("facade shade must be darker than roof shade");
}

inline void validate_camera(const CameraSpec& c) {
    if (!(c.tilt >= 0.0 && c.tilt <= 0.9)) throw GenerationError("camera tilt outside [0, 0.9]");
    if (!(c.resolution > 0.0)) throw GenerationError("camera resolution must be positive");
    if (!std::isfinite(c.azimuth)) throw GenerationError("camera azimuth must be finite");
}

} // namespace mtgcd::scenegen
