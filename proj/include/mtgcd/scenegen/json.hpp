#pragma once

#include <json.hpp>
#include "mtgcd/scenegen/sampler.hpp"
#include "mtgcd/scenegen/types.hpp"

// JSON forms for scene descriptions; meta.json sidecars and experiment
// configs both use them.

namespace mtgcd::geom {

inline void to_json(nlohmann::json& j, const Vec2& v) { j = nlohmann::json::array({v.x, v.y}); }
inline void from_json(const nlohmann::json& j, Vec2& v) {
    v.x = j.at(0).get<double>();
    v.y = j.at(1).get<double>();
}

} // namespace mtgcd::geom

namespace mtgcd::scenegen {

inline void to_json(nlohmann::json& j, const CameraSpec& c) {
    j = nlohmann::json{{"tilt", c.tilt}, {"azimuth", c.azimuth}, {"resolution", c.resolution}};
}
inline void from_json(const nlohmann::json& j, CameraSpec& c) {
    CameraSpec d;
    c.tilt = j.value("tilt", d.tilt);
    c.azimuth = j.value("azimuth", d.azimuth);
    c.resolution = j.value("resolution", d.resolution);
}

inline void to_json(nlohmann::json& j, const BuildingSpec& b) {
    j = nlohmann::json{{"id", b.id},
                       {"footprint", b.footprint},
                       {"height", b.height},
                       {"present_t1", b.present_t1},
                       {"present_t2", b.present_t2},
                       {"roof_shade", int(b.roof_shade)},
                       {"facade_shade", int(b.facade_shade)}};
}
inline void from_json(const nlohmann::json& j, BuildingSpec& b) {
    b.id = j.at("id").get<int>();
    b.footprint = j.at("footprint").get<geom::Polygon>();
    b.height = j.at("height").get<double>();
    b.present_t1 = j.at("present_t1").get<bool>();
    b.present_t2 = j.at("present_t2").get<bool>();
    b.roof_shade = static_cast<uint8_t>(j.value("roof_shade", 200));
    b.facade_shade = static_cast<uint8_t>(j.value("facade_shade", 140));
}

inline void to_json(nlohmann::json& j, const SceneSpec& s) {
    j = nlohmann::json{{"height", s.height},
                       {"width", s.width},
                       {"buildings", s.buildings},
                       {"camera_t1", s.camera_t1},
                       {"camera_t2", s.camera_t2},
                       {"background_noise_seed", s.background_noise_seed}};
}
inline void from_json(const nlohmann::json& j, SceneSpec& s) {
    s.height = j.at("height").get<int>();
    s.width = j.at("width").get<int>();
    s.buildings = j.at("buildings").get<std::vector<BuildingSpec>>();
    s.camera_t1 = j.at("camera_t1").get<CameraSpec>();
    s.camera_t2 = j.at("camera_t2").get<CameraSpec>();
    s.background_noise_seed = j.value("background_noise_seed", uint64_t(0));
}

inline void to_json(nlohmann::json& j, const SceneDistribution& d) {
    j = nlohmann::json{{"image_height", d.image_height},
                       {"image_width", d.image_width},
                       {"buildings_min", d.buildings_min},
                       {"buildings_max", d.buildings_max},
                       {"height_min", d.height_min},
                       {"height_max", d.height_max},
                       {"tilt_min", d.tilt_min},
                       {"tilt_max", d.tilt_max},
                       {"side_min", d.side_min},
                       {"side_max", d.side_max},
                       {"p_present_both", d.p_present_both},
                       {"min_changed", d.min_changed},
                       {"roof_shade_min", d.roof_shade_min},
                       {"roof_shade_max", d.roof_shade_max},
                       {"facade_delta_min", d.facade_delta_min},
                       {"facade_delta_max", d.facade_delta_max}};
}
inline void from_json(const nlohmann::json& j, SceneDistribution& d) {
    SceneDistribution def;
    d.image_height = j.value("image_height", def.image_height);
    d.image_width = j.value("image_width", def.image_width);
    d.buildings_min = j.value("buildings_min", def.buildings_min);
    d.buildings_max = j.value("buildings_max", def.buildings_max);
    d.height_min = j.value("height_min", def.height_min);
    d.height_max = j.value("height_max", def.height_max);
    d.tilt_min = j.value("tilt_min", def.tilt_min);
    d.tilt_max = j.value("tilt_max", def.tilt_max);
    d.side_min = j.value("side_min", def.side_min);
    d.side_max = j.value("side_max", def.side_max);
    d.p_present_both = j.value("p_present_both", def.p_present_both);
    d.min_changed = j.value("min_changed", def.min_changed);
    d.roof_shade_min = j.value("roof_shade_min", def.roof_shade_min);
    d.roof_shade_max = j.value("roof_shade_max", def.roof_shade_max);
    d.facade_delta_min = j.value("facade_delta_min", def.facade_delta_min);
    d.facade_delta_max = j.value("facade_delta_max", def.facade_delta_max);
}

} // namespace mtgcd::scenegen
