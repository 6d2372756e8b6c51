#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "mtgcd/labelgen/labels.hpp"
#include "mtgcd/scenegen/json.hpp"
#include "mtgcd/scenegen/pair.hpp"
#include "mtgcd/scenegen/render.hpp"
#include "mtgcd/scenegen/sampler.hpp"

using namespace mtgcd;
using namespace mtgcd::scenegen;

namespace {

geom::Polygon rectangle(double x0, double y0, double w, double h) {
    return {{x0, y0}, {x0 + w, y0}, {x0 + w, y0 + h}, {x0, y0 + h}};
}

BuildingSpec simple_building(int id, double x0, double y0, double w, double h, double height) {
    BuildingSpec b;
    b.id = id;
    b.footprint = rectangle(x0, y0, w, h);
    b.height = height;
    return b;
}

// Pixel centroid of one id in an instance map.
geom::Vec2 id_centroid(const Grid<int32_t>& ids, int id) {
    double sx = 0, sy = 0;
    int n = 0;
    for (int r = 0; r < ids.height(); ++r)
        for (int c = 0; c < ids.width(); ++c)
            if (ids(r, c) == id) {
                sx += c + 0.5;
                sy += r + 0.5;
                ++n;
            }
    REQUIRE(n > 0);
    return {sx / n, sy / n};
}

} // namespace

TEST_CASE("nadir projection collapses roof onto footprint") {
    BuildingSpec b = simple_building(1, 30, 30, 10, 10, 20);
    CameraSpec cam; // tilt 0
    const InstanceRender r = project_building(b, cam, 128, 128);
    CHECK(r.displacement.x == doctest::Approx(0.0));
    CHECK(r.displacement.y == doctest::Approx(0.0));
    REQUIRE(r.roof.size() == b.footprint.size());
    for (size_t i = 0; i < r.roof.size(); ++i) {
        CHECK(r.roof[i].x == doctest::Approx(b.footprint[i].x));
        CHECK(r.roof[i].y == doctest::Approx(b.footprint[i].y));
    }
    CHECK(geom::area(r.facade_hull) == doctest::Approx(geom::area(b.footprint)));
}

TEST_CASE("axis-aligned tilt produces the 3-4-5 style translation") {
    BuildingSpec b = simple_building(1, 30, 30, 10, 10, 20);
    CameraSpec cam;
    cam.tilt = M_PI / 4.0;
    cam.azimuth = M_PI / 2.0; // east
    const InstanceRender r = project_building(b, cam, 128, 128);
    CHECK(r.displacement.x == doctest::Approx(20.0));
    CHECK(r.displacement.y == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(r.roof[0].x == doctest::Approx(50.0));
    CHECK(r.roof[0].y == doctest::Approx(30.0));
    // 20x10 facade band between footprint and roof
    CHECK(geom::area(r.facade_hull) == doctest::Approx(10 * 10 + 20 * 10));
}

TEST_CASE("rendered centroid displacement matches the closed-form oracle") {
    Rng rng(321);
    for (int trial = 0; trial < 8; ++trial) {
        const double h = rng.uniform(8, 25);
        const double tilt = rng.uniform(0.1, 0.6);
        const double az = rng.uniform(0, 2 * M_PI);
        // independent evaluation of the displacement geometry
        const double mag = h * std::tan(tilt);
        const geom::Vec2 want{mag * std::sin(az), mag * std::cos(az)};

        SceneSpec scene;
        scene.height = scene.width = 128;
        scene.camera_t1.tilt = tilt;
        scene.camera_t1.azimuth = az;
        BuildingSpec b = simple_building(1, 55, 55, 14, 12, h);
        b.present_t2 = true;
        scene.buildings.push_back(b);
        const EpochRender r = render_scene(scene, Epoch::t1);

        const geom::Vec2 roof_c = id_centroid(r.roof_ids, 1);
        const geom::Vec2 foot_c = id_centroid(r.footprint_ids, 1);
        CHECK(std::abs((roof_c.x - foot_c.x) - want.x) < 0.5);
        CHECK(std::abs((roof_c.y - foot_c.y) - want.y) < 0.5);
    }
}

TEST_CASE("projection leaving the frame is a generation error") {
    BuildingSpec b = simple_building(1, 100, 100, 20, 20, 25);
    CameraSpec cam;
    cam.tilt = 0.6;
    cam.azimuth = M_PI / 2.0;
    CHECK_THROWS_AS(project_building(b, cam, 128, 128), GenerationError);
}

TEST_CASE("rendering is deterministic and empty scenes are pure noise") {
    SceneSpec scene;
    scene.background_noise_seed = 555;
    const EpochRender a = render_scene(scene, Epoch::t1);
    const EpochRender b = render_scene(scene, Epoch::t1);
    CHECK(a.image == b.image);
    CHECK(a.roof_ids == b.roof_ids);
    const EpochRender c = render_scene(scene, Epoch::t2);
    CHECK_FALSE(a.image == c.image); // epochs draw distinct noise
    for (int r = 0; r < 128; ++r)
        for (int col = 0; col < 128; ++col) {
            CHECK(a.roof_ids(r, col) == 0);
            CHECK(a.facade_ids(r, col) == 0);
        }
}

TEST_CASE("roof pixel count stays within a perimeter band of the polygon area") {
    SceneSpec scene;
    scene.buildings.push_back(simple_building(1, 40, 40, 18, 11, 10));
    scene.camera_t1.tilt = 0.3;
    scene.camera_t1.azimuth = 1.0;
    const EpochRender r = render_scene(scene, Epoch::t1);
    int count = 0;
    for (int row = 0; row < 128; ++row)
        for (int c = 0; c < 128; ++c) count += r.roof_ids(row, c) == 1;
    CHECK(std::abs(count - 18.0 * 11.0) <= 2 * (18 + 11));
}

TEST_CASE("roofs occlude facades, later ids occlude earlier within a layer") {
    SceneSpec scene;
    // two buildings whose t1 extents overlap deliberately (hand-placed, not sampled)
    BuildingSpec a = simple_building(1, 40, 40, 16, 16, 18);
    BuildingSpec b = simple_building(2, 60, 40, 16, 16, 18);
    scene.buildings = {a, b};
    scene.camera_t1.tilt = 0.5;
    scene.camera_t1.azimuth = M_PI / 2.0; // pushes roofs east, a's roof over b's facade
    const EpochRender r = render_scene(scene, Epoch::t1);
    const InstanceRender& ia = r.instances.at(1);
    const InstanceRender& ib = r.instances.at(2);
    int contested = 0;
    for (int row = 0; row < 128; ++row)
        for (int c = 0; c < 128; ++c) {
            const geom::Vec2 q{c + 0.5, row + 0.5};
            // pixels covered by a's roof inside b's facade band must read as roof
            if (geom::contains(ia.roof, q) && geom::contains(ib.facade_hull, q) &&
                !geom::contains(ib.roof, q)) {
                ++contested;
                CHECK(r.roof_ids(row, c) == 1);
                CHECK(r.facade_ids(row, c) == 0);
            }
        }
    CHECK(contested > 50);
    // no pixel carries both a roof and a facade id
    for (int row = 0; row < 128; ++row)
        for (int c = 0; c < 128; ++c) {
            const bool both = r.roof_ids(row, c) != 0 && r.facade_ids(row, c) != 0;
            CHECK_FALSE(both);
        }
}

TEST_CASE("make_pair: all-present scene has an empty change mask") {
    SceneSpec scene;
    scene.buildings.push_back(simple_building(1, 30, 30, 12, 12, 10));
    scene.buildings.push_back(simple_building(2, 70, 70, 12, 12, 15));
    scene.camera_t1.tilt = 0.2;
    scene.camera_t2.tilt = 0.4;
    scene.camera_t2.azimuth = 2.0;
    const SamplePair p = make_pair(scene);
    for (int r = 0; r < 128; ++r)
        for (int c = 0; c < 128; ++c) {
            CHECK(p.change_mask(r, c) == 0);
            CHECK(p.ignore_mask(r, c) == 0);
        }
}

TEST_CASE("make_pair: change and ignore follow presence differences") {
    SceneSpec scene;
    BuildingSpec added = simple_building(1, 25, 25, 14, 14, 12);
    added.present_t1 = false; // appears at t2
    BuildingSpec removed = simple_building(2, 70, 25, 14, 14, 12);
    removed.present_t2 = false; // demolished
    BuildingSpec stable = simple_building(3, 45, 75, 14, 14, 12);
    scene.buildings = {added, removed, stable};
    scene.camera_t1.tilt = 0.25;
    scene.camera_t1.azimuth = 0.8;
    scene.camera_t2.tilt = 0.45;
    scene.camera_t2.azimuth = 4.0;

    const EpochRender r1 = render_scene(scene, Epoch::t1);
    const EpochRender r2 = render_scene(scene, Epoch::t2);
    const SamplePair p = make_pair(scene);

    for (int r = 0; r < 128; ++r)
        for (int c = 0; c < 128; ++c) {
            // change = union of changed buildings' roof regions across epochs
            const bool want_change = r1.roof_ids(r, c) == 2 || r2.roof_ids(r, c) == 1;
            CHECK(p.change_mask(r, c) == (want_change ? 1 : 0));
            // aux ignore = t2 roof+facade pixels of the added building only
            const bool want_ignore = r2.roof_ids(r, c) == 1 || r2.facade_ids(r, c) == 1;
            CHECK(p.ignore_mask(r, c) == (want_ignore ? 1 : 0));
            // canonicalized t2 labels under ignore
            if (p.ignore_mask(r, c)) {
                CHECK(p.seg_t2(r, c) == labelgen::kBackground);
                CHECK(p.st_t2.vx(r, c) == 0.0f);
                CHECK(p.st_t2.vy(r, c) == 0.0f);
            }
        }
}

TEST_CASE("st offsets point roof to footprint; bt is the offset difference") {
    Rng rng(777);
    SceneDistribution dist;
    dist.min_changed = 1;
    for (int trial = 0; trial < 5; ++trial) {
        const SceneSpec scene = sample_scene_seeded(dist, rng.next_u64());
        const EpochRender r1 = render_scene(scene, Epoch::t1);
        const EpochRender r2 = render_scene(scene, Epoch::t2);
        const SamplePair p = make_pair(scene);

        std::map<int, const BuildingSpec*> by_id;
        for (const BuildingSpec& b : scene.buildings) by_id[b.id] = &b;

        for (int r = 0; r < scene.height; ++r)
            for (int c = 0; c < scene.width; ++c) {
                const int32_t id1 = r1.roof_ids(r, c);
                if (id1 != 0) {
                    // independent displacement straight from the camera model
                    const geom::Vec2 d1 = scene.camera_t1.displacement(by_id[id1]->height);
                    CHECK(p.st_t1.vx(r, c) == doctest::Approx(-d1.x));
                    CHECK(p.st_t1.vy(r, c) == doctest::Approx(-d1.y));
                    if (by_id[id1]->present_t2) {
                        const geom::Vec2 d2 = scene.camera_t2.displacement(by_id[id1]->height);
                        CHECK(p.bt.vx(r, c) == doctest::Approx(d2.x - d1.x));
                        CHECK(p.bt.vy(r, c) == doctest::Approx(d2.y - d1.y));
                    } else {
                        CHECK(p.bt.vx(r, c) == 0.0f);
                        CHECK(p.bt.vy(r, c) == 0.0f);
                    }
                } else {
                    CHECK(p.st_t1.vx(r, c) == 0.0f);
                    CHECK(p.bt.vx(r, c) == 0.0f);
                }
            }
    }
}

TEST_CASE("warp consistency: roof mask shifted by its offset reproduces the footprint") {
    SceneDistribution dist;
    Rng rng(31337);
    for (int trial = 0; trial < 5; ++trial) {
        const SceneSpec scene = sample_scene_seeded(dist, rng.next_u64());
        const EpochRender r1 = render_scene(scene, Epoch::t1);
        const SamplePair p = make_pair(scene);
        for (int r = 0; r < scene.height; ++r)
            for (int c = 0; c < scene.width; ++c) {
                const int32_t id = r1.roof_ids(r, c);
                if (id == 0) continue;
                // p + V_st lands inside the building's footprint polygon
                const geom::Vec2 q{c + 0.5 + p.st_t1.vx(r, c), r + 0.5 + p.st_t1.vy(r, c)};
                CHECK(geom::contains(r1.instances.at(id).footprint, q, 1e-6));
            }
    }
}

TEST_CASE("nadir cameras degenerate to zero fields and no facade class") {
    SceneSpec scene;
    scene.buildings.push_back(simple_building(1, 40, 40, 16, 12, 22));
    const SamplePair p = make_pair(scene); // both cameras tilt 0
    bool facade = false;
    for (int r = 0; r < 128; ++r)
        for (int c = 0; c < 128; ++c) {
            facade = facade || p.seg_t1(r, c) == labelgen::kFacade;
            CHECK(p.st_t1.vx(r, c) == 0.0f);
            CHECK(p.st_t1.vy(r, c) == 0.0f);
            CHECK(p.bt.vx(r, c) == 0.0f);
            CHECK(p.bt.vy(r, c) == 0.0f);
        }
    CHECK_FALSE(facade);
}

TEST_CASE("sampled scenes satisfy their own invariants") {
    SceneDistribution dist;
    dist.min_changed = 1;
    Rng rng(1010);
    for (int trial = 0; trial < 5; ++trial) {
        const SceneSpec scene = sample_scene_seeded(dist, rng.next_u64());
        CHECK(int(scene.buildings.size()) >= dist.buildings_min);
        CHECK(int(scene.buildings.size()) <= dist.buildings_max);
        int changed = 0;
        for (const BuildingSpec& b : scene.buildings) changed += b.changed();
        CHECK(changed >= dist.min_changed);

        // roof disjointness: per-epoch, the sum of solo roof rasters equals
        // the union rasterization
        for (Epoch e : {Epoch::t1, Epoch::t2}) {
            const EpochRender render = render_scene(scene, e);
            int64_t solo_sum = 0;
            for (const auto& [id, inst] : render.instances) {
                geom::for_each_pixel(inst.roof, scene.height, scene.width,
                                     [&](int, int) { ++solo_sum; });
            }
            int64_t union_count = 0;
            for (int r = 0; r < scene.height; ++r)
                for (int c = 0; c < scene.width; ++c) union_count += render.roof_ids(r, c) != 0;
            CHECK(solo_sum == union_count);
        }
    }
}

TEST_CASE("scene sampling is a pure function of distribution and seed") {
    SceneDistribution dist;
    const SceneSpec a = sample_scene_seeded(dist, 909);
    const SceneSpec b = sample_scene_seeded(dist, 909);
    const nlohmann::json ja = a, jb = b;
    CHECK(ja.dump() == jb.dump());
    const SceneSpec c = sample_scene_seeded(dist, 910);
    CHECK(nlohmann::json(c).dump() != ja.dump());
}

TEST_CASE("scene JSON round-trips through the sidecar format") {
    SceneDistribution dist;
    const SceneSpec a = sample_scene_seeded(dist, 4321);
    const nlohmann::json j = a;
    const SceneSpec back = j.get<SceneSpec>();
    CHECK(nlohmann::json(back).dump() == j.dump());
    const SamplePair p1 = make_pair(a);
    const SamplePair p2 = make_pair(back);
    CHECK(p1 == p2);
}
