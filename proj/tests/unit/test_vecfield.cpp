#include <doctest.h>

#include <cmath>
#include <limits>

#include "mtgcd/core/rng.hpp"
#include "mtgcd/vecfield/bins.hpp"
#include "mtgcd/vecfield/json.hpp"

using namespace mtgcd;
using vecfield::BinTable;

namespace {

// Brute-force bin search over (lo, hi] intervals with infinite outer bins.
int oracle_bin(double v, const BinTable& t) {
    const int n = t.categories();
    for (int k = 0; k < n; ++k) {
        const double lo = (k == 0) ? -std::numeric_limits<double>::infinity() : t.edges[k - 1];
        const double hi = (k == n - 1) ? std::numeric_limits<double>::infinity() : t.edges[k];
        if (v > lo && v <= hi) return k;
    }
    return n - 1;
}

} // namespace

TEST_CASE("bin boundaries are (lo, hi] with clamping outer bins") {
    const BinTable t = BinTable::standard();
    t.validate();
    CHECK(vecfield::encode_value(0.0, t) == 4);
    CHECK(vecfield::encode_value(-8.0, t) == 3);
    CHECK(vecfield::encode_value(-7.999, t) == 4);
    CHECK(vecfield::encode_value(8.0, t) == 5);
    CHECK(vecfield::encode_value(8.001, t) == 6);
    CHECK(vecfield::encode_value(96.0, t) == 8);
    CHECK(vecfield::encode_value(1000.0, t) == 9);
    CHECK(vecfield::encode_value(-1000.0, t) == 0);
}

TEST_CASE("encode agrees with the linear-scan oracle") {
    const BinTable t = BinTable::standard();
    Rng rng(42);
    for (int i = 0; i < 2000; ++i) {
        const double v = rng.uniform(-120.0, 120.0);
        CHECK(vecfield::encode_value(v, t) == oracle_bin(v, t));
    }
    for (double v : t.edges) {
        CHECK(vecfield::encode_value(v, t) == oracle_bin(v, t));
        CHECK(vecfield::encode_value(std::nextafter(v, 1e9), t) == oracle_bin(std::nextafter(v, 1e9), t));
    }
}

TEST_CASE("decode of encode stays within the bin half-width for finite bins") {
    const BinTable t = BinTable::standard();
    Rng rng(43);
    for (int i = 0; i < 2000; ++i) {
        const double v = rng.uniform(std::nextafter(t.edges.front(), 1e9), t.edges.back());
        const int k = vecfield::encode_value(v, t);
        REQUIRE(k > 0);
        REQUIRE(k < t.categories() - 1);
        const double hw = 0.5 * (t.edges[k] - t.edges[k - 1]);
        CHECK(std::abs(t.representatives[k] - v) <= hw + 1e-12);
    }
}

TEST_CASE("grid encode/decode round trip") {
    const BinTable t = BinTable::standard();
    vecfield::VectorField f(4, 5);
    Rng rng(44);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 5; ++c) {
            f.vx(r, c) = static_cast<float>(rng.uniform(-150, 150));
            f.vy(r, c) = static_cast<float>(rng.uniform(-150, 150));
        }
    const vecfield::CategoryMaps m = vecfield::encode(f, t);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 5; ++c) {
            CHECK(m.x(r, c) == oracle_bin(f.vx(r, c), t));
            CHECK(m.y(r, c) == oracle_bin(f.vy(r, c), t));
        }
    const vecfield::VectorField d = vecfield::decode(m.x, m.y, t);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 5; ++c) {
            CHECK(d.vx(r, c) == doctest::Approx(t.representatives[m.x(r, c)]));
        }
}

TEST_CASE("zero maps to the bin whose representative is -4") {
    const BinTable t = BinTable::standard();
    Grid<uint8_t> cx(1, 1, 4), cy(1, 1, 4);
    const vecfield::VectorField f = vecfield::decode(cx, cy, t);
    CHECK(f.vx(0, 0) == doctest::Approx(-4.0));
}

TEST_CASE("bin table validation rejects malformed tables") {
    BinTable t = BinTable::standard();
    t.edges[3] = t.edges[4]; // not strictly increasing
    CHECK_THROWS_AS(t.validate(), ConfigError);

    BinTable u = BinTable::standard();
    u.representatives[5] = 9.0; // outside (0, 8]
    CHECK_THROWS_AS(u.validate(), ConfigError);

    BinTable v;
    CHECK_THROWS_AS(v.validate(), ConfigError);
}

TEST_CASE("decode rejects out-of-range categories") {
    const BinTable t = BinTable::standard();
    Grid<uint8_t> cx(1, 1, 10), cy(1, 1, 0);
    CHECK_THROWS_AS(vecfield::decode(cx, cy, t), EncodingError);
}

TEST_CASE("bin table JSON round trip") {
    const BinTable t = BinTable::standard();
    const nlohmann::json j = t;
    const BinTable u = j.get<BinTable>();
    CHECK(u.edges == t.edges);
    CHECK(u.representatives == t.representatives);
}
