#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mtgcd/core/errors.hpp"
#include "mtgcd/core/grid.hpp"

namespace mtgcd::vecfield {

// Per-pixel (Vx, Vy) in pixel units. Vx is horizontal (column), Vy vertical (row).
struct VectorField {
    Grid<float> vx;
    Grid<float> vy;

    VectorField() = default;
    VectorField(int height, int width) : vx(height, width), vy(height, width) {}

    int height() const { return vx.height(); }
    int width() const { return vx.width(); }

    bool operator==(const VectorField& o) const { return vx == o.vx && vy == o.vy; }
};

// Bin layout for one axis: edges e0 < e1 < ... define categories
// (-inf, e0], (e0, e1], ..., (e_last, +inf). Values past the outer edges clamp
// into the first/last category. The same table is applied to both axes.
struct BinTable {
    std::vector<double> edges;
    std::vector<double> representatives;

    int categories() const { return static_cast<int>(representatives.size()); }

    void validate() const {
        if (edges.empty() || representatives.size() != edges.size() + 1)
            throw ConfigError("bin table needs n edges and n+1 representatives");
        for (size_t i = 1; i < edges.size(); ++i)
            if (!(edges[i - 1] < edges[i])) throw ConfigError("bin edges must be strictly increasing");
        for (size_t k = 0; k < representatives.size(); ++k) {
            const double lo = (k == 0) ? -std::numeric_limits<double>::infinity() : edges[k - 1];
            const double hi = (k == edges.size()) ? std::numeric_limits<double>::infinity() : edges[k];
            if (!(representatives[k] > lo && representatives[k] <= hi))
                throw ConfigError("representative of bin " + std::to_string(k) + " lies outside its bin");
        }
    }

    // Symmetric, log-spaced around zero: fine bins near zero, wide bins for
    // tall-building displacements. Ten categories.
    static BinTable standard() {
        BinTable t;
        t.edges = {-96.0, -48.0, -24.0, -8.0, 0.0, 8.0, 24.0, 48.0, 96.0};
        t.representatives = {-120.0, -72.0, -36.0, -16.0, -4.0, 4.0, 16.0, 36.0, 72.0, 120.0};
        return t;
    }
};

inline int encode_value(double v, const BinTable& t) {
    const auto it = std::lower_bound(t.edges.begin(), t.edges.end(), v);
    return static_cast<int>(it - t.edges.begin());
}

struct CategoryMaps {
    Grid<uint8_t> x;
    Grid<uint8_t> y;
};

inline CategoryMaps encode(const VectorField& f, const BinTable& t) {
    t.validate();
    CategoryMaps m{Grid<uint8_t>(f.height(), f.width()), Grid<uint8_t>(f.height(), f.width())};
    for (int r = 0; r < f.height(); ++r) {
        for (int c = 0; c < f.width(); ++c) {
            m.x(r, c) = static_cast<uint8_t>(encode_value(f.vx(r, c), t));
            m.y(r, c) = static_cast<uint8_t>(encode_value(f.vy(r, c), t));
        }
    }
    return m;
}

inline VectorField decode(const Grid<uint8_t>& cx, const Grid<uint8_t>& cy, const BinTable& t) {
    t.validate();
    VectorField f(cx.height(), cx.width());
    const int n = t.categories();
    for (int r = 0; r < cx.height(); ++r) {
        for (int c = 0; c < cx.width(); ++c) {
            if (cx(r, c) >= n || cy(r, c) >= n)
                throw EncodingError("category out of range at (" + std::to_string(r) + "," + std::to_string(c) + ")");
            f.vx(r, c) = static_cast<float>(t.representatives[cx(r, c)]);
            f.vy(r, c) = static_cast<float>(t.representatives[cy(r, c)]);
        }
    }
    return f;
}

} // namespace mtgcd::vecfield
