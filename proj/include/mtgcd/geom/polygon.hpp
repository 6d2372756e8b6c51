#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace mtgcd::geom {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator-() const { return {-x, -y}; }
    bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }
    double norm() const { return std::hypot(x, y); }
};

inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

// Vertices in counter-clockwise order in (x right, y down) pixel coordinates.
// "Counter-clockwise" here means positive signed area under the shoelace
// formula with the y axis pointing down.
using Polygon = std::vector<Vec2>;

inline double signed_area(const Polygon& p) {
    double a = 0.0;
    const size_t n = p.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& u = p[i];
        const Vec2& v = p[(i + 1) % n];
        a += u.x * v.y - v.x * u.y;
    }
    return 0.5 * a;
}

inline double area(const Polygon& p) { return std::abs(signed_area(p)); }

inline Polygon oriented(Polygon p) {
    if (signed_area(p) < 0.0) std::reverse(p.begin(), p.end());
    return p;
}

inline Polygon translated(const Polygon& p, Vec2 d) {
    Polygon q = p;
    for (Vec2& v : q) v = v + d;
    return q;
}

// Convex, positively oriented polygon; boundary counts as inside.
inline bool contains(const Polygon& p, Vec2 q, double eps = 1e-9) {
    const size_t n = p.size();
    if (n < 3) return false;
    for (size_t i = 0; i < n; ++i) {
        const Vec2 e = p[(i + 1) % n] - p[i];
        if (cross(e, q - p[i]) < -eps) return false;
    }
    return true;
}

// Andrew monotone chain; output positively oriented, no collinear points.
inline Polygon convex_hull(std::vector<Vec2> pts) {
    std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const size_t n = pts.size();
    if (n < 3) return pts;
    std::vector<Vec2> h(2 * n);
    size_t k = 0;
    for (size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= 0) k--;
        h[k++] = pts[i];
    }
    const size_t lower = k + 1;
    for (size_t i = n - 1; i-- > 0;) {
        while (k >= lower && cross(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= 0) k--;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    return h;
}

// Minkowski sum of a convex polygon with the segment [0, d]. For a convex
// polygon this is the hull of the polygon and its translate.
inline Polygon swept(const Polygon& p, Vec2 d) {
    std::vector<Vec2> pts = p;
    for (const Vec2& v : p) pts.push_back(v + d);
    return convex_hull(std::move(pts));
}

struct BBox {
    double minx = 0, miny = 0, maxx = 0, maxy = 0;

    bool intersects(const BBox& o) const {
        return minx <= o.maxx && o.minx <= maxx && miny <= o.maxy && o.miny <= maxy;
    }
    BBox inflated(double m) const { return {minx - m, miny - m, maxx + m, maxy + m}; }
    BBox merged(const BBox& o) const {
        return {std::min(minx, o.minx), std::min(miny, o.miny), std::max(maxx, o.maxx), std::max(maxy, o.maxy)};
    }
};

inline BBox bounds(const Polygon& p) {
    BBox b{p[0].x, p[0].y, p[0].x, p[0].y};
    for (const Vec2& v : p) {
        b.minx = std::min(b.minx, v.x);
        b.miny = std::min(b.miny, v.y);
        b.maxx = std::max(b.maxx, v.x);
        b.maxy = std::max(b.maxy, v.y);
    }
    return b;
}

// Visits every pixel (r, c) whose center lies inside the polygon. Pixel (r, c)
// has its center at (c + 0.5, r + 0.5).
template <typename Fn>
inline void for_each_pixel(const Polygon& poly, int height, int width, Fn&& fn) {
    if (poly.size() < 3) return;
    const BBox b = bounds(poly);
    const int r0 = std::max(0, static_cast<int>(std::floor(b.miny - 0.5)));
    const int r1 = std::min(height - 1, static_cast<int>(std::ceil(b.maxy)));
    const int c0 = std::max(0, static_cast<int>(std::floor(b.minx - 0.5)));
    const int c1 = std::min(width - 1, static_cast<int>(std::ceil(b.maxx)));
    for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) {
            if (contains(poly, Vec2{c + 0.5, r + 0.5})) fn(r, c);
        }
    }
}

} // namespace mtgcd::geom
