#pragma once

#include <cmath>

#include "mtgcd/harness/config.hpp"
#include "mtgcd/scenegen/pair.hpp"

namespace mtgcd::harness {

// Geometric ops move every raster of a sample identically; the vector-valued
// labels additionally have their components remapped: hflip negates Vx, vflip
// negates Vy, and a quarter turn maps (Vx, Vy) to (-Vy, Vx). Pixel (r, c) of
// a rotated sample comes from (H-1-c, r) of the source.

namespace detail {

template <typename F>
Image remap_image(const Image& src, int H, int W, F at) {
    Image out(H, W);
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c) {
            const auto [sr, sc] = at(r, c);
            for (int ch = 0; ch < 3; ++ch) out.at(r, c, ch) = src.at(sr, sc, ch);
        }
    return out;
}

template <typename T, typename F>
Grid<T> remap_grid(const Grid<T>& src, int H, int W, F at) {
    Grid<T> out(H, W);
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c) {
            const auto [sr, sc] = at(r, c);
            out(r, c) = src(sr, sc);
        }
    return out;
}

// vx_sign/vy_sign/swap describe the component remap applied after moving.
template <typename F>
vecfield::VectorField remap_field(const vecfield::VectorField& src, int H, int W, F at,
                                  float vx_sign, float vy_sign, bool swap) {
    vecfield::VectorField out(H, W);
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c) {
            const auto [sr, sc] = at(r, c);
            const float vx = src.vx(sr, sc), vy = src.vy(sr, sc);
            out.vx(r, c) = vx_sign * (swap ? vy : vx);
            out.vy(r, c) = vy_sign * (swap ? vx : vy);
        }
    return out;
}

template <typename F>
scenegen::SamplePair remap_pair(const scenegen::SamplePair& p, int H, int W, F at, float vx_sign,
                                float vy_sign, bool swap) {
    scenegen::SamplePair out;
    out.image_t1 = remap_image(p.image_t1, H, W, at);
    out.image_t2 = remap_image(p.image_t2, H, W, at);
    out.seg_t1 = remap_grid(p.seg_t1, H, W, at);
    out.seg_t2 = remap_grid(p.seg_t2, H, W, at);
    out.st_t1 = remap_field(p.st_t1, H, W, at, vx_sign, vy_sign, swap);
    out.st_t2 = remap_field(p.st_t2, H, W, at, vx_sign, vy_sign, swap);
    out.bt = remap_field(p.bt, H, W, at, vx_sign, vy_sign, swap);
    out.change_mask = remap_grid(p.change_mask, H, W, at);
    out.change_ignore = remap_grid(p.change_ignore, H, W, at);
    out.ignore_mask = remap_grid(p.ignore_mask, H, W, at);
    return out;
}

} // namespace detail

inline scenegen::SamplePair crop(const scenegen::SamplePair& p, int r0, int c0, int size) {
    if (size <= 0 || r0 < 0 || c0 < 0 || r0 + size > p.height() || c0 + size > p.width())
        throw ConfigError("crop window exceeds the sample");
    return detail::remap_pair(
        p, size, size, [r0, c0](int r, int c) { return std::pair<int, int>{r + r0, c + c0}; },
        1.0f, 1.0f, false);
}

inline scenegen::SamplePair hflip(const scenegen::SamplePair& p) {
    const int H = p.height(), W = p.width();
    return detail::remap_pair(
        p, H, W, [W](int r, int c) { return std::pair<int, int>{r, W - 1 - c}; }, -1.0f, 1.0f,
        false);
}

inline scenegen::SamplePair vflip(const scenegen::SamplePair& p) {
    const int H = p.height(), W = p.width();
    return detail::remap_pair(
        p, H, W, [H](int r, int c) { return std::pair<int, int>{H - 1 - r, c}; }, 1.0f, -1.0f,
        false);
}

// One quarter turn; output is W x H.
inline scenegen::SamplePair rot90(const scenegen::SamplePair& p) {
    const int H = p.width(), W = p.height(); // swapped
    return detail::remap_pair(
        p, H, W, [W](int r, int c) { return std::pair<int, int>{W - 1 - c, r}; }, -1.0f, 1.0f,
        true);
}

// brightness/contrast/saturation factors around 1. Contrast pivots on the
// post-brightness mean luminance, saturation on per-pixel luminance.
inline Image color_jitter(const Image& img, double brightness, double contrast,
                          double saturation) {
    const int H = img.height(), W = img.width();
    auto luma = [](double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; };
    double mean = 0.0;
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c)
            mean += luma(img.at(r, c, 0), img.at(r, c, 1), img.at(r, c, 2)) * brightness;
    mean /= double(H) * W;

    Image out(H, W);
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c) {
            double v[3];
            for (int ch = 0; ch < 3; ++ch) v[ch] = img.at(r, c, ch) * brightness;
            for (int ch = 0; ch < 3; ++ch) v[ch] = mean + (v[ch] - mean) * contrast;
            const double g = luma(v[0], v[1], v[2]);
            for (int ch = 0; ch < 3; ++ch) {
                double x = g + (v[ch] - g) * saturation;
                x = std::clamp(x, 0.0, 255.0);
                out.at(r, c, ch) = static_cast<uint8_t>(std::lround(x));
            }
        }
    return out;
}

// Random crop, then flips, then a rotation from {90, 180, 270, 360} degrees,
// then per-temporal color jitter. One rng stream keeps the whole draw order
// reproducible.
inline scenegen::SamplePair augment(const scenegen::SamplePair& p, const AugmentConfig& cfg,
                                    int crop_size, Rng& rng) {
    if (crop_size > p.height() || crop_size > p.width())
        throw ConfigError("crop_size exceeds the sample size");
    const int r0 = rng.uniform_int(0, p.height() - crop_size);
    const int c0 = rng.uniform_int(0, p.width() - crop_size);
    scenegen::SamplePair out = crop(p, r0, c0, crop_size);
    if (cfg.hflip && rng.bernoulli(0.5)) out = hflip(out);
    if (cfg.vflip && rng.bernoulli(0.5)) out = vflip(out);
    if (cfg.rot90) {
        const int quarters = rng.uniform_int(1, 4) % 4;
        for (int k = 0; k < quarters; ++k) out = rot90(out);
    }
    if (cfg.color_jitter) {
        auto factor = [&rng, &cfg] { return rng.uniform(1.0 - cfg.jitter, 1.0 + cfg.jitter); };
        const double b1 = factor(), c1 = factor(), s1 = factor();
        const double b2 = factor(), c2 = factor(), s2 = factor();
        out.image_t1 = color_jitter(out.image_t1, b1, c1, s1);
        out.image_t2 = color_jitter(out.image_t2, b2, c2, s2);
    }
    return out;
}

} // namespace mtgcd::harness
