#pragma once

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>
#include "mtgcd/core/serialize.hpp"
#include "mtgcd/io/png.hpp"
#include "mtgcd/scenegen/json.hpp"
#include "mtgcd/scenegen/pair.hpp"

namespace mtgcd::io {

// On-disk pair layout, one directory per sample:
//   img_t1.png img_t2.png        8-bit RGB
//   seg_t1.png seg_t2.png        0 bg / 1 roof / 2 facade; 255 marks the
//                                auxiliary ignore region (t2 only)
//   change.png                   0 / 1; 255 excluded from change supervision
//   st_t1.f32 st_t2.f32 bt.f32   row-major float32, Vx plane then Vy plane
//   meta.json                    height/width/channels + the generating scene

struct LoadedPair {
    scenegen::SamplePair pair;
    scenegen::SceneSpec scene;
};

namespace detail {

inline void write_field(const std::filesystem::path& path, const vecfield::VectorField& f) {
    std::vector<float> buf;
    buf.reserve(static_cast<size_t>(2) * f.height() * f.width());
    buf.insert(buf.end(), f.vx.data(), f.vx.data() + f.vx.size());
    buf.insert(buf.end(), f.vy.data(), f.vy.data() + f.vy.size());
    write_f32(path, buf.data(), buf.size());
}

inline vecfield::VectorField read_field(const std::filesystem::path& path, int H, int W) {
    const std::vector<float> buf = read_f32(path);
    if (buf.size() != static_cast<size_t>(2) * H * W)
        throw IoError("vector field has wrong element count: " + path.string());
    vecfield::VectorField f(H, W);
    std::copy(buf.begin(), buf.begin() + int64_t(H) * W, f.vx.data());
    std::copy(buf.begin() + int64_t(H) * W, buf.end(), f.vy.data());
    return f;
}

} // namespace detail

inline void write_pair(const std::filesystem::path& dir, const scenegen::SamplePair& p,
                       const scenegen::SceneSpec& scene) {
    std::filesystem::create_directories(dir);
    write_png_rgb(dir / "img_t1.png", p.image_t1);
    write_png_rgb(dir / "img_t2.png", p.image_t2);
    write_png_gray(dir / "seg_t1.png", p.seg_t1);

    const int H = p.height(), W = p.width();
    Grid<uint8_t> seg2 = p.seg_t2;
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c)
            if (p.ignore_mask(r, c)) seg2(r, c) = labelgen::kIgnoreLabel;
    write_png_gray(dir / "seg_t2.png", seg2);

    Grid<uint8_t> change = p.change_mask;
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c)
            if (p.change_ignore(r, c)) change(r, c) = labelgen::kIgnoreLabel;
    write_png_gray(dir / "change.png", change);

    detail::write_field(dir / "st_t1.f32", p.st_t1);
    detail::write_field(dir / "st_t2.f32", p.st_t2);
    detail::write_field(dir / "bt.f32", p.bt);

    nlohmann::json meta{{"height", H}, {"width", W}, {"channels", 3}, {"scene", scene}};
    write_text(dir / "meta.json", meta.dump(2) + "\n");
}

inline LoadedPair read_pair(const std::filesystem::path& dir) {
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(read_text(dir / "meta.json"));
    } catch (const nlohmann::json::exception& e) {
        throw IoError("bad meta.json in " + dir.string() + ": " + e.what());
    }
    const int H = meta.at("height").get<int>();
    const int W = meta.at("width").get<int>();

    LoadedPair out;
    out.scene = meta.at("scene").get<scenegen::SceneSpec>();
    scenegen::SamplePair& p = out.pair;
    p.image_t1 = read_png_rgb(dir / "img_t1.png");
    p.image_t2 = read_png_rgb(dir / "img_t2.png");
    if (p.image_t1.height() != H || p.image_t1.width() != W)
        throw IoError("image size disagrees with meta.json in " + dir.string());

    p.seg_t1 = read_png_gray(dir / "seg_t1.png");
    Grid<uint8_t> seg2 = read_png_gray(dir / "seg_t2.png");
    Grid<uint8_t> change = read_png_gray(dir / "change.png");
    if (seg2.height() != H || seg2.width() != W || change.height() != H || change.width() != W ||
        p.seg_t1.height() != H || p.seg_t1.width() != W)
        throw IoError("label raster size disagrees with meta.json in " + dir.string());

    p.seg_t2 = Grid<uint8_t>(H, W);
    p.ignore_mask = Grid<uint8_t>(H, W);
    p.change_mask = Grid<uint8_t>(H, W);
    p.change_ignore = Grid<uint8_t>(H, W);
    for (int r = 0; r < H; ++r) {
        for (int c = 0; c < W; ++c) {
            const uint8_t s1 = p.seg_t1(r, c), s2 = seg2(r, c), ch = change(r, c);
            if (s1 > labelgen::kFacade)
                throw IoError("seg_t1 has invalid class value in " + dir.string());
            if (s2 == labelgen::kIgnoreLabel) {
                p.ignore_mask(r, c) = 1;
                p.seg_t2(r, c) = labelgen::kBackground;
            } else if (s2 > labelgen::kFacade) {
                throw IoError("seg_t2 has invalid class value in " + dir.string());
            } else {
                p.seg_t2(r, c) = s2;
            }
            if (ch == labelgen::kIgnoreLabel) {
                p.change_ignore(r, c) = 1;
            } else if (ch > 1) {
                throw IoError("change mask has invalid value in " + dir.string());
            } else {
                p.change_mask(r, c) = ch;
            }
        }
    }
    p.st_t1 = detail::read_field(dir / "st_t1.f32", H, W);
    p.st_t2 = detail::read_field(dir / "st_t2.f32", H, W);
    p.bt = detail::read_field(dir / "bt.f32", H, W);
    return out;
}

// Pair directories under a split, in name order.
inline std::vector<std::filesystem::path> list_pairs(const std::filesystem::path& split_dir) {
    if (!std::filesystem::is_directory(split_dir))
        throw IoError("split directory not found: " + split_dir.string());
    std::vector<std::filesystem::path> dirs;
    for (const auto& e : std::filesystem::directory_iterator(split_dir))
        if (e.is_directory() && std::filesystem::exists(e.path() / "meta.json"))
            dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());
    return dirs;
}

} // namespace mtgcd::io
