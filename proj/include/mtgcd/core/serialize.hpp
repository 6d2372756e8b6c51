#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "mtgcd/core/errors.hpp"

namespace mtgcd::io {

static_assert(sizeof(float) == 4, "float must be 32-bit");

inline void byteswap_f32(std::vector<float>& v) {
    for (float& f : v) {
        uint32_t u;
        std::memcpy(&u, &f, 4);
        u = ((u & 0xff000000u) >> 24) | ((u & 0x00ff0000u) >> 8) | ((u & 0x0000ff00u) << 8) | (u << 24);
        std::memcpy(&f, &u, 4);
    }
}

// Raw little-endian float32 blob.
inline void write_f32(const std::filesystem::path& path, const float* data, size_t count) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for write: " + path.string());
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * 4));
    } else {
        std::vector<float> tmp(data, data + count);
        byteswap_f32(tmp);
        out.write(reinterpret_cast<const char*>(tmp.data()), static_cast<std::streamsize>(count * 4));
    }
    if (!out) throw IoError("write failed: " + path.string());
}

inline std::vector<float> read_f32(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw IoError("cannot open: " + path.string());
    const std::streamsize bytes = in.tellg();
    if (bytes % 4 != 0) throw IoError("float32 blob has odd size: " + path.string());
    in.seekg(0);
    std::vector<float> v(static_cast<size_t>(bytes / 4));
    in.read(reinterpret_cast<char*>(v.data()), bytes);
    if (!in) throw IoError("read failed: " + path.string());
    if constexpr (std::endian::native != std::endian::little) byteswap_f32(v);
    return v;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for write: " + path.string());
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return s;
}

} // namespace mtgcd::io
