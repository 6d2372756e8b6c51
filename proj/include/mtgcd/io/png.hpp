#pragma once

#include <png.h>

#include <cstring>
#include <filesystem>
#include <string>

#include "mtgcd/core/errors.hpp"
#include "mtgcd/core/grid.hpp"

namespace mtgcd::io {

namespace detail {
[[noreturn]] inline void png_fail(const char* what, const std::filesystem::path& path,
                                  const png_image& im) {
    throw IoError(std::string(what) + " " + path.string() + ": " + im.message);
}
} // namespace detail

inline void write_png_gray(const std::filesystem::path& path, const Grid<uint8_t>& g) {
    png_image im;
    std::memset(&im, 0, sizeof(im));
    im.version = PNG_IMAGE_VERSION;
    im.width = static_cast<png_uint_32>(g.width());
    im.height = static_cast<png_uint_32>(g.height());
    im.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&im, path.string().c_str(), 0, g.data(), 0, nullptr))
        detail::png_fail("cannot write", path, im);
}

inline Grid<uint8_t> read_png_gray(const std::filesystem::path& path) {
    png_image im;
    std::memset(&im, 0, sizeof(im));
    im.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&im, path.string().c_str()))
        detail::png_fail("cannot read", path, im);
    im.format = PNG_FORMAT_GRAY;
    Grid<uint8_t> g(static_cast<int>(im.height), static_cast<int>(im.width));
    if (!png_image_finish_read(&im, nullptr, g.data(), 0, nullptr))
        detail::png_fail("cannot decode", path, im);
    return g;
}

inline void write_png_rgb(const std::filesystem::path& path, const Image& img) {
    png_image im;
    std::memset(&im, 0, sizeof(im));
    im.version = PNG_IMAGE_VERSION;
    im.width = static_cast<png_uint_32>(img.width());
    im.height = static_cast<png_uint_32>(img.height());
    im.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&im, path.string().c_str(), 0, img.data(), 0, nullptr))
        detail::png_fail("cannot write", path, im);
}

inline Image read_png_rgb(const std::filesystem::path& path) {
    png_image im;
    std::memset(&im, 0, sizeof(im));
    im.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&im, path.string().c_str()))
        detail::png_fail("cannot read", path, im);
    im.format = PNG_FORMAT_RGB;
    Image img(static_cast<int>(im.height), static_cast<int>(im.width));
    if (!png_image_finish_read(&im, nullptr, img.data(), 0, nullptr))
        detail::png_fail("cannot decode", path, im);
    return img;
}

} // namespace mtgcd::io
