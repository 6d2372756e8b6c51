#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace mtgcd {

// 2D raster, row-major.
template <typename T>
class Grid {
  public:
    Grid() = default;
    Grid(int height, int width, T init = T(0))
        : h_(height), w_(width), cells_(static_cast<size_t>(height) * static_cast<size_t>(width), init) {}

    int height() const { return h_; }
    int width() const { return w_; }
    int64_t size() const { return static_cast<int64_t>(cells_.size()); }

    T& operator()(int r, int c) { return cells_[static_cast<size_t>(r) * w_ + c]; }
    const T& operator()(int r, int c) const { return cells_[static_cast<size_t>(r) * w_ + c]; }

    T* data() { return cells_.data(); }
    const T* data() const { return cells_.data(); }

    void fill(T v) { std::fill(cells_.begin(), cells_.end(), v); }

    bool operator==(const Grid& o) const { return h_ == o.h_ && w_ == o.w_ && cells_ == o.cells_; }
    bool operator!=(const Grid& o) const { return !(*this == o); }

  private:
    int h_ = 0;
    int w_ = 0;
    std::vector<T> cells_;
};

// Interleaved 8-bit RGB raster.
class Image {
  public:
    Image() = default;
    Image(int height, int width) : h_(height), w_(width), px_(static_cast<size_t>(height) * width * 3, 0) {}

    int height() const { return h_; }
    int width() const { return w_; }

    uint8_t& at(int r, int c, int ch) { return px_[(static_cast<size_t>(r) * w_ + c) * 3 + ch]; }
    uint8_t at(int r, int c, int ch) const { return px_[(static_cast<size_t>(r) * w_ + c) * 3 + ch]; }

    uint8_t* data() { return px_.data(); }
    const uint8_t* data() const { return px_.data(); }

    bool operator==(const Image& o) const { return h_ == o.h_ && w_ == o.w_ && px_ == o.px_; }
    bool operator!=(const Image& o) const { return !(*this == o); }

  private:
    int h_ = 0;
    int w_ = 0;
    std::vector<uint8_t> px_;
};

} // namespace mtgcd
