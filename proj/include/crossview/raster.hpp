#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "crossview/error.hpp"
#include "crossview/geometry.hpp"

namespace crossview {

/// Dense row-major raster. Row 0 is the top row.
template <typename T>
class Image {
public:
    Image() = default;
    Image(int height, int width, T fill = T{})
        : height_(height), width_(width),
          data_(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), fill) {
        if (height < 0 || width < 0) throw ValidationError("image dimensions must be non-negative");
    }

    int height() const { return height_; }
    int width() const { return width_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T& at(int p, int q) { return data_[static_cast<std::size_t>(p) * width_ + q]; }
    const T& at(int p, int q) const { return data_[static_cast<std::size_t>(p) * width_ + q]; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::vector<T>& pixels() { return data_; }
    const std::vector<T>& pixels() const { return data_; }

    template <typename U>
    bool same_shape(const Image<U>& o) const {
        return height_ == o.height() && width_ == o.width();
    }

    bool operator==(const Image& o) const {
        return height_ == o.height_ && width_ == o.width_ && data_ == o.data_;
    }

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<T> data_;
};

using RgbImage = Image<Rgb8>;
using ClassImage = Image<std::uint16_t>;
using DepthImage = Image<double>;
using MaskImage = Image<std::uint8_t>;   // 0 or 1
using IndexImage = Image<std::uint32_t>; // 1-based point indices, 0 = unassigned

}  // namespace crossview
