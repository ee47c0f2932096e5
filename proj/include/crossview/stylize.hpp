#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "crossview/raster.hpp"
#include "crossview/scene.hpp"

namespace crossview {

/// Dense per-pixel feature stack, channel-innermost.
struct FeatureMap {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<float> values;

    FeatureMap() = default;
    FeatureMap(int h, int w, int c, float fill = 0.0f)
        : height(h), width(w), channels(c),
          values(static_cast<std::size_t>(h) * w * c, fill) {}

    float& at(int p, int q, int c) {
        return values[(static_cast<std::size_t>(p) * width + q) * channels + c];
    }
    float at(int p, int q, int c) const {
        return values[(static_cast<std::size_t>(p) * width + q) * channels + c];
    }
    void validate() const;
};

/// One latent vector per pooled class. Serializes as {"class_id": [floats]}.
struct LatentSet {
    int dim = 16;
    std::map<ClassId, std::vector<double>> vectors;

    std::string to_json_text() const;
    static LatentSet from_json_text(const std::string& text);
};

/// v_c = (sum over mask pixels of F) / |mask|, accumulated in raster order.
LatentSet attentive_pool(const FeatureMap& f, const std::map<ClassId, MaskImage>& masks);

/// Deterministic per-point colors: the registry display color of the point's
/// class scaled by a brightness factor in [1-amplitude, 1+amplitude) hashed
/// from (position bits, seed). amplitude 0 disables the modulation.
std::vector<Rgb8> stylize_points(const PointCloud& cloud, const ClassRegistry& registry,
                                 std::uint64_t seed, double amplitude = 0.2);

/// Bilinear 2x upsampling, half-pixel aligned: output pixel j samples input
/// coordinate (j + 0.5)/2 - 0.5, edges clamped.
RgbImage upsample2x(const RgbImage& frame);
std::vector<RgbImage> upsample2x(const std::vector<RgbImage>& frames);

/// Nearest-neighbor 2x for label rasters. Under half-pixel alignment the
/// nearest source of output pixel j is j/2, i.e. plain pixel doubling.
ClassImage upsample2x_nearest(const ClassImage& frame);
std::vector<ClassImage> upsample2x_nearest(const std::vector<ClassImage>& frames);

}  // namespace crossview
