#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "crossview/error.hpp"
#include "crossview/panorama.hpp"
#include "crossview/raster.hpp"
#include "crossview/scene.hpp"
#include "crossview/voxelizer.hpp"

namespace crossview {

/// Visible-point extraction output: the accumulated cloud, the dense
/// frame-pixel-to-point map, and enough per-frame bookkeeping to audit the
/// incremental behavior (stats are indexed by trajectory frame, processing
/// order is recorded separately).
struct ExtractionResult {
    struct FrameStats {
        std::size_t points_before = 0;  // cloud size when the frame was processed
        std::size_t new_points = 0;
        double reuse_ratio = 0.0;       // fraction of pixels matched to existing points
    };

    PointCloud cloud;
    PointPixelMap map;
    std::vector<FrameStats> stats;
    std::vector<std::size_t> processing_order;
};

/// Center-out frame ordering c, c+1, c-1, c+2, c-2, ...; when one side runs
/// out the remainder continues on the other side.
std::vector<std::size_t> frame_order(std::size_t frames, std::size_t center);

/// Depth backend for one frame of the extraction loop: receives the frame
/// index, its camera, and the cloud accumulated so far (frames earlier in
/// processing order), and returns the frame's depth/sky rasters.
using DepthSource =
    std::function<DepthSemanticsMap(std::size_t, const PanoramaCamera&, const PointCloud&)>;

/// The frame loop alone: z-buffer source -> project -> unproject -> merge,
/// with the m (.) m_a = 0 invariant checked every frame. The returned cloud
/// has positions and sky flags but no semantics; callers attach those.
ExtractionResult extract_frames(const Trajectory& traj, int height, int width, double epsilon,
                                const DepthSource& source, int threads = 0);

/// Runs the per-frame loop (z-buffer, project against the accumulated cloud,
/// unproject the unmatched pixels, merge) over the trajectory, then gathers
/// point semantics from the height field. The m (.) m_a = 0 invariant is
/// checked on every frame.
ExtractionResult extract(const VoxelGrid& grid, const SemanticHeightField& field,
                         ClassId sky_class, const Trajectory& traj, int height, int width,
                         double epsilon, double sky_radius, int threads = 0);

/// Pure gather: frame t pixel (p,q) takes channel[map(t,p,q) - 1].
template <typename T>
std::vector<Image<T>> render_channel(const PointPixelMap& map, const std::vector<T>& channel) {
    map.validate_complete(channel.size());
    std::vector<Image<T>> frames;
    frames.reserve(map.frames);
    for (std::uint32_t t = 0; t < map.frames; ++t) {
        Image<T> frame(static_cast<int>(map.height), static_cast<int>(map.width));
        for (std::uint32_t p = 0; p < map.height; ++p)
            for (std::uint32_t q = 0; q < map.width; ++q)
                frame.at(p, q) = channel[map.at(t, p, q) - 1];
        frames.push_back(std::move(frame));
    }
    return frames;
}

template <typename T>
std::vector<Image<T>> render_channel(const ExtractionResult& result,
                                     const std::vector<T>& channel) {
    if (channel.size() != result.cloud.size()) {
        throw ValidationError("channel length does not match the point count");
    }
    return render_channel(result.map, channel);
}

/// Per-frame ray lengths of the mapped points (each pixel's distance from
/// that frame's camera to its point). Not a gather: ranges are per
/// (frame, point) pairs.
std::vector<DepthImage> render_ranges(const ExtractionResult& result, const Trajectory& traj);

}  // namespace crossview
