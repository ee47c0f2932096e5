#include "crossview/extraction.hpp"

#include <string>
#include <utility>

namespace crossview {

std::vector<std::size_t> frame_order(std::size_t frames, std::size_t center) {
    if (center >= frames) throw ValidationError("center frame index out of range");
    std::vector<std::size_t> order;
    order.reserve(frames);
    order.push_back(center);
    for (std::size_t k = 1; order.size() < frames; ++k) {
        if (center + k < frames) order.push_back(center + k);
        if (center >= k) order.push_back(center - k);
    }
    return order;
}

ExtractionResult extract_frames(const Trajectory& traj, int height, int width, double epsilon,
                                const DepthSource& source, int threads) {
    traj.validate();
    std::size_t frames = traj.size();

    ExtractionResult result;
    result.map = PointPixelMap(static_cast<std::uint32_t>(frames), static_cast<std::uint32_t>(height),
                               static_cast<std::uint32_t>(width));
    result.stats.resize(frames);
    result.processing_order = frame_order(frames, traj.center_index);

    std::size_t pixels = static_cast<std::size_t>(height) * width;

    for (std::size_t t : result.processing_order) {
        PanoramaCamera camera = camera_for_frame(traj, t, height, width);

        DepthSemanticsMap d;
        try {
            d = source(t, camera, result.cloud);
        } catch (const Error& e) {
            throw ValidationError("frame " + std::to_string(t) + ": " + e.what());
        }

        IndexImage m = project(result.cloud, camera, d, epsilon, threads);
        Unprojection added = unproject(camera, d, m, result.cloud.size());

        std::size_t matched = 0;
        for (std::size_t i = 0; i < pixels; ++i) {
            std::uint32_t mv = m.data()[i];
            std::uint32_t av = added.map.data()[i];
            if (mv != 0 && av != 0) {
                throw Error("extraction invariant violated at frame " + std::to_string(t) +
                            ": m and m_a overlap");
            }
            if (mv != 0) ++matched;
            result.map.indices[t * pixels + i] = mv + av;
        }

        result.stats[t].points_before = result.cloud.size();
        result.stats[t].new_points = added.points.size();
        result.stats[t].reuse_ratio = static_cast<double>(matched) / static_cast<double>(pixels);

        result.cloud.positions.insert(result.cloud.positions.end(), added.points.positions.begin(),
                                      added.points.positions.end());
        result.cloud.sky.insert(result.cloud.sky.end(), added.points.sky.begin(),
                                added.points.sky.end());
    }

    result.map.validate_complete(result.cloud.size());
    return result;
}

ExtractionResult extract(const VoxelGrid& grid, const SemanticHeightField& field,
                         ClassId sky_class, const Trajectory& traj, int height, int width,
                         double epsilon, double sky_radius, int threads) {
    ExtractionResult result = extract_frames(
        traj, height, width, epsilon,
        [&](std::size_t, const PanoramaCamera& camera, const PointCloud&) {
            return zbuffer(grid, camera, sky_radius, sky_class, threads);
        },
        threads);
    result.cloud.semantics = gather_point_semantics(result.cloud, field, sky_class);
    result.cloud.validate();
    return result;
}

std::vector<DepthImage> render_ranges(const ExtractionResult& result, const Trajectory& traj) {
    const PointPixelMap& map = result.map;
    if (traj.size() != map.frames) {
        throw ValidationError("trajectory frame count does not match the map");
    }
    map.validate_complete(result.cloud.size());
    std::vector<DepthImage> frames;
    frames.reserve(map.frames);
    for (std::uint32_t t = 0; t < map.frames; ++t) {
        Vec3d cam{traj.frames[t].location.x, traj.frames[t].location.y, traj.camera_height};
        DepthImage frame(static_cast<int>(map.height), static_cast<int>(map.width));
        for (std::uint32_t p = 0; p < map.height; ++p) {
            for (std::uint32_t q = 0; q < map.width; ++q) {
                const Vec3d& pt = result.cloud.positions[map.at(t, p, q) - 1];
                frame.at(p, q) = (pt - cam).norm();
            }
        }
        frames.push_back(std::move(frame));
    }
    return frames;
}

}  // namespace crossview
