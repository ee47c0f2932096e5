#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crossview/error.hpp"
#include "crossview/geometry.hpp"

namespace crossview {

/// The one configuration document every command consumes. Defaults are the
/// published pipeline constants; a JSON file overrides defaults and
/// `key.path=value` strings override the file.
struct PipelineConfig {
    struct Scene {
        std::string height_path;      // grayscale PFM, meters
        std::string semantics_path;   // palette PNG of class ids
        std::string registry_path;    // optional registry JSON; empty = builtin
        std::string satellite_path;   // optional RGB PNG for satellite warping
        double cell_size = 0.25;      // meters per height-field cell
        Vec2d origin{0.0, 0.0};       // world (x, y) of cell (0, 0) center

        bool operator==(const Scene&) const = default;
    };

    struct Trajectory {
        double range_m = 7.0;   // total path length, center frame in the middle
        double step_m = 0.5;
        int frames = 15;
        bool uturn = false;     // out-and-back instead of a straight line
        double heading = 0.0;   // compass yaw, radians
        bool has_center = false;
        Vec2d center{0.0, 0.0}; // defaults to the footprint center when unset

        bool operator==(const Trajectory&) const = default;
    };

    struct Render {
        int height = 256;
        int width = 512;
        double epsilon = 0.005;
        double sky_radius = 200.0;
        double camera_height = 3.0;

        bool operator==(const Render&) const = default;
    };

    struct Voxel {
        double horizontal = 0.25;     // occupancy grid, x/y
        double vertical = 0.25;       // occupancy grid, z
        double max_height = 30.0;
        double feature_size = 0.03125;

        bool operator==(const Voxel&) const = default;
    };

    Scene scene;
    Trajectory trajectory;
    Render render;
    Voxel voxel;
    int knn_k = 32;
    std::uint64_t seed = 0;

    bool operator==(const PipelineConfig&) const = default;

    static PipelineConfig from_json_text(const std::string& text);
    static PipelineConfig from_json_file(const std::string& path);
    std::string to_json_text() const;

    /// Range/step/frames consistency (frames = range/step + 1 for straight
    /// paths, even frame count for u-turns) plus basic positivity checks.
    void validate() const;
};

/// defaults -> optional file -> `--set` overrides, then validate. Paths in
/// overrides use dots ("trajectory.frames=60").
PipelineConfig resolve_config(const std::string& config_path,
                              const std::vector<std::string>& overrides);

}  // namespace crossview
