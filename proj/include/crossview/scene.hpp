#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crossview/geometry.hpp"
#include "crossview/raster.hpp"

namespace crossview {

using ClassId = std::uint16_t;

/// Ordered semantic class table. Ids are dense and start at 0; "sky" is
/// mandatory and is never assigned by a height field (it only arises from
/// rays that miss geometry).
class ClassRegistry {
public:
    struct Entry {
        ClassId id;
        std::string name;
        Rgb8 color;
    };

    static ClassRegistry builtin();
    static ClassRegistry from_json_file(const std::string& path);
    static ClassRegistry from_json_text(const std::string& text);

    explicit ClassRegistry(std::vector<Entry> entries);

    std::size_t size() const { return entries_.size(); }
    const Entry& entry(ClassId id) const;
    bool has(ClassId id) const { return id < entries_.size(); }
    std::optional<ClassId> find(const std::string& name) const;
    ClassId sky_id() const { return sky_id_; }
    const std::vector<Entry>& entries() const { return entries_; }

    std::string to_json_text() const;
    std::vector<Rgb8> palette() const;

private:
    std::vector<Entry> entries_;
    ClassId sky_id_ = 0;
};

/// 2.5D satellite product: per-cell ground elevation plus a semantic class.
/// Row 0 is the northernmost row; world x is east, y is north, z is up.
class SemanticHeightField {
public:
    SemanticHeightField(Image<float> elevation, ClassImage semantics, double cell_size,
                        Vec2d origin, const ClassRegistry& registry);

    int width() const { return elevation_.width(); }
    int height() const { return elevation_.height(); }
    double cell_size() const { return cell_size_; }
    /// World (x, y) of the center of cell (row 0, col 0).
    Vec2d origin() const { return origin_; }

    float elevation(int row, int col) const { return elevation_.at(row, col); }
    ClassId semantic(int row, int col) const { return semantics_.at(row, col); }
    const Image<float>& elevation_raster() const { return elevation_; }
    const ClassImage& semantics_raster() const { return semantics_; }

    double max_elevation() const { return max_elevation_; }

    /// Cell under a world (x, y), or nullopt when outside the footprint.
    std::optional<std::pair<int, int>> cell_at(double x, double y) const;

    // Footprint extents (cell squares, not cell centers).
    double min_x() const { return origin_.x - cell_size_ / 2.0; }
    double max_x() const { return origin_.x + (width() - 0.5) * cell_size_; }
    double min_y() const { return origin_.y - (height() - 0.5) * cell_size_; }
    double max_y() const { return origin_.y + cell_size_ / 2.0; }
    Vec2d footprint_center() const { return {(min_x() + max_x()) / 2.0, (min_y() + max_y()) / 2.0}; }

private:
    Image<float> elevation_;
    ClassImage semantics_;
    double cell_size_;
    Vec2d origin_;
    double max_elevation_ = 0.0;
};

/// Ordered camera path. Headings are compass yaws in radians (0 = north =
/// +y, pi/2 = east = +x). `half_turn` marks frames whose camera is the
/// outbound camera rotated by exactly half a panorama width; rendering uses
/// the integer column shift so opposite-direction frames at the same
/// location produce bit-identical columns.
struct TrajectoryFrame {
    Vec2d location;
    double heading = 0.0;
    bool half_turn = false;
};

struct Trajectory {
    std::vector<TrajectoryFrame> frames;
    double camera_height = 3.0;
    std::size_t center_index = 0;

    std::size_t size() const { return frames.size(); }

    /// Heading actually faced by frame t (base heading plus pi when reversed).
    double effective_heading(std::size_t t) const;

    void validate() const;
};

Trajectory make_linear_trajectory(Vec2d center, double heading, double step_m, int frames,
                                  double camera_height);
/// Out-and-back path: frames/2 outbound locations, then the same locations
/// reversed with half-turned cameras. frames must be even.
Trajectory make_uturn_trajectory(Vec2d center, double heading, double step_m, int frames,
                                 double camera_height);

/// Append-only visible-point set. Indices are identities; optional channels
/// have exactly one entry per point when present.
struct PointCloud {
    std::vector<Vec3d> positions;
    std::vector<std::uint8_t> sky;      // 1 = unprojected at the sky radius
    std::vector<ClassId> semantics;     // optional
    std::vector<Rgb8> rgb;              // optional
    std::vector<double> features;       // optional, row-major size() x feature_dim
    int feature_dim = 0;

    std::size_t size() const { return positions.size(); }
    bool has_semantics() const { return !semantics.empty(); }
    bool has_rgb() const { return !rgb.empty(); }
    bool has_features() const { return feature_dim > 0; }

    void validate() const;
};

/// Dense T x H x W tensor of 1-based point indices; 0 means unassigned and is
/// legal only mid-construction.
struct PointPixelMap {
    std::uint32_t frames = 0;
    std::uint32_t height = 0;
    std::uint32_t width = 0;
    std::vector<std::uint32_t> indices;

    PointPixelMap() = default;
    PointPixelMap(std::uint32_t t, std::uint32_t h, std::uint32_t w)
        : frames(t), height(h), width(w),
          indices(static_cast<std::size_t>(t) * h * w, 0u) {}

    std::uint32_t& at(std::uint32_t t, std::uint32_t p, std::uint32_t q) {
        return indices[(static_cast<std::size_t>(t) * height + p) * width + q];
    }
    std::uint32_t at(std::uint32_t t, std::uint32_t p, std::uint32_t q) const {
        return indices[(static_cast<std::size_t>(t) * height + p) * width + q];
    }

    /// Checks that every entry lies in [1, point_count].
    void validate_complete(std::size_t point_count) const;
};

/// Fixed world and panorama conventions used across the library. See
/// docs/conventions.md for the narrative version.
struct WorldConventions {
    int version;
    const char* world_axes;      // x = east, y = north, z = up
    const char* heightfield_rows;
    const char* heading_zero;    // heading 0 faces +y (north), clockwise positive
    const char* azimuth;         // psi(q) = 2*pi*(q+0.5)/W - pi, clockwise from heading
    const char* elevation;       // theta(p) = pi/2 - pi*(p+0.5)/H
    const char* camera_center;   // optical center at (x, y, camera_height)
};

WorldConventions world_conventions();

/// Unit ray direction for relative azimuth psi (clockwise from heading) and
/// elevation theta, for a camera with the given compass heading.
Vec3d ray_from_angles(double heading, double psi, double theta);

}  // namespace crossview
