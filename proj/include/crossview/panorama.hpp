#pragma once

#include <cstdint>
#include <vector>

#include "crossview/geometry.hpp"
#include "crossview/raster.hpp"
#include "crossview/scene.hpp"
#include "crossview/voxelizer.hpp"

namespace crossview {

/// Equirectangular camera. Pixel centers sit at half-integer offsets; column
/// q maps to azimuth psi = 2*pi*(q+0.5)/W - pi clockwise from the heading,
/// row p to elevation theta = pi/2 - pi*(p+0.5)/H.
///
/// The camera carries an integer column shift on top of its base heading.
/// Rotating by whole columns (in particular the half turn used by u-turn
/// trajectories) only remaps column indices, so the rotated camera's rays are
/// bit-identical to the original's, just circularly shifted. Free-form
/// heading arithmetic cannot give that guarantee under IEEE rounding.
class PanoramaCamera {
public:
    PanoramaCamera(Vec3d position, double heading, int height, int width, int column_shift = 0);

    const Vec3d& position() const { return position_; }
    double base_heading() const { return heading_; }
    /// Heading actually faced, for display: base heading + 2*pi*shift/W.
    double effective_heading() const;
    int height() const { return height_; }
    int width() const { return width_; }
    int column_shift() const { return column_shift_; }

    /// Ray direction through the center of pixel (p, q). Unit up to rounding.
    Vec3d ray_direction(int p, int q) const;

    struct PixelHit {
        int p = 0;
        int q = 0;
        double range = 0.0;
        bool valid = false;
    };
    /// Nearest pixel center containing the direction toward a world point,
    /// plus the ray length. Pole rows clamp; a point at the camera position
    /// is invalid.
    PixelHit locate(const Vec3d& point) const;

    PanoramaCamera rotated_columns(int delta) const;
    /// Half-turn rotation (width/2 columns). Requires an even width.
    PanoramaCamera reversed() const;

private:
    Vec3d position_;
    double heading_;
    int height_;
    int width_;
    int column_shift_;
};

PanoramaCamera camera_for_frame(const Trajectory& traj, std::size_t t, int height, int width);

/// Panoramic depth + semantics raster from a z-buffer pass. Sky pixels carry
/// exactly depth == sky_range and the sky class; all other depths are
/// positive and strictly below sky_range.
struct DepthSemanticsMap {
    DepthImage depth;
    ClassImage semantics;
    MaskImage sky;
    double sky_range = 0.0;

    int height() const { return depth.height(); }
    int width() const { return depth.width(); }
    void validate() const;
};

/// Marches every pixel ray through the occupancy grid (amortized boundary
/// traversal) and records the distance to the entry face of the first
/// occupied voxel. Rays that exit the grid or reach sky_radius give
/// (sky_radius, sky).
DepthSemanticsMap zbuffer(const VoxelGrid& grid, const PanoramaCamera& camera, double sky_radius,
                          ClassId sky_class, int threads = 0);

/// Maps existing points onto pixels. A point is a candidate for its nearest
/// pixel center iff its ray length r lies in [d*(1-eps), d*(1+eps)] for that
/// pixel's depth d; the winner has the smallest r, ties broken by smallest
/// point index. Entries are 1-based; 0 means no candidate.
IndexImage project(const PointCloud& cloud, const PanoramaCamera& camera,
                   const DepthSemanticsMap& depth, double epsilon, int threads = 0);

struct Unprojection {
    PointCloud points;   // appended in row-major pixel order
    IndexImage map;      // offset+1, offset+2, ... on previously-unmapped pixels
};

/// Creates one point per unmapped pixel (m == 0) at depth along the pixel
/// ray, flagged sky when the pixel is sky. Mapped pixels get map == 0, so
/// m (.) map == 0 holds elementwise.
Unprojection unproject(const PanoramaCamera& camera, const DepthSemanticsMap& depth,
                       const IndexImage& m, std::uint64_t offset);

struct WarpedFrames {
    std::vector<RgbImage> frames;
    std::vector<MaskImage> validity;
};

/// Samples satellite RGB under each point's (x, y) by nearest cell and
/// renders the per-point colors through the point-pixel map. Sky points are
/// invalid in the mask.
WarpedFrames warp_satellite(const RgbImage& satellite, const SemanticHeightField& field,
                            const PointCloud& cloud, const PointPixelMap& map);

}  // namespace crossview
