#include "crossview/panorama.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "crossview/error.hpp"
#include "crossview/parallel.hpp"

namespace crossview {

// ---------------------------------------------------------------------------
// PanoramaCamera

PanoramaCamera::PanoramaCamera(Vec3d position, double heading, int height, int width,
                               int column_shift)
    : position_(position), heading_(heading), height_(height), width_(width),
      column_shift_(static_cast<int>(mod_floor(column_shift, width > 0 ? width : 1))) {
    if (height_ < 2 || width_ < 2) throw ValidationError("panorama raster must be at least 2x2");
    if (!(position_.z > 0.0)) throw ValidationError("camera height must be positive");
    if (!std::isfinite(heading_)) throw ValidationError("camera heading must be finite");
}

double PanoramaCamera::effective_heading() const {
    return heading_ + kTwoPi * column_shift_ / width_;
}

Vec3d PanoramaCamera::ray_direction(int p, int q) const {
    long e = mod_floor(q + column_shift_, width_);
    double psi = kTwoPi * (e + 0.5) / width_ - kPi;
    double theta = kPi / 2.0 - kPi * (p + 0.5) / height_;
    return ray_from_angles(heading_, psi, theta);
}

PanoramaCamera::PixelHit PanoramaCamera::locate(const Vec3d& point) const {
    Vec3d v = point - position_;
    double r = v.norm();
    if (!(r > 0.0) || !std::isfinite(r)) return {};

    double azimuth = std::atan2(v.x, v.y);  // compass convention: 0 = north (+y)
    double psi = wrap_pi(azimuth - heading_);
    long e = static_cast<long>(std::floor((psi + kPi) * width_ / kTwoPi));
    e = mod_floor(e, width_);
    long q = mod_floor(e - column_shift_, width_);

    double horiz = std::sqrt(v.x * v.x + v.y * v.y);
    double theta = std::atan2(v.z, horiz);
    long p = static_cast<long>(std::floor((kPi / 2.0 - theta) * height_ / kPi));
    p = std::clamp(p, 0L, static_cast<long>(height_) - 1);  // pole rows clamp

    return {static_cast<int>(p), static_cast<int>(q), r, true};
}

PanoramaCamera PanoramaCamera::rotated_columns(int delta) const {
    return PanoramaCamera(position_, heading_, height_, width_, column_shift_ + delta);
}

PanoramaCamera PanoramaCamera::reversed() const {
    if (width_ % 2 != 0) throw ValidationError("half-turn rotation needs an even panorama width");
    return rotated_columns(width_ / 2);
}

PanoramaCamera camera_for_frame(const Trajectory& traj, std::size_t t, int height, int width) {
    if (t >= traj.size()) throw ValidationError("trajectory frame index out of range");
    const TrajectoryFrame& f = traj.frames[t];
    int shift = 0;
    if (f.half_turn) {
        if (width % 2 != 0) {
            throw ValidationError("half-turn frames need an even panorama width");
        }
        shift = width / 2;
    }
    return PanoramaCamera({f.location.x, f.location.y, traj.camera_height}, f.heading, height,
                          width, shift);
}

// ---------------------------------------------------------------------------
// DepthSemanticsMap

void DepthSemanticsMap::validate() const {
    if (!depth.same_shape(semantics) || !depth.same_shape(sky)) {
        throw ValidationError("depth/semantics/sky rasters must share a shape");
    }
    if (depth.empty()) throw ValidationError("depth map is empty");
    if (!(sky_range > 0.0)) throw ValidationError("sky range must be positive");
    for (int p = 0; p < depth.height(); ++p) {
        for (int q = 0; q < depth.width(); ++q) {
            double d = depth.at(p, q);
            if (sky.at(p, q)) {
                if (d != sky_range) {
                    throw ValidationError("sky pixel (" + std::to_string(p) + "," +
                                          std::to_string(q) + ") must carry exactly the sky range");
                }
            } else if (!(d > 0.0) || d >= sky_range) {
                throw ValidationError("non-sky depth at (" + std::to_string(p) + "," +
                                      std::to_string(q) + ") must lie in (0, sky_range)");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Z-buffer

namespace {

struct RayHit {
    double t = 0.0;
    ClassId cls = VoxelGrid::kEmpty;
    bool hit = false;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

inline double axis_of(const Vec3d& v, int a) { return a == 0 ? v.x : (a == 1 ? v.y : v.z); }

// Marches one ray through the grid. Crossing distances are recomputed from
// integer plane indices each step (never accumulated), so the entry-face
// distance of the hit voxel is the same expression an AABB slab test
// evaluates.
RayHit march_ray(const VoxelGrid& grid, const Vec3d& pos, const Vec3d& dir, double sky_radius) {
    const int n[3] = {grid.nx(), grid.ny(), grid.nz()};
    const double o[3] = {grid.origin().x, grid.origin().y, grid.origin().z};
    const double s[3] = {grid.size(0), grid.size(1), grid.size(2)};
    const double d[3] = {dir.x, dir.y, dir.z};
    const double c[3] = {pos.x, pos.y, pos.z};

    // Clip to the grid box when starting outside it.
    double t_start = 0.0;
    bool outside = false;
    for (int a = 0; a < 3; ++a) {
        if (c[a] < o[a] || c[a] > o[a] + n[a] * s[a]) outside = true;
    }
    if (outside) {
        double t_enter = 0.0, t_exit = kInf;
        for (int a = 0; a < 3; ++a) {
            double lo = o[a], hi = o[a] + n[a] * s[a];
            if (d[a] == 0.0) {
                if (c[a] < lo || c[a] > hi) return {};
                continue;
            }
            double t0 = (lo - c[a]) / d[a];
            double t1 = (hi - c[a]) / d[a];
            if (t0 > t1) std::swap(t0, t1);
            t_enter = std::max(t_enter, t0);
            t_exit = std::min(t_exit, t1);
        }
        if (t_enter > t_exit || t_enter >= sky_radius) return {};
        t_start = t_enter;
    }

    int i[3];
    for (int a = 0; a < 3; ++a) {
        double at = c[a] + t_start * d[a];
        long idx = static_cast<long>(std::floor((at - o[a]) / s[a]));
        i[a] = static_cast<int>(std::clamp(idx, 0L, static_cast<long>(n[a]) - 1));
    }
    if (outside && grid.occupied(i[0], i[1], i[2])) {
        // Entered the box straight into an occupied voxel: the box face is
        // the entry face.
        return {t_start, grid.at(i[0], i[1], i[2]), true};
    }

    int step[3];
    long plane[3];
    double t_max[3];
    for (int a = 0; a < 3; ++a) {
        step[a] = d[a] > 0.0 ? 1 : (d[a] < 0.0 ? -1 : 0);
        plane[a] = i[a] + (d[a] > 0.0 ? 1 : 0);
        t_max[a] = step[a] != 0 ? (o[a] + plane[a] * s[a] - c[a]) / d[a] : kInf;
    }

    for (;;) {
        int axis = 0;
        if (t_max[1] < t_max[axis]) axis = 1;
        if (t_max[2] < t_max[axis]) axis = 2;
        double t = t_max[axis];
        if (t >= sky_radius) return {};
        i[axis] += step[axis];
        if (i[axis] < 0 || i[axis] >= n[axis]) return {};
        if (grid.occupied(i[0], i[1], i[2])) {
            return {t, grid.at(i[0], i[1], i[2]), true};
        }
        plane[axis] += step[axis];
        t_max[axis] = (o[axis] + plane[axis] * s[axis] - c[axis]) / d[axis];
    }
}

}  // namespace

DepthSemanticsMap zbuffer(const VoxelGrid& grid, const PanoramaCamera& camera, double sky_radius,
                          ClassId sky_class, int threads) {
    if (!(sky_radius > 0.0)) throw ValidationError("sky radius must be positive");
    const Vec3d& pos = camera.position();
    if (pos.x < grid.origin().x || pos.x > grid.origin().x + grid.nx() * grid.horizontal_size() ||
        pos.y < grid.origin().y || pos.y > grid.origin().y + grid.ny() * grid.horizontal_size()) {
        throw ValidationError("camera lies outside the grid bounds horizontally");
    }
    // Degenerate viewpoint: camera inside an occupied voxel.
    if (pos.z >= grid.origin().z && pos.z <= grid.origin().z + grid.nz() * grid.vertical_size()) {
        int ix = static_cast<int>(std::clamp(
            static_cast<long>(std::floor((pos.x - grid.origin().x) / grid.horizontal_size())), 0L,
            static_cast<long>(grid.nx()) - 1));
        int iy = static_cast<int>(std::clamp(
            static_cast<long>(std::floor((pos.y - grid.origin().y) / grid.horizontal_size())), 0L,
            static_cast<long>(grid.ny()) - 1));
        int iz = static_cast<int>(std::clamp(
            static_cast<long>(std::floor((pos.z - grid.origin().z) / grid.vertical_size())), 0L,
            static_cast<long>(grid.nz()) - 1));
        if (grid.occupied(ix, iy, iz)) {
            throw ValidationError("camera sits inside an occupied voxel (degenerate viewpoint)");
        }
    }

    int H = camera.height(), W = camera.width();
    DepthSemanticsMap out;
    out.depth = DepthImage(H, W, sky_radius);
    out.semantics = ClassImage(H, W, sky_class);
    out.sky = MaskImage(H, W, 1);
    out.sky_range = sky_radius;

    parallel_chunks(static_cast<std::size_t>(H) * W, threads,
                    [&](std::size_t begin, std::size_t end, int) {
                        for (std::size_t idx = begin; idx < end; ++idx) {
                            int p = static_cast<int>(idx / W);
                            int q = static_cast<int>(idx % W);
                            RayHit hit = march_ray(grid, pos, camera.ray_direction(p, q), sky_radius);
                            if (hit.hit) {
                                out.depth.at(p, q) = hit.t;
                                out.semantics.at(p, q) = hit.cls;
                                out.sky.at(p, q) = 0;
                            }
                        }
                    });
    return out;
}

// ---------------------------------------------------------------------------
// Project / unproject

IndexImage project(const PointCloud& cloud, const PanoramaCamera& camera,
                   const DepthSemanticsMap& depth, double epsilon, int threads) {
    if (!(epsilon > 0.0)) throw ValidationError("projection epsilon must be positive");
    if (depth.height() != camera.height() || depth.width() != camera.width()) {
        throw ValidationError("depth map shape does not match the camera raster");
    }

    int H = camera.height(), W = camera.width();
    std::size_t cells = static_cast<std::size_t>(H) * W;
    std::size_t n = cloud.size();

    // Best candidate per pixel, per worker slot: lexicographic min over
    // (range, index). The merge is associative and commutative, so the
    // result does not depend on how points are chunked across threads.
    struct Best {
        double r = kInf;
        std::uint32_t idx = 0;
    };
    int slots = resolve_threads(threads);
    std::vector<std::vector<Best>> local(static_cast<std::size_t>(slots),
                                         std::vector<Best>(cells));

    parallel_chunks(n, threads, [&](std::size_t begin, std::size_t end, int slot) {
        std::vector<Best>& best = local[slot];
        for (std::size_t i = begin; i < end; ++i) {
            PanoramaCamera::PixelHit hit = camera.locate(cloud.positions[i]);
            if (!hit.valid) continue;
            double d = depth.depth.at(hit.p, hit.q);
            if (hit.range < d * (1.0 - epsilon) || hit.range > d * (1.0 + epsilon)) continue;
            Best& b = best[static_cast<std::size_t>(hit.p) * W + hit.q];
            std::uint32_t idx = static_cast<std::uint32_t>(i) + 1;
            if (hit.range < b.r || (hit.range == b.r && (b.idx == 0 || idx < b.idx))) {
                b.r = hit.range;
                b.idx = idx;
            }
        }
    });

    IndexImage m(H, W, 0u);
    for (std::size_t cell = 0; cell < cells; ++cell) {
        Best merged;
        for (int s = 0; s < slots; ++s) {
            const Best& b = local[s][cell];
            if (b.idx == 0) continue;
            if (b.r < merged.r || (b.r == merged.r && (merged.idx == 0 || b.idx < merged.idx))) {
                merged = b;
            }
        }
        m.data()[cell] = merged.idx;
    }
    return m;
}

Unprojection unproject(const PanoramaCamera& camera, const DepthSemanticsMap& depth,
                       const IndexImage& m, std::uint64_t offset) {
    if (depth.height() != camera.height() || depth.width() != camera.width() ||
        !m.same_shape(depth.depth)) {
        throw ValidationError("unproject raster shapes do not match");
    }
    int H = camera.height(), W = camera.width();

    Unprojection out;
    out.map = IndexImage(H, W, 0u);
    std::size_t missing = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m.data()[i] == 0) ++missing;
    }
    if (offset + missing > std::numeric_limits<std::uint32_t>::max()) {
        throw ValidationError("point index space exhausted (u32 map entries)");
    }
    out.points.positions.reserve(missing);
    out.points.sky.reserve(missing);

    std::uint64_t next = offset;
    for (int p = 0; p < H; ++p) {
        for (int q = 0; q < W; ++q) {
            if (m.at(p, q) != 0) continue;
            Vec3d pos = camera.position() + depth.depth.at(p, q) * camera.ray_direction(p, q);
            out.points.positions.push_back(pos);
            out.points.sky.push_back(depth.sky.at(p, q));
            out.map.at(p, q) = static_cast<std::uint32_t>(++next);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Satellite warp

WarpedFrames warp_satellite(const RgbImage& satellite, const SemanticHeightField& field,
                            const PointCloud& cloud, const PointPixelMap& map) {
    if (satellite.height() != field.height() || satellite.width() != field.width()) {
        throw ValidationError("satellite raster does not match the height-field footprint");
    }
    map.validate_complete(cloud.size());

    std::vector<Rgb8> color(cloud.size());
    std::vector<std::uint8_t> valid(cloud.size(), 0);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (cloud.sky[i]) continue;
        auto cell = field.cell_at(cloud.positions[i].x, cloud.positions[i].y);
        if (!cell) continue;  // stray boundary point: leave invalid
        color[i] = satellite.at(cell->first, cell->second);
        valid[i] = 1;
    }

    WarpedFrames out;
    out.frames.reserve(map.frames);
    out.validity.reserve(map.frames);
    for (std::uint32_t t = 0; t < map.frames; ++t) {
        RgbImage frame(map.height, map.width);
        MaskImage mask(map.height, map.width, 0);
        for (std::uint32_t p = 0; p < map.height; ++p) {
            for (std::uint32_t q = 0; q < map.width; ++q) {
                std::uint32_t idx = map.at(t, p, q);
                frame.at(p, q) = color[idx - 1];
                mask.at(p, q) = valid[idx - 1];
            }
        }
        out.frames.push_back(std::move(frame));
        out.validity.push_back(std::move(mask));
    }
    return out;
}

}  // namespace crossview
