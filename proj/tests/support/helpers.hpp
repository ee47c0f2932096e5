#pragma once

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "crossview/geometry.hpp"
#include "crossview/panorama.hpp"
#include "crossview/scene.hpp"
#include "crossview/voxelizer.hpp"

namespace crossview::testing {

// A height field padded one cell beyond the given grid box so boundary hits
// always land inside the footprint.
inline SemanticHeightField field_covering(double min_x, double min_y, double extent_x,
                                          double extent_y, double cell_size,
                                          const ClassRegistry& registry, ClassId fill = 0) {
    int cols = static_cast<int>(std::ceil(extent_x / cell_size)) + 2;
    int rows = static_cast<int>(std::ceil(extent_y / cell_size)) + 2;
    Image<float> elev(rows, cols, 0.0f);
    ClassImage sem(rows, cols, fill);
    // Origin is the center of the northwest cell; pad one cell outward.
    Vec2d origin{min_x - cell_size / 2.0, min_y + (rows - 1.5) * cell_size};
    return SemanticHeightField(std::move(elev), std::move(sem), cell_size, origin, registry);
}

/// Random occupancy grid with classes drawn from [0, class_count), roughly
/// `fill` of voxels occupied.
inline VoxelGrid random_grid(std::mt19937_64& rng, int n, double voxel, double fill,
                             int class_count, Vec3d origin = {0.0, 0.0, 0.0}) {
    VoxelGrid grid(n, n, n, voxel, voxel, origin);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_int_distribution<int> cls(0, class_count - 1);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            for (int z = 0; z < n; ++z)
                if (coin(rng) < fill) grid.set(x, y, z, static_cast<ClassId>(cls(rng)));
    return grid;
}

/// Camera position inside the grid box, in a free voxel, above z = 0.
inline Vec3d free_camera_position(std::mt19937_64& rng, const VoxelGrid& grid) {
    std::uniform_real_distribution<double> ux(0.05, 0.95);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        Vec3d pos{grid.origin().x + ux(rng) * grid.nx() * grid.horizontal_size(),
                  grid.origin().y + ux(rng) * grid.ny() * grid.horizontal_size(),
                  grid.origin().z + ux(rng) * grid.nz() * grid.vertical_size()};
        if (!(pos.z > 0.0)) continue;
        int ix = static_cast<int>(std::floor((pos.x - grid.origin().x) / grid.horizontal_size()));
        int iy = static_cast<int>(std::floor((pos.y - grid.origin().y) / grid.horizontal_size()));
        int iz = static_cast<int>(std::floor((pos.z - grid.origin().z) / grid.vertical_size()));
        if (!grid.occupied(ix, iy, iz)) return pos;
    }
    throw std::runtime_error("no free voxel found for a camera");
}

struct OracleHit {
    double t = 0.0;
    ClassId cls = VoxelGrid::kEmpty;
    bool hit = false;
};

/// Brute force: minimum ray/AABB entry distance over every occupied voxel.
inline OracleHit oracle_ray(const VoxelGrid& grid, const Vec3d& pos, const Vec3d& dir,
                            double sky_radius) {
    const double o[3] = {grid.origin().x, grid.origin().y, grid.origin().z};
    const double s[3] = {grid.size(0), grid.size(1), grid.size(2)};
    const double c[3] = {pos.x, pos.y, pos.z};
    const double d[3] = {dir.x, dir.y, dir.z};
    OracleHit best;
    best.t = std::numeric_limits<double>::infinity();
    grid.for_each_occupied([&](int x, int y, int z, ClassId cls) {
        const long i[3] = {x, y, z};
        double t_enter = -std::numeric_limits<double>::infinity();
        double t_exit = std::numeric_limits<double>::infinity();
        for (int a = 0; a < 3; ++a) {
            double lo = o[a] + i[a] * s[a];
            double hi = o[a] + (i[a] + 1) * s[a];
            if (d[a] == 0.0) {
                if (c[a] < lo || c[a] > hi) return;
                continue;
            }
            double t0 = (lo - c[a]) / d[a];
            double t1 = (hi - c[a]) / d[a];
            if (t0 > t1) std::swap(t0, t1);
            if (t0 > t_enter) t_enter = t0;
            if (t1 < t_exit) t_exit = t1;
        }
        if (t_enter > t_exit || t_exit < 0.0 || t_enter < 0.0) return;
        if (t_enter < best.t) best = {t_enter, cls, true};
    });
    if (!best.hit || best.t >= sky_radius) return {};
    return best;
}

/// Exhaustive projection with the algorithm's candidate band and tie-break,
/// scanning every point for every pixel. The pixel mapping is recomputed
/// from scratch (inverse equirectangular, nearest center) rather than taken
/// from the camera.
inline IndexImage oracle_project(const std::vector<Vec3d>& positions, std::size_t prefix,
                                 const PanoramaCamera& camera, const DepthSemanticsMap& depth,
                                 double epsilon) {
    int H = camera.height(), W = camera.width();
    struct Best {
        double r = std::numeric_limits<double>::infinity();
        std::uint32_t idx = 0;
    };
    std::vector<Best> best(static_cast<std::size_t>(H) * W);
    for (std::size_t i = 0; i < prefix; ++i) {
        Vec3d v = positions[i] - camera.position();
        double r = v.norm();
        if (!(r > 0.0)) continue;
        double psi = wrap_pi(std::atan2(v.x, v.y) - camera.base_heading());
        long e = static_cast<long>(std::floor((psi + kPi) * W / kTwoPi));
        e = mod_floor(e, W);
        long q = mod_floor(e - camera.column_shift(), W);
        double theta = std::atan2(v.z, std::sqrt(v.x * v.x + v.y * v.y));
        long p = static_cast<long>(std::floor((kPi / 2.0 - theta) * H / kPi));
        if (p < 0) p = 0;
        if (p >= H) p = H - 1;
        double dpq = depth.depth.at(static_cast<int>(p), static_cast<int>(q));
        if (r < dpq * (1.0 - epsilon) || r > dpq * (1.0 + epsilon)) continue;
        Best& b = best[static_cast<std::size_t>(p) * W + q];
        std::uint32_t idx = static_cast<std::uint32_t>(i) + 1;
        if (r < b.r || (r == b.r && (b.idx == 0 || idx < b.idx))) b = {r, idx};
    }
    IndexImage m(H, W, 0u);
    for (std::size_t cell = 0; cell < m.size(); ++cell) m.data()[cell] = best[cell].idx;
    return m;
}

}  // namespace crossview::testing
