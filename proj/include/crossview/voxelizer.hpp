#pragma once

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "crossview/geometry.hpp"
#include "crossview/scene.hpp"

namespace crossview {

/// Semantic occupancy grid. Dense class storage (one u16 per voxel, 0xFFFF =
/// empty); horizontal (x and y) and vertical (z) voxel sizes may differ.
/// Origin is the min corner of voxel (0, 0, 0).
class VoxelGrid {
public:
    static constexpr ClassId kEmpty = 0xFFFF;

    VoxelGrid(int nx, int ny, int nz, double horizontal_size, double vertical_size, Vec3d origin);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int nz() const { return nz_; }
    double horizontal_size() const { return horizontal_size_; }
    double vertical_size() const { return vertical_size_; }
    bool isotropic() const { return horizontal_size_ == vertical_size_; }
    /// Voxel extent along axis 0 (x), 1 (y), or 2 (z).
    double size(int axis) const { return axis == 2 ? vertical_size_ : horizontal_size_; }
    const Vec3d& origin() const { return origin_; }
    int dim(int axis) const { return axis == 0 ? nx_ : (axis == 1 ? ny_ : nz_); }

    bool in_bounds(int ix, int iy, int iz) const {
        return ix >= 0 && ix < nx_ && iy >= 0 && iy < ny_ && iz >= 0 && iz < nz_;
    }
    ClassId at(int ix, int iy, int iz) const { return cells_[index(ix, iy, iz)]; }
    bool occupied(int ix, int iy, int iz) const { return at(ix, iy, iz) != kEmpty; }
    void set(int ix, int iy, int iz, ClassId cls);
    void clear(int ix, int iy, int iz);

    std::size_t occupied_count() const { return occupied_count_; }

    /// Visits occupied voxels as (ix, iy, iz, class) in x-outer, then y, then
    /// z lexicographic order.
    template <typename Fn>
    void for_each_occupied(Fn&& fn) const {
        for (int x = 0; x < nx_; ++x)
            for (int y = 0; y < ny_; ++y)
                for (int z = 0; z < nz_; ++z) {
                    ClassId c = cells_[index(x, y, z)];
                    if (c != kEmpty) fn(x, y, z, c);
                }
    }

private:
    std::size_t index(int ix, int iy, int iz) const {
        return (static_cast<std::size_t>(ix) * ny_ + iy) * nz_ + iz;
    }

    int nx_, ny_, nz_;
    double horizontal_size_;
    double vertical_size_;
    Vec3d origin_;
    std::vector<ClassId> cells_;
    std::size_t occupied_count_ = 0;
};

/// Solid-column extrusion of the height field: every cell contributes an
/// always-occupied ground layer (iz = 0) plus ceil(elevation / vertical) body
/// voxels, all labeled with the cell's class. cell_size must be an integer
/// multiple of the horizontal voxel so columns tile cells exactly.
VoxelGrid build_occupancy(const SemanticHeightField& field, double vertical_voxel,
                          double horizontal_voxel, double max_height);

/// Lattice cell key for feature voxelization, anchored at the world origin.
struct VoxelKey {
    std::int64_t x = 0;
    std::int64_t y = 0;
    std::int64_t z = 0;
    bool operator==(const VoxelKey& o) const { return x == o.x && y == o.y && z == o.z; }
};

struct VoxelKeyHash {
    std::size_t operator()(const VoxelKey& k) const;
};

/// Per-voxel mean features plus the point-to-voxel assignment they came
/// from. Voxels are ordered by first appearance in the input cloud.
struct FeatureVoxelization {
    double voxel_size = 0.0;
    int feature_dim = 0;
    std::vector<VoxelKey> voxel_keys;
    std::vector<double> features;             // voxel count x feature_dim
    std::vector<std::uint32_t> point_voxel;   // input point -> voxel ordinal
    std::unordered_map<VoxelKey, std::uint32_t, VoxelKeyHash> index;

    std::size_t voxel_count() const { return voxel_keys.size(); }
};

VoxelKey voxel_key_of(const Vec3d& position, double voxel_size);

/// Groups points by voxel and averages their features (arithmetic mean,
/// pairwise summation in input order; a voxel whose features are all
/// bitwise-equal keeps that value exactly, so voxelize-devoxelize-voxelize
/// is a fixed point).
FeatureVoxelization voxelize_features(const PointCloud& cloud, double voxel_size);

/// Assigns each point its voxel's feature by position lookup. Points sharing
/// a voxel receive bit-identical features.
std::vector<double> devoxelize(const FeatureVoxelization& vox, const PointCloud& cloud);

/// Class per point from the height-field cell under (x, y); the sky flag
/// wins regardless of footprint. Non-sky points outside the footprint are an
/// error.
std::vector<ClassId> gather_point_semantics(const PointCloud& cloud,
                                            const SemanticHeightField& field,
                                            ClassId sky_class);

}  // namespace crossview
