#include "crossview/voxelizer.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "crossview/error.hpp"

namespace crossview {

VoxelGrid::VoxelGrid(int nx, int ny, int nz, double horizontal_size, double vertical_size,
                     Vec3d origin)
    : nx_(nx), ny_(ny), nz_(nz), horizontal_size_(horizontal_size),
      vertical_size_(vertical_size), origin_(origin) {
    if (nx < 1 || ny < 1 || nz < 1) throw ValidationError("voxel grid dims must be >= 1");
    if (!(horizontal_size > 0.0) || !(vertical_size > 0.0)) {
        throw ValidationError("voxel sizes must be positive");
    }
    cells_.assign(static_cast<std::size_t>(nx) * ny * nz, kEmpty);
}

void VoxelGrid::set(int ix, int iy, int iz, ClassId cls) {
    if (!in_bounds(ix, iy, iz)) {
        throw ValidationError("voxel (" + std::to_string(ix) + "," + std::to_string(iy) + "," +
                              std::to_string(iz) + ") out of bounds");
    }
    if (cls == kEmpty) throw ValidationError("cannot set the empty sentinel as a class");
    ClassId& cell = cells_[index(ix, iy, iz)];
    if (cell == kEmpty) ++occupied_count_;
    cell = cls;
}

void VoxelGrid::clear(int ix, int iy, int iz) {
    ClassId& cell = cells_[index(ix, iy, iz)];
    if (cell != kEmpty) --occupied_count_;
    cell = kEmpty;
}

VoxelGrid build_occupancy(const SemanticHeightField& field, double vertical_voxel,
                          double horizontal_voxel, double max_height) {
    if (!(vertical_voxel > 0.0) || !(horizontal_voxel > 0.0)) {
        throw ValidationError("voxel sizes must be positive");
    }
    if (horizontal_voxel > field.cell_size()) {
        throw ValidationError("horizontal voxel exceeds the height-field cell size");
    }
    // Columns must tile cells exactly so per-cell voxel counts are integral.
    double ratio = field.cell_size() / horizontal_voxel;
    int per_cell = static_cast<int>(std::llround(ratio));
    if (per_cell < 1 || std::abs(per_cell * horizontal_voxel - field.cell_size()) > 1e-9) {
        throw ValidationError("cell_size must be an integer multiple of the horizontal voxel");
    }

    std::string offenders;
    int offender_count = 0;
    for (int r = 0; r < field.height(); ++r) {
        for (int c = 0; c < field.width(); ++c) {
            if (field.elevation(r, c) > max_height) {
                if (offender_count < 8) {
                    offenders += (offender_count ? ", " : "") + std::string("(") +
                                 std::to_string(r) + "," + std::to_string(c) + ")";
                }
                ++offender_count;
            }
        }
    }
    if (offender_count > 0) {
        throw ValidationError("elevation exceeds max_height at " + std::to_string(offender_count) +
                              " cells: " + offenders + (offender_count > 8 ? ", ..." : ""));
    }

    int nz = static_cast<int>(std::ceil(max_height / vertical_voxel)) + 1;  // +1: ground layer
    int nx = field.width() * per_cell;
    int ny = field.height() * per_cell;
    VoxelGrid grid(nx, ny, nz, horizontal_voxel, vertical_voxel,
                   {field.min_x(), field.min_y(), 0.0});

    for (int r = 0; r < field.height(); ++r) {
        for (int c = 0; c < field.width(); ++c) {
            ClassId cls = field.semantic(r, c);
            int top = static_cast<int>(std::ceil(field.elevation(r, c) / vertical_voxel));
            // Row 0 is the northernmost row; grid y grows northward from min_y.
            int iy0 = (field.height() - 1 - r) * per_cell;
            int ix0 = c * per_cell;
            for (int dy = 0; dy < per_cell; ++dy) {
                for (int dx = 0; dx < per_cell; ++dx) {
                    int ix = ix0 + dx;
                    int iy = iy0 + dy;
                    grid.set(ix, iy, 0, cls);
                    for (int iz = 1; iz <= top; ++iz) grid.set(ix, iy, iz, cls);
                }
            }
        }
    }
    return grid;
}

std::size_t VoxelKeyHash::operator()(const VoxelKey& k) const {
    auto mix = [](std::uint64_t v) {
        v += 0x9e3779b97f4a7c15ull;
        v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ull;
        v = (v ^ (v >> 27)) * 0x94d049bb133111ebull;
        return v ^ (v >> 31);
    };
    std::uint64_t h = mix(static_cast<std::uint64_t>(k.x));
    h = mix(h ^ static_cast<std::uint64_t>(k.y));
    h = mix(h ^ static_cast<std::uint64_t>(k.z));
    return static_cast<std::size_t>(h);
}

VoxelKey voxel_key_of(const Vec3d& position, double voxel_size) {
    return {static_cast<std::int64_t>(std::floor(position.x / voxel_size)),
            static_cast<std::int64_t>(std::floor(position.y / voxel_size)),
            static_cast<std::int64_t>(std::floor(position.z / voxel_size))};
}

namespace {

// Pairwise summation: deterministic and stable regardless of voxel
// population order elsewhere.
double pairwise_sum(const double* values, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += values[i];
        return s;
    }
    std::size_t half = n / 2;
    return pairwise_sum(values, half) + pairwise_sum(values + half, n - half);
}

}  // namespace

FeatureVoxelization voxelize_features(const PointCloud& cloud, double voxel_size) {
    if (!(voxel_size > 0.0)) throw ValidationError("feature voxel size must be positive");
    if (!cloud.has_features()) {
        throw ValidationError("voxelize_features requires a feature channel");
    }
    cloud.validate();

    FeatureVoxelization vox;
    vox.voxel_size = voxel_size;
    vox.feature_dim = cloud.feature_dim;

    std::size_t n = cloud.size();
    vox.point_voxel.resize(n);
    std::vector<std::vector<std::uint32_t>> members;
    for (std::size_t i = 0; i < n; ++i) {
        VoxelKey key = voxel_key_of(cloud.positions[i], voxel_size);
        auto [it, inserted] = vox.index.try_emplace(key, static_cast<std::uint32_t>(vox.voxel_keys.size()));
        if (inserted) {
            vox.voxel_keys.push_back(key);
            members.emplace_back();
        }
        vox.point_voxel[i] = it->second;
        members[it->second].push_back(static_cast<std::uint32_t>(i));
    }

    int dim = vox.feature_dim;
    vox.features.resize(vox.voxel_count() * dim);
    std::vector<double> scratch;
    for (std::size_t v = 0; v < vox.voxel_count(); ++v) {
        const auto& pts = members[v];
        for (int d = 0; d < dim; ++d) {
            double first = cloud.features[static_cast<std::size_t>(pts[0]) * dim + d];
            bool all_equal = true;
            scratch.clear();
            scratch.reserve(pts.size());
            for (std::uint32_t p : pts) {
                double value = cloud.features[static_cast<std::size_t>(p) * dim + d];
                scratch.push_back(value);
                if (value != first) all_equal = false;
            }
            // Identical inputs keep their value exactly; this makes a second
            // voxelize pass over devoxelized features a no-op.
            vox.features[v * dim + d] =
                all_equal ? first : pairwise_sum(scratch.data(), scratch.size()) / scratch.size();
        }
    }
    return vox;
}

std::vector<double> devoxelize(const FeatureVoxelization& vox, const PointCloud& cloud) {
    int dim = vox.feature_dim;
    std::vector<double> out(cloud.size() * static_cast<std::size_t>(dim));
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        VoxelKey key = voxel_key_of(cloud.positions[i], vox.voxel_size);
        auto it = vox.index.find(key);
        if (it == vox.index.end()) {
            throw ValidationError("point " + std::to_string(i) +
                                  " falls outside every voxel in the table");
        }
        std::memcpy(out.data() + i * dim, vox.features.data() + static_cast<std::size_t>(it->second) * dim,
                    sizeof(double) * dim);
    }
    return out;
}

std::vector<ClassId> gather_point_semantics(const PointCloud& cloud,
                                            const SemanticHeightField& field, ClassId sky_class) {
    std::vector<ClassId> out(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (cloud.sky[i]) {
            out[i] = sky_class;
            continue;
        }
        auto cell = field.cell_at(cloud.positions[i].x, cloud.positions[i].y);
        if (!cell) {
            throw ValidationError("non-sky point " + std::to_string(i) +
                                  " lies outside the height-field footprint");
        }
        out[i] = field.semantic(cell->first, cell->second);
    }
    return out;
}

}  // namespace crossview
