#include <fstream>

#include "crossview/io/binary.hpp"
#include "crossview/io/formats.hpp"

namespace crossview::io {

namespace {
constexpr std::uint32_t kGridVersion = 1;
constexpr std::uint32_t kMapVersion = 1;
}  // namespace

void write_grid(const std::string& path, const VoxelGrid& grid) {
    if (!grid.isotropic()) {
        throw ValidationError(
            "the grid file format carries one voxel size; anisotropic grids cannot serialize");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write("CVGX", 4);
    put_le<std::uint32_t>(out, kGridVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(grid.nx()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(grid.ny()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(grid.nz()));
    put_f64(out, grid.horizontal_size());
    put_f64(out, grid.origin().x);
    put_f64(out, grid.origin().y);
    put_f64(out, grid.origin().z);
    put_le<std::uint64_t>(out, grid.occupied_count());
    grid.for_each_occupied([&](int x, int y, int z, ClassId cls) {
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(x));
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(y));
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(z));
        put_le<std::uint16_t>(out, cls);
    });
    if (!out) throw IoError("write failure: " + path);
}

VoxelGrid read_grid(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    char magic[4];
    get_bytes(in, magic, 4, "grid magic");
    if (std::string(magic, 4) != "CVGX") throw IoError("not a CVGX grid file: " + path);
    std::uint32_t version = get_le<std::uint32_t>(in, "grid version");
    if (version != kGridVersion) {
        throw IoError("unsupported grid version " + std::to_string(version) + " in " + path);
    }
    std::uint32_t nx = get_le<std::uint32_t>(in, "grid dims");
    std::uint32_t ny = get_le<std::uint32_t>(in, "grid dims");
    std::uint32_t nz = get_le<std::uint32_t>(in, "grid dims");
    double voxel_size = get_f64(in, "grid voxel size");
    double ox = get_f64(in, "grid origin");
    double oy = get_f64(in, "grid origin");
    double oz = get_f64(in, "grid origin");
    std::uint64_t count = get_le<std::uint64_t>(in, "grid count");

    VoxelGrid grid(static_cast<int>(nx), static_cast<int>(ny), static_cast<int>(nz), voxel_size,
                   voxel_size, {ox, oy, oz});
    for (std::uint64_t i = 0; i < count; ++i) {
        std::uint32_t x = get_le<std::uint32_t>(in, "grid record");
        std::uint32_t y = get_le<std::uint32_t>(in, "grid record");
        std::uint32_t z = get_le<std::uint32_t>(in, "grid record");
        std::uint16_t cls = get_le<std::uint16_t>(in, "grid record");
        if (x >= nx || y >= ny || z >= nz) {
            throw IoError("grid record out of bounds in " + path);
        }
        grid.set(static_cast<int>(x), static_cast<int>(y), static_cast<int>(z), cls);
    }
    return grid;
}

void write_map(const std::string& path, const PointPixelMap& map) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write("CVPM", 4);
    put_le<std::uint32_t>(out, kMapVersion);
    put_le<std::uint32_t>(out, map.frames);
    put_le<std::uint32_t>(out, map.height);
    put_le<std::uint32_t>(out, map.width);
    for (std::uint32_t v : map.indices) put_le<std::uint32_t>(out, v);
    if (!out) throw IoError("write failure: " + path);
}

PointPixelMap read_map(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    char magic[4];
    get_bytes(in, magic, 4, "map magic");
    if (std::string(magic, 4) != "CVPM") throw IoError("not a CVPM map file: " + path);
    std::uint32_t version = get_le<std::uint32_t>(in, "map version");
    if (version != kMapVersion) {
        throw IoError("unsupported map version " + std::to_string(version) + " in " + path);
    }
    std::uint32_t frames = get_le<std::uint32_t>(in, "map dims");
    std::uint32_t height = get_le<std::uint32_t>(in, "map dims");
    std::uint32_t width = get_le<std::uint32_t>(in, "map dims");
    PointPixelMap map(frames, height, width);
    for (std::size_t i = 0; i < map.indices.size(); ++i) {
        map.indices[i] = get_le<std::uint32_t>(in, "map entries");
    }
    return map;
}

}  // namespace crossview::io
