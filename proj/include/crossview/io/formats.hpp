#pragma once

#include <string>
#include <vector>

#include "crossview/panorama.hpp"
#include "crossview/raster.hpp"
#include "crossview/scene.hpp"
#include "crossview/voxelizer.hpp"

namespace crossview::io {

// --- PFM (grayscale float, little-endian via negative scale, bottom-up) ----
void write_pfm(const std::string& path, const Image<float>& image);
Image<float> read_pfm(const std::string& path);

// Depth maps are doubles internally; PFM narrows to f32 at the file boundary.
void write_pfm_depth(const std::string& path, const DepthImage& depth);
DepthImage read_pfm_depth(const std::string& path);

// --- PNG --------------------------------------------------------------------
void write_png_rgb(const std::string& path, const RgbImage& image);
RgbImage read_png_rgb(const std::string& path);

/// Palette-indexed PNG: pixel bytes are class ids, the PLTE chunk carries the
/// display colors. All ids must be below the palette size (max 256 entries).
void write_png_palette(const std::string& path, const ClassImage& classes,
                       const std::vector<Rgb8>& palette);
struct PalettePng {
    ClassImage classes;
    std::vector<Rgb8> palette;
};
PalettePng read_png_palette(const std::string& path);

/// 1-bit grayscale mask (0 or 1 per pixel).
void write_png_mask(const std::string& path, const MaskImage& mask);
MaskImage read_png_mask(const std::string& path);

// --- PLY (binary little-endian) ---------------------------------------------
// Properties: x, y, z (double), class (ushort), sky (uchar), and when the
// cloud has colors red, green, blue (uchar).
void write_ply(const std::string& path, const PointCloud& cloud);
PointCloud read_ply(const std::string& path);

// --- CVGX occupancy grid ----------------------------------------------------
// Header: magic "CVGX", version u32, dims 3 x u32, voxel_size f64,
// origin 3 x f64, count u64; then count records of (x, y, z: u32, class: u16).
// The format carries a single voxel size, so only isotropic grids serialize.
void write_grid(const std::string& path, const VoxelGrid& grid);
VoxelGrid read_grid(const std::string& path);

// --- CVPM point-pixel map ---------------------------------------------------
// Header: magic "CVPM", version u32, T, H, W u32; then T*H*W u32 indices.
void write_map(const std::string& path, const PointPixelMap& map);
PointPixelMap read_map(const std::string& path);

// --- Hashing ----------------------------------------------------------------
std::string sha256_hex(const void* data, std::size_t size);
std::string sha256_file(const std::string& path);

}  // namespace crossview::io
