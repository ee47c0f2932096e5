#pragma once

#include <cstdint>
#include <string>

#include "crossview/config.hpp"
#include "crossview/scene.hpp"
#include "crossview/voxelizer.hpp"

namespace crossview::pipeline {

/// Registry + height field resolved from the config's scene section.
struct LoadedScene {
    ClassRegistry registry;
    SemanticHeightField field;
};

LoadedScene load_scene(const PipelineConfig& cfg);

/// Straight or out-and-back path per the config; the center defaults to the
/// footprint center when the config leaves it null.
Trajectory make_trajectory(const PipelineConfig& cfg, const SemanticHeightField& field);

VoxelGrid build_scene_grid(const PipelineConfig& cfg, const SemanticHeightField& field);

// Each command writes its declared outputs and returns a JSON run report:
// {"command", "config", "outputs":[{"path","sha256"},...], ...extras}. The
// report never carries run metadata (timestamps, thread counts), so reruns
// are byte-identical.

/// Occupancy grid -> CVGX file.
std::string cmd_voxelize(const PipelineConfig& cfg, const std::string& out_path, int threads);

/// Visible-point extraction -> out_dir/{points.ply, map.cvpm}.
std::string cmd_extract(const PipelineConfig& cfg, const std::string& out_dir, int threads);

/// Stylized trajectory video from an extraction ->
/// out_dir/{rgb,semantics,depth}/frame_NNN.*.
std::string cmd_render(const PipelineConfig& cfg, const std::string& extract_dir,
                       const std::string& out_dir, int threads);

/// Ground-truth video from captured center-frame data (center_dir holds
/// depth.pfm, rgb.png, semantics.png) -> out_dir/{rgb,semantics}/... plus the
/// colored cloud and map.
std::string cmd_gt_video(const PipelineConfig& cfg, const std::string& center_dir,
                         const std::string& out_dir, int threads);

/// Satellite-image warp through an extraction -> out_dir/{rgb,validity}/...
std::string cmd_warp(const PipelineConfig& cfg, const std::string& extract_dir,
                     const std::string& out_dir, int threads);

/// Frame-by-frame metrics between two directories of RGB PNGs (sorted by
/// name); optional weight-mask directory; optional JSON report file.
std::string cmd_metrics(const std::string& dir_a, const std::string& dir_b,
                        const std::string& weights_dir, const std::string& report_path);

/// U-turn self-consistency: extract + stylize an out-and-back path, write the
/// frames, and report per-pair metrics. frames_override > 0 wins over the
/// config; otherwise a non-u-turn config runs the standard 60-frame protocol.
std::string cmd_uturn(const PipelineConfig& cfg, const std::string& out_dir, int frames_override,
                      int threads);

/// Procedural sample scene (blocks + roads) -> height/semantics/satellite
/// rasters, captured center-frame data, and a ready-to-run config.json.
std::string cmd_sample_scene(const std::string& out_dir, std::uint64_t seed);

}  // namespace crossview::pipeline
