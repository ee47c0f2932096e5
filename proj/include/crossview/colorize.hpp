#pragma once

#include <cstdint>
#include <vector>

#include "crossview/extraction.hpp"
#include "crossview/panorama.hpp"
#include "crossview/raster.hpp"
#include "crossview/scene.hpp"

namespace crossview {

/// kd-tree over 3D positions. Immutable after construction; queries are
/// const and safe to run concurrently. Ties in distance resolve to the
/// smaller point index so results are deterministic.
class KnnIndex {
  public:
    struct Neighbor {
        double dist2 = 0.0;
        std::size_t index = 0;
    };

    explicit KnnIndex(std::vector<Vec3d> points);

    /// The min(k, size()) nearest points, sorted by (distance, index).
    std::vector<Neighbor> query(const Vec3d& target, int k) const;

    std::size_t size() const { return points_.size(); }

  private:
    void build(std::size_t lo, std::size_t hi);
    void search(std::size_t lo, std::size_t hi, const Vec3d& target, int k,
                std::vector<Neighbor>& heap) const;

    std::vector<Vec3d> points_;
    std::vector<std::uint32_t> order_;  // implicit balanced tree: node of [lo,hi) is mid
    std::vector<std::uint8_t> axis_;    // split axis per node slot
};

/// Rescales the map so the standing-point ray (bottom row of the forward
/// column) has the target length. Every depth and the sky range scale by the
/// same factor, so sky pixels keep carrying exactly the sky range.
DepthSemanticsMap normalize_depth(const DepthSemanticsMap& d, double target_height = 3.0);

/// Fills pixels where `valid` is 0 by repeated 4-neighbor averaging (Jacobi
/// passes) until the largest per-pixel relative change drops below 1e-6.
/// Valid pixels are never touched.
DepthImage fill_depth_holes(const DepthImage& depth, const MaskImage& valid);

/// Colors for every point. The first `seeds` entries of `positions` are the
/// colored source points and pass through unchanged; every later point takes
/// an inverse-distance weighted average (w = 1/(d + 1e-6)) of its k nearest
/// seeds, rounded half-up per channel.
std::vector<Rgb8> knn_colorize_rgb(const std::vector<Vec3d>& positions, std::size_t seeds,
                                   const std::vector<Rgb8>& seed_rgb, int k, int threads = 0);

/// Labels for every point: seeds pass through, the rest take an unweighted
/// majority over the k nearest seeds. On a tie the nearest neighbor holding
/// one of the tied labels decides.
std::vector<ClassId> knn_label_vote(const std::vector<Vec3d>& positions, std::size_t seeds,
                                    const std::vector<ClassId>& seed_labels, int k,
                                    int threads = 0);

/// The center-frame-geometry variant of the extraction loop: the center frame
/// uses the given (already normalized) depth map directly; every other frame
/// gets its depth by splatting the center frame's points (nearest wins),
/// diffusion-filling the gaps, and turning pixels at or beyond the sky range
/// into sky. The returned cloud carries no semantics; labels come later via
/// the kNN vote.
ExtractionResult extract_from_center_depth(const DepthSemanticsMap& center, ClassId sky_class,
                                           const Trajectory& traj, double epsilon,
                                           int threads = 0);

struct GroundTruthVideo {
    std::vector<RgbImage> rgb;
    std::vector<ClassImage> semantics;
    std::vector<Rgb8> point_rgb;      // per-point colors backing the frames
    std::vector<ClassId> point_labels;
};

/// Seeds colors and labels from the center frame's rasters (its points are
/// the first H*W entries of the cloud), colorizes the remaining points with
/// the kNN ops, and renders both channels through the point-pixel map.
GroundTruthVideo build_ground_truth_video(const RgbImage& center_rgb,
                                          const ClassImage& center_semantics,
                                          const ExtractionResult& extraction, int k,
                                          int threads = 0);

/// Per-pixel weights: 1 where the class frames agree, 0 where they differ.
std::vector<MaskImage> misalignment_mask(const std::vector<ClassImage>& rendered,
                                         const std::vector<ClassImage>& reference);

}  // namespace crossview
