#include "crossview/colorize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <utility>

#include "crossview/parallel.hpp"

namespace crossview {

namespace {

// Max-heap order over (dist2, index): the "worst" of the k best sits on top.
inline bool neighbor_less(const KnnIndex::Neighbor& a, const KnnIndex::Neighbor& b) {
    return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
}

inline double coord(const Vec3d& v, int axis) {
    return axis == 0 ? v.x : (axis == 1 ? v.y : v.z);
}

}  // namespace

KnnIndex::KnnIndex(std::vector<Vec3d> points) : points_(std::move(points)) {
    if (points_.empty()) throw ValidationError("kNN index needs at least one point");
    for (const Vec3d& p : points_) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
            throw ValidationError("kNN index points must be finite");
        }
    }
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0u);
    axis_.assign(points_.size(), 0);
    build(0, points_.size());
}

void KnnIndex::build(std::size_t lo, std::size_t hi) {
    if (hi - lo <= 1) return;
    Vec3d min{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
              std::numeric_limits<double>::infinity()};
    Vec3d max{-min.x, -min.y, -min.z};
    for (std::size_t i = lo; i < hi; ++i) {
        const Vec3d& p = points_[order_[i]];
        min = {std::min(min.x, p.x), std::min(min.y, p.y), std::min(min.z, p.z)};
        max = {std::max(max.x, p.x), std::max(max.y, p.y), std::max(max.z, p.z)};
    }
    int axis = 0;
    double spread = max.x - min.x;
    if (max.y - min.y > spread) axis = 1, spread = max.y - min.y;
    if (max.z - min.z > spread) axis = 2;

    std::size_t mid = lo + (hi - lo) / 2;
    std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                     [&](std::uint32_t a, std::uint32_t b) {
                         double ca = coord(points_[a], axis), cb = coord(points_[b], axis);
                         return ca < cb || (ca == cb && a < b);
                     });
    axis_[mid] = static_cast<std::uint8_t>(axis);
    build(lo, mid);
    build(mid + 1, hi);
}

void KnnIndex::search(std::size_t lo, std::size_t hi, const Vec3d& target, int k,
                      std::vector<Neighbor>& heap) const {
    if (lo >= hi) return;
    std::size_t mid = lo + (hi - lo) / 2;
    const Vec3d& p = points_[order_[mid]];
    Vec3d diff = target - p;
    Neighbor cand{diff.dot(diff), order_[mid]};
    if (heap.size() < static_cast<std::size_t>(k)) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end(), neighbor_less);
    } else if (neighbor_less(cand, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), neighbor_less);
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end(), neighbor_less);
    }

    if (hi - lo == 1) return;
    int axis = axis_[mid];
    double delta = coord(target, axis) - coord(p, axis);
    bool left_first = delta < 0.0;
    auto visit = [&](bool left) {
        if (left) {
            search(lo, mid, target, k, heap);
        } else {
            search(mid + 1, hi, target, k, heap);
        }
    };
    visit(left_first);
    // The far half can still hold a closer point (or an equal-distance point
    // with a smaller index), so prune only on a strictly larger plane gap.
    if (heap.size() < static_cast<std::size_t>(k) || delta * delta <= heap.front().dist2) {
        visit(!left_first);
    }
}

std::vector<KnnIndex::Neighbor> KnnIndex::query(const Vec3d& target, int k) const {
    if (k < 1) throw ValidationError("k must be positive");
    std::vector<Neighbor> heap;
    heap.reserve(static_cast<std::size_t>(k));
    search(0, points_.size(), target, k, heap);
    std::sort(heap.begin(), heap.end(), neighbor_less);
    return heap;
}

DepthSemanticsMap normalize_depth(const DepthSemanticsMap& d, double target_height) {
    d.validate();
    if (!(target_height > 0.0) || !std::isfinite(target_height)) {
        throw ValidationError("target height must be positive");
    }
    int nadir_p = d.depth.height() - 1;
    int nadir_q = d.depth.width() / 2;  // forward column
    if (d.sky.at(nadir_p, nadir_q)) {
        throw ValidationError("standing-point pixel is sky; depth cannot be normalized");
    }
    double scale = target_height / d.depth.at(nadir_p, nadir_q);

    DepthSemanticsMap out = d;
    for (std::size_t i = 0; i < out.depth.size(); ++i) out.depth.data()[i] *= scale;
    out.sky_range *= scale;  // sky pixels carried exactly sky_range, so they still do
    out.validate();
    return out;
}

DepthImage fill_depth_holes(const DepthImage& depth, const MaskImage& valid) {
    if (!depth.same_shape(valid)) throw ValidationError("depth and validity mask shapes differ");
    int H = depth.height(), W = depth.width();

    std::size_t n_valid = 0;
    double mean = 0.0;
    for (std::size_t i = 0; i < valid.size(); ++i) {
        if (!valid.data()[i]) continue;
        if (!std::isfinite(depth.data()[i])) {
            throw ValidationError("valid depth entries must be finite");
        }
        ++n_valid;
        mean += depth.data()[i];
    }
    if (n_valid == 0) throw ValidationError("cannot fill an all-invalid depth raster");
    mean /= static_cast<double>(n_valid);
    if (n_valid == valid.size()) return depth;

    DepthImage cur = depth;
    for (std::size_t i = 0; i < valid.size(); ++i) {
        if (!valid.data()[i]) cur.data()[i] = mean;
    }

    DepthImage next = cur;
    const int max_passes = 1000000;
    for (int pass = 0; pass < max_passes; ++pass) {
        double worst = 0.0;
        for (int p = 0; p < H; ++p) {
            for (int q = 0; q < W; ++q) {
                if (valid.at(p, q)) continue;
                double sum = 0.0;
                int count = 0;
                if (p > 0) sum += cur.at(p - 1, q), ++count;
                if (p + 1 < H) sum += cur.at(p + 1, q), ++count;
                if (q > 0) sum += cur.at(p, q - 1), ++count;
                if (q + 1 < W) sum += cur.at(p, q + 1), ++count;
                double v = sum / count;
                next.at(p, q) = v;
                double rel = std::abs(v - cur.at(p, q)) / std::max(1.0, std::abs(v));
                worst = std::max(worst, rel);
            }
        }
        std::swap(cur, next);
        if (worst <= 1e-6) return cur;
    }
    throw Error("diffusion fill did not converge");
}

namespace {

void check_knn_inputs(std::size_t total, std::size_t seeds, std::size_t channel, int k) {
    if (seeds == 0) throw ValidationError("kNN colorization needs at least one source point");
    if (seeds > total) throw ValidationError("seed count exceeds the point count");
    if (channel != seeds) throw ValidationError("seed channel length does not match seed count");
    if (k < 1) throw ValidationError("k must be positive");
}

}  // namespace

std::vector<Rgb8> knn_colorize_rgb(const std::vector<Vec3d>& positions, std::size_t seeds,
                                   const std::vector<Rgb8>& seed_rgb, int k, int threads) {
    check_knn_inputs(positions.size(), seeds, seed_rgb.size(), k);
    std::vector<Rgb8> out(positions.size());
    std::copy(seed_rgb.begin(), seed_rgb.end(), out.begin());
    if (positions.size() == seeds) return out;

    KnnIndex index(std::vector<Vec3d>(positions.begin(), positions.begin() + seeds));
    std::size_t rest = positions.size() - seeds;
    parallel_chunks(rest, threads, [&](std::size_t begin, std::size_t end, int) {
        for (std::size_t j = begin; j < end; ++j) {
            std::size_t i = seeds + j;
            auto neighbors = index.query(positions[i], k);
            double sum[3] = {0.0, 0.0, 0.0};
            double wsum = 0.0;
            for (const auto& nb : neighbors) {
                double w = 1.0 / (std::sqrt(nb.dist2) + 1e-6);
                const Rgb8& c = seed_rgb[nb.index];
                sum[0] += w * c.r;
                sum[1] += w * c.g;
                sum[2] += w * c.b;
                wsum += w;
            }
            auto channel = [&](double s) {
                double v = round_half_up(s / wsum);
                return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
            };
            out[i] = {channel(sum[0]), channel(sum[1]), channel(sum[2])};
        }
    });
    return out;
}

std::vector<ClassId> knn_label_vote(const std::vector<Vec3d>& positions, std::size_t seeds,
                                    const std::vector<ClassId>& seed_labels, int k, int threads) {
    check_knn_inputs(positions.size(), seeds, seed_labels.size(), k);
    std::vector<ClassId> out(positions.size());
    std::copy(seed_labels.begin(), seed_labels.end(), out.begin());
    if (positions.size() == seeds) return out;

    KnnIndex index(std::vector<Vec3d>(positions.begin(), positions.begin() + seeds));
    std::size_t rest = positions.size() - seeds;
    parallel_chunks(rest, threads, [&](std::size_t begin, std::size_t end, int) {
        std::map<ClassId, int> tally;
        for (std::size_t j = begin; j < end; ++j) {
            std::size_t i = seeds + j;
            auto neighbors = index.query(positions[i], k);
            tally.clear();
            int best = 0;
            for (const auto& nb : neighbors) best = std::max(best, ++tally[seed_labels[nb.index]]);
            // Majority; on a tie the nearest neighbor carrying a tied label wins.
            for (const auto& nb : neighbors) {
                if (tally[seed_labels[nb.index]] == best) {
                    out[i] = seed_labels[nb.index];
                    break;
                }
            }
        }
    });
    return out;
}

ExtractionResult extract_from_center_depth(const DepthSemanticsMap& center, ClassId sky_class,
                                           const Trajectory& traj, double epsilon, int threads) {
    center.validate();
    traj.validate();
    int H = center.depth.height(), W = center.depth.width();
    std::size_t hw = static_cast<std::size_t>(H) * W;

    DepthSource source = [&](std::size_t t, const PanoramaCamera& camera,
                             const PointCloud& accumulated) -> DepthSemanticsMap {
        if (t == traj.center_index) return center;
        // The center frame was processed first, so its unprojection occupies
        // the first H*W cloud entries; splat those (nearest wins per pixel).
        if (accumulated.size() < hw) throw Error("center frame points missing");
        DepthImage raw(H, W, 0.0);
        MaskImage has(H, W, 0);
        for (std::size_t i = 0; i < hw; ++i) {
            PanoramaCamera::PixelHit hit = camera.locate(accumulated.positions[i]);
            if (!hit.valid) continue;
            if (!has.at(hit.p, hit.q) || hit.range < raw.at(hit.p, hit.q)) {
                raw.at(hit.p, hit.q) = hit.range;
                has.at(hit.p, hit.q) = 1;
            }
        }
        DepthImage filled = fill_depth_holes(raw, has);

        DepthSemanticsMap out;
        out.depth = DepthImage(H, W);
        out.semantics = ClassImage(H, W, 0);  // placeholder; labels come from the kNN vote
        out.sky = MaskImage(H, W, 0);
        out.sky_range = center.sky_range;
        for (int p = 0; p < H; ++p) {
            for (int q = 0; q < W; ++q) {
                double v = filled.at(p, q);
                if (v >= out.sky_range) {
                    out.depth.at(p, q) = out.sky_range;
                    out.sky.at(p, q) = 1;
                    out.semantics.at(p, q) = sky_class;
                } else {
                    out.depth.at(p, q) = v;
                }
            }
        }
        out.validate();
        return out;
    };

    return extract_frames(traj, H, W, epsilon, source, threads);
}

GroundTruthVideo build_ground_truth_video(const RgbImage& center_rgb,
                                          const ClassImage& center_semantics,
                                          const ExtractionResult& extraction, int k, int threads) {
    const PointPixelMap& map = extraction.map;
    if (map.height != static_cast<std::uint32_t>(center_rgb.height()) ||
        map.width != static_cast<std::uint32_t>(center_rgb.width()) ||
        !center_rgb.same_shape(center_semantics)) {
        throw ValidationError("center frame rasters do not match the extraction shape");
    }
    if (extraction.processing_order.empty()) throw ValidationError("empty extraction");
    std::size_t c = extraction.processing_order.front();
    std::size_t hw = static_cast<std::size_t>(map.height) * map.width;
    if (extraction.stats[c].points_before != 0 || extraction.stats[c].new_points != hw) {
        throw ValidationError("extraction does not start with a full center frame");
    }

    std::vector<Rgb8> seed_rgb(center_rgb.pixels().begin(), center_rgb.pixels().end());
    std::vector<ClassId> seed_labels(center_semantics.pixels().begin(),
                                     center_semantics.pixels().end());

    GroundTruthVideo video;
    video.point_rgb = knn_colorize_rgb(extraction.cloud.positions, hw, seed_rgb, k, threads);
    video.point_labels = knn_label_vote(extraction.cloud.positions, hw, seed_labels, k, threads);
    video.rgb = render_channel(map, video.point_rgb);
    video.semantics = render_channel(map, video.point_labels);
    return video;
}

std::vector<MaskImage> misalignment_mask(const std::vector<ClassImage>& rendered,
                                         const std::vector<ClassImage>& reference) {
    if (rendered.size() != reference.size()) {
        throw ValidationError("sequence lengths differ");
    }
    std::vector<MaskImage> out;
    out.reserve(rendered.size());
    for (std::size_t t = 0; t < rendered.size(); ++t) {
        if (!rendered[t].same_shape(reference[t])) {
            throw ValidationError("frame " + std::to_string(t) + ": shapes differ");
        }
        MaskImage mask(rendered[t].height(), rendered[t].width());
        for (std::size_t i = 0; i < mask.size(); ++i) {
            mask.data()[i] = rendered[t].data()[i] == reference[t].data()[i] ? 1 : 0;
        }
        out.push_back(std::move(mask));
    }
    return out;
}

}  // namespace crossview
