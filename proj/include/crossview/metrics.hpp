#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "crossview/error.hpp"
#include "crossview/raster.hpp"

namespace crossview {

/// Weighted mean squared error over pixels and the three channels; weights
/// are per pixel. The unweighted overloads are the all-ones case exactly.
double mse(const RgbImage& a, const RgbImage& b);
double mse(const RgbImage& a, const RgbImage& b, const MaskImage& weights);

/// 10*log10(255^2 / MSE), capped at 100 dB once MSE < 255^2 * 1e-10.
double psnr(const RgbImage& a, const RgbImage& b);
double psnr(const RgbImage& a, const RgbImage& b, const MaskImage& weights);

/// Mean local SSIM on Rec.601 luma: 8x8 windows at stride 1, biased
/// (divide-by-64) moments, C1 = (0.01*255)^2, C2 = (0.03*255)^2.
double ssim(const RgbImage& a, const RgbImage& b);

/// Sharpness difference: SD = 10*log10(255^2 / GDL) with the PSNR cap, where
/// GDL averages | (|dx a|+|dy a|) - (|dx b|+|dy b|) | per channel over the
/// (H-1)x(W-1) region where both forward differences exist.
double sharp_diff(const RgbImage& a, const RgbImage& b);

/// Out-and-back frame pairs (i, T-1-i) sharing a position with opposite
/// heading. T must be even.
std::vector<std::pair<std::size_t, std::size_t>> uturn_pairs(std::size_t frames);

/// 180-degree yaw: circular shift by W/2 columns. Involution; W must be even.
template <typename T>
Image<T> direction_adjust(const Image<T>& frame) {
    int W = frame.width();
    if (W % 2 != 0) throw ValidationError("direction adjustment needs an even width");
    Image<T> out(frame.height(), W);
    for (int p = 0; p < frame.height(); ++p)
        for (int q = 0; q < W; ++q) out.at(p, q) = frame.at(p, (q + W / 2) % W);
    return out;
}

struct MetricRow {
    std::string label;
    bool covered = true;  // false when a weight mask zeroed the whole frame
    double mse = 0.0;
    double psnr = 0.0;
    double ssim = 0.0;
    double sharp_diff = 0.0;
};

/// Per-row metrics plus their arithmetic mean over covered rows.
struct MetricReport {
    std::vector<MetricRow> rows;
    MetricRow mean;

    std::string to_json_text() const;
    std::string to_table_text() const;
};

/// Frame-by-frame comparison of two sequences. When weight masks are given,
/// they apply to MSE/PSNR; frames whose mask is all zero are excluded from
/// the means (SSIM and sharpness are unweighted by construction).
MetricReport compare_sequences(const std::vector<RgbImage>& a, const std::vector<RgbImage>& b);
MetricReport compare_sequences(const std::vector<RgbImage>& a, const std::vector<RgbImage>& b,
                               const std::vector<MaskImage>& weights);

/// The u-turn protocol: for each pair, direction-adjust the return frame and
/// compare it against the outbound frame.
MetricReport self_consistency(const std::vector<RgbImage>& frames);

}  // namespace crossview
