#include "crossview/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace crossview {

namespace {

constexpr double kPeakSq = 255.0 * 255.0;
constexpr double kCapBelow = kPeakSq * 1e-10;  // error floor for the 100 dB cap

void check_pair(const RgbImage& a, const RgbImage& b) {
    if (!a.same_shape(b)) throw ValidationError("frames have different shapes");
    if (a.empty()) throw ValidationError("frames are empty");
}

double capped_db(double err) {
    if (err < kCapBelow) return 100.0;
    return 10.0 * std::log10(kPeakSq / err);
}

double chan(const Rgb8& v, int c) {
    return static_cast<double>(c == 0 ? v.r : (c == 1 ? v.g : v.b));
}

double mse_impl(const RgbImage& a, const RgbImage& b, const MaskImage* weights) {
    check_pair(a, b);
    if (weights && !a.same_shape(*weights))
        throw ValidationError("weight mask shape does not match the frames");
    double num = 0.0, wsum = 0.0;
    for (int p = 0; p < a.height(); ++p) {
        for (int q = 0; q < a.width(); ++q) {
            double w = weights ? static_cast<double>(weights->at(p, q)) : 1.0;
            if (w == 0.0) continue;
            const Rgb8& x = a.at(p, q);
            const Rgb8& y = b.at(p, q);
            double sq = 0.0;
            for (int c = 0; c < 3; ++c) {
                double d = chan(x, c) - chan(y, c);
                sq += d * d;
            }
            num += w * sq;
            wsum += w;
        }
    }
    if (wsum == 0.0) throw ValidationError("weight mask is all zero");
    return num / (3.0 * wsum);
}

// Rec.601 luma on the [0, 255] scale, kept as doubles.
std::vector<double> luma(const RgbImage& img) {
    std::vector<double> y(img.size());
    const Rgb8* px = img.data();
    for (std::size_t i = 0; i < img.size(); ++i)
        y[i] = 0.299 * px[i].r + 0.587 * px[i].g + 0.114 * px[i].b;
    return y;
}

// (H+1)x(W+1) summed-area table so any window sum is four lookups.
struct Integral {
    int W = 0;
    std::vector<double> s;

    Integral(const std::vector<double>& v, int H, int width) : W(width), s((H + 1) * (W + 1), 0.0) {
        for (int p = 0; p < H; ++p) {
            double row = 0.0;
            for (int q = 0; q < W; ++q) {
                row += v[static_cast<std::size_t>(p) * W + q];
                s[static_cast<std::size_t>(p + 1) * (W + 1) + q + 1] =
                    s[static_cast<std::size_t>(p) * (W + 1) + q + 1] + row;
            }
        }
    }

    double window(int p, int q, int n) const {
        const std::size_t r0 = static_cast<std::size_t>(p) * (W + 1);
        const std::size_t r1 = static_cast<std::size_t>(p + n) * (W + 1);
        return s[r1 + q + n] - s[r1 + q] - s[r0 + q + n] + s[r0 + q];
    }
};

// Forward-difference gradient magnitude |dx| + |dy| for one channel, defined
// on the (H-1)x(W-1) region where both neighbors exist.
double channel_gdl(const RgbImage& a, const RgbImage& b, int c) {
    double acc = 0.0;
    for (int p = 0; p + 1 < a.height(); ++p) {
        for (int q = 0; q + 1 < a.width(); ++q) {
            double gax = chan(a.at(p, q + 1), c) - chan(a.at(p, q), c);
            double gay = chan(a.at(p + 1, q), c) - chan(a.at(p, q), c);
            double gbx = chan(b.at(p, q + 1), c) - chan(b.at(p, q), c);
            double gby = chan(b.at(p + 1, q), c) - chan(b.at(p, q), c);
            acc += std::abs((std::abs(gax) + std::abs(gay)) - (std::abs(gbx) + std::abs(gby)));
        }
    }
    return acc;
}

std::string format_value(const MetricRow& row, double MetricRow::*field) {
    if (!row.covered) return "-";
    std::ostringstream os;
    os << std::fixed << std::setprecision(6) << row.*field;
    return os.str();
}

MetricRow measure_pair(const std::string& label, const RgbImage& a, const RgbImage& b,
                       const MaskImage* weights) {
    MetricRow row;
    row.label = label;
    row.mse = mse_impl(a, b, weights);
    row.psnr = capped_db(row.mse);
    row.ssim = ssim(a, b);
    row.sharp_diff = sharp_diff(a, b);
    return row;
}

MetricReport finish_report(std::vector<MetricRow> rows) {
    MetricReport report;
    report.rows = std::move(rows);
    report.mean.label = "mean";
    std::size_t covered = 0;
    for (const MetricRow& r : report.rows) {
        if (!r.covered) continue;
        ++covered;
        report.mean.mse += r.mse;
        report.mean.psnr += r.psnr;
        report.mean.ssim += r.ssim;
        report.mean.sharp_diff += r.sharp_diff;
    }
    if (covered == 0) throw ValidationError("every frame was masked out");
    report.mean.mse /= covered;
    report.mean.psnr /= covered;
    report.mean.ssim /= covered;
    report.mean.sharp_diff /= covered;
    return report;
}

}  // namespace

double mse(const RgbImage& a, const RgbImage& b) { return mse_impl(a, b, nullptr); }

double mse(const RgbImage& a, const RgbImage& b, const MaskImage& weights) {
    return mse_impl(a, b, &weights);
}

double psnr(const RgbImage& a, const RgbImage& b) { return capped_db(mse(a, b)); }

double psnr(const RgbImage& a, const RgbImage& b, const MaskImage& weights) {
    return capped_db(mse(a, b, weights));
}

double ssim(const RgbImage& a, const RgbImage& b) {
    check_pair(a, b);
    const int n = 8;
    const int H = a.height(), W = a.width();
    if (H < n || W < n) throw ValidationError("frames are smaller than the SSIM window");
    constexpr double C1 = (0.01 * 255.0) * (0.01 * 255.0);
    constexpr double C2 = (0.03 * 255.0) * (0.03 * 255.0);

    std::vector<double> ya = luma(a), yb = luma(b);
    std::vector<double> ya2(ya.size()), yb2(ya.size()), yab(ya.size());
    for (std::size_t i = 0; i < ya.size(); ++i) {
        ya2[i] = ya[i] * ya[i];
        yb2[i] = yb[i] * yb[i];
        yab[i] = ya[i] * yb[i];
    }
    Integral ia(ya, H, W), ib(yb, H, W), ia2(ya2, H, W), ib2(yb2, H, W), iab(yab, H, W);

    const double inv = 1.0 / (n * n);
    double acc = 0.0;
    std::size_t windows = 0;
    for (int p = 0; p + n <= H; ++p) {
        for (int q = 0; q + n <= W; ++q) {
            double ma = ia.window(p, q, n) * inv;
            double mb = ib.window(p, q, n) * inv;
            double va = ia2.window(p, q, n) * inv - ma * ma;
            double vb = ib2.window(p, q, n) * inv - mb * mb;
            double cov = iab.window(p, q, n) * inv - ma * mb;
            double numer = (2.0 * ma * mb + C1) * (2.0 * cov + C2);
            double denom = (ma * ma + mb * mb + C1) * (va + vb + C2);
            acc += numer / denom;
            ++windows;
        }
    }
    return acc / static_cast<double>(windows);
}

double sharp_diff(const RgbImage& a, const RgbImage& b) {
    check_pair(a, b);
    if (a.height() < 2 || a.width() < 2)
        throw ValidationError("frames are too small for gradients");
    double acc = 0.0;
    for (int c = 0; c < 3; ++c) acc += channel_gdl(a, b, c);
    std::size_t cells = static_cast<std::size_t>(a.height() - 1) * (a.width() - 1) * 3;
    return capped_db(acc / static_cast<double>(cells));
}

std::vector<std::pair<std::size_t, std::size_t>> uturn_pairs(std::size_t frames) {
    if (frames < 2 || frames % 2 != 0)
        throw ValidationError("the out-and-back protocol needs an even frame count");
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(frames / 2);
    for (std::size_t i = 0; i < frames / 2; ++i) pairs.emplace_back(i, frames - 1 - i);
    return pairs;
}

std::string MetricReport::to_json_text() const {
    auto encode = [](const MetricRow& r) {
        nlohmann::json o;
        o["label"] = r.label;
        o["covered"] = r.covered;
        if (r.covered) {
            o["mse"] = r.mse;
            o["psnr"] = r.psnr;
            o["ssim"] = r.ssim;
            o["sharp_diff"] = r.sharp_diff;
        }
        return o;
    };
    nlohmann::json doc;
    doc["rows"] = nlohmann::json::array();
    for (const MetricRow& r : rows) doc["rows"].push_back(encode(r));
    doc["mean"] = encode(mean);
    return doc.dump(2) + "\n";
}

std::string MetricReport::to_table_text() const {
    std::vector<const MetricRow*> all;
    for (const MetricRow& r : rows) all.push_back(&r);
    all.push_back(&mean);

    std::size_t label_w = 4;  // at least "mean"
    for (const MetricRow* r : all) label_w = std::max(label_w, r->label.size());

    std::ostringstream os;
    os << std::left << std::setw(static_cast<int>(label_w)) << "" << std::right;
    for (const char* h : {"mse", "psnr", "ssim", "sharp_diff"}) os << std::setw(14) << h;
    os << "\n";
    for (const MetricRow* r : all) {
        os << std::left << std::setw(static_cast<int>(label_w)) << r->label << std::right;
        os << std::setw(14) << format_value(*r, &MetricRow::mse);
        os << std::setw(14) << format_value(*r, &MetricRow::psnr);
        os << std::setw(14) << format_value(*r, &MetricRow::ssim);
        os << std::setw(14) << format_value(*r, &MetricRow::sharp_diff);
        os << "\n";
    }
    return os.str();
}

MetricReport compare_sequences(const std::vector<RgbImage>& a, const std::vector<RgbImage>& b) {
    return compare_sequences(a, b, {});
}

MetricReport compare_sequences(const std::vector<RgbImage>& a, const std::vector<RgbImage>& b,
                               const std::vector<MaskImage>& weights) {
    if (a.size() != b.size()) throw ValidationError("sequences have different lengths");
    if (a.empty()) throw ValidationError("sequences are empty");
    if (!weights.empty() && weights.size() != a.size())
        throw ValidationError("weight sequence length does not match the frames");

    std::vector<MetricRow> rows;
    for (std::size_t t = 0; t < a.size(); ++t) {
        std::string label = "frame " + std::to_string(t);
        const MaskImage* w = weights.empty() ? nullptr : &weights[t];
        if (w) {
            if (!a[t].same_shape(*w))
                throw ValidationError("weight mask shape does not match the frames");
            bool any = false;
            for (std::uint8_t v : w->pixels()) {
                if (v != 0) { any = true; break; }
            }
            if (!any) {
                MetricRow skipped;
                skipped.label = label;
                skipped.covered = false;
                rows.push_back(std::move(skipped));
                continue;
            }
        }
        rows.push_back(measure_pair(label, a[t], b[t], w));
    }
    return finish_report(std::move(rows));
}

MetricReport self_consistency(const std::vector<RgbImage>& frames) {
    auto pairs = uturn_pairs(frames.size());
    std::vector<MetricRow> rows;
    for (auto [i, j] : pairs) {
        RgbImage back = direction_adjust(frames[j]);
        std::string label = "pair (" + std::to_string(i) + ", " + std::to_string(j) + ")";
        rows.push_back(measure_pair(label, frames[i], back, nullptr));
    }
    return finish_report(std::move(rows));
}

}  // namespace crossview
