#include "crossview/stylize.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <json.hpp>

#include "crossview/error.hpp"

namespace crossview {

void FeatureMap::validate() const {
    if (height <= 0 || width <= 0 || channels <= 0) {
        throw ValidationError("feature map dimensions must be positive");
    }
    if (values.size() != static_cast<std::size_t>(height) * width * channels) {
        throw ValidationError("feature map buffer size mismatch");
    }
    for (float v : values) {
        if (!std::isfinite(v)) throw ValidationError("feature map values must be finite");
    }
}

std::string LatentSet::to_json_text() const {
    nlohmann::json doc = nlohmann::json::object();
    for (const auto& [cls, vec] : vectors) {
        doc[std::to_string(cls)] = vec;
    }
    return doc.dump(2) + "\n";
}

LatentSet LatentSet::from_json_text(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("latent set JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ValidationError("latent set JSON must be an object");
    LatentSet out;
    out.dim = -1;
    for (const auto& [key, value] : doc.items()) {
        std::size_t used = 0;
        long id = -1;
        try {
            id = std::stol(key, &used);
        } catch (const std::exception&) {
            throw ValidationError("latent set key is not a class id: " + key);
        }
        if (used != key.size() || id < 0 || id > 0xFFFF) {
            throw ValidationError("latent set key is not a class id: " + key);
        }
        if (!value.is_array()) throw ValidationError("latent vector must be an array: " + key);
        std::vector<double> vec = value.get<std::vector<double>>();
        if (out.dim < 0) {
            out.dim = static_cast<int>(vec.size());
        } else if (static_cast<int>(vec.size()) != out.dim) {
            throw ValidationError("latent vectors must share one dimension");
        }
        out.vectors[static_cast<ClassId>(id)] = std::move(vec);
    }
    if (out.dim < 0) out.dim = 16;  // empty set keeps the default
    return out;
}

LatentSet attentive_pool(const FeatureMap& f, const std::map<ClassId, MaskImage>& masks) {
    f.validate();
    LatentSet out;
    out.dim = f.channels;
    for (const auto& [cls, mask] : masks) {
        if (mask.height() != f.height || mask.width() != f.width) {
            throw ValidationError("mask shape does not match the feature map");
        }
        std::vector<double> sum(f.channels, 0.0);
        std::size_t count = 0;
        for (int p = 0; p < f.height; ++p) {
            for (int q = 0; q < f.width; ++q) {
                if (!mask.at(p, q)) continue;
                ++count;
                for (int c = 0; c < f.channels; ++c) sum[c] += f.at(p, q, c);
            }
        }
        if (count == 0) {
            throw ValidationError("class " + std::to_string(cls) + " has an empty mask");
        }
        for (double& v : sum) v /= static_cast<double>(count);
        out.vectors[cls] = std::move(sum);
    }
    return out;
}

namespace {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::vector<Rgb8> stylize_points(const PointCloud& cloud, const ClassRegistry& registry,
                                 std::uint64_t seed, double amplitude) {
    cloud.validate();
    if (cloud.semantics.size() != cloud.size()) {
        throw ValidationError("stylize needs per-point semantics");
    }
    if (!(amplitude >= 0.0) || amplitude > 1.0) {
        throw ValidationError("brightness amplitude must lie in [0, 1]");
    }
    std::vector<Rgb8> out(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (!registry.has(cloud.semantics[i])) {
            throw ValidationError("point " + std::to_string(i) + " has unregistered class " +
                                  std::to_string(cloud.semantics[i]));
        }
        const ClassRegistry::Entry& entry = registry.entry(cloud.semantics[i]);
        double factor = 1.0;
        if (amplitude > 0.0) {
            const Vec3d& p = cloud.positions[i];
            std::uint64_t h = splitmix64(seed);
            h = splitmix64(h ^ std::bit_cast<std::uint64_t>(p.x));
            h = splitmix64(h ^ std::bit_cast<std::uint64_t>(p.y));
            h = splitmix64(h ^ std::bit_cast<std::uint64_t>(p.z));
            double u = static_cast<double>(h >> 11) * 0x1.0p-53;  // [0, 1)
            factor = 1.0 - amplitude + 2.0 * amplitude * u;
        }
        auto channel = [&](std::uint8_t base) {
            return static_cast<std::uint8_t>(
                std::clamp(round_half_up(base * factor), 0L, 255L));
        };
        out[i] = {channel(entry.color.r), channel(entry.color.g), channel(entry.color.b)};
    }
    return out;
}

namespace {

// Half-pixel-aligned source coordinate for output index j, with the two
// bracketing input indices and the blend weight toward the upper one.
struct Tap {
    int lo;
    int hi;
    double w;  // weight of hi
};

Tap tap_for(int j, int extent) {
    double coord = (j + 0.5) / 2.0 - 0.5;
    double lo = std::floor(coord);
    Tap t;
    t.w = coord - lo;
    t.lo = std::clamp(static_cast<int>(lo), 0, extent - 1);
    t.hi = std::clamp(static_cast<int>(lo) + 1, 0, extent - 1);
    return t;
}

}  // namespace

RgbImage upsample2x(const RgbImage& frame) {
    if (frame.empty()) throw ValidationError("cannot upsample an empty frame");
    int H = frame.height(), W = frame.width();
    RgbImage out(2 * H, 2 * W);
    for (int p = 0; p < 2 * H; ++p) {
        Tap tp = tap_for(p, H);
        for (int q = 0; q < 2 * W; ++q) {
            Tap tq = tap_for(q, W);
            auto blend = [&](auto pick) {
                double top = (1.0 - tq.w) * pick(frame.at(tp.lo, tq.lo)) +
                             tq.w * pick(frame.at(tp.lo, tq.hi));
                double bot = (1.0 - tq.w) * pick(frame.at(tp.hi, tq.lo)) +
                             tq.w * pick(frame.at(tp.hi, tq.hi));
                double v = (1.0 - tp.w) * top + tp.w * bot;
                return static_cast<std::uint8_t>(std::clamp(round_half_up(v), 0L, 255L));
            };
            out.at(p, q) = {blend([](const Rgb8& c) { return static_cast<double>(c.r); }),
                            blend([](const Rgb8& c) { return static_cast<double>(c.g); }),
                            blend([](const Rgb8& c) { return static_cast<double>(c.b); })};
        }
    }
    return out;
}

std::vector<RgbImage> upsample2x(const std::vector<RgbImage>& frames) {
    std::vector<RgbImage> out;
    out.reserve(frames.size());
    for (const RgbImage& f : frames) out.push_back(upsample2x(f));
    return out;
}

ClassImage upsample2x_nearest(const ClassImage& frame) {
    if (frame.empty()) throw ValidationError("cannot upsample an empty frame");
    int H = frame.height(), W = frame.width();
    ClassImage out(2 * H, 2 * W);
    for (int p = 0; p < 2 * H; ++p) {
        for (int q = 0; q < 2 * W; ++q) out.at(p, q) = frame.at(p / 2, q / 2);
    }
    return out;
}

std::vector<ClassImage> upsample2x_nearest(const std::vector<ClassImage>& frames) {
    std::vector<ClassImage> out;
    out.reserve(frames.size());
    for (const ClassImage& f : frames) out.push_back(upsample2x_nearest(f));
    return out;
}

}  // namespace crossview
