#include "crossview/scene.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "crossview/error.hpp"

namespace crossview {

// ---------------------------------------------------------------------------
// ClassRegistry

ClassRegistry::ClassRegistry(std::vector<Entry> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw ValidationError("class registry must not be empty");
    std::set<std::string> names;
    bool sky_found = false;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const Entry& e = entries_[i];
        if (e.id != i) {
            throw ValidationError("class ids must be dense and start at 0 (got id " +
                                  std::to_string(e.id) + " at position " + std::to_string(i) + ")");
        }
        if (!names.insert(e.name).second) {
            throw ValidationError("duplicate class name '" + e.name + "' in registry");
        }
        if (e.name == "sky") {
            sky_found = true;
            sky_id_ = e.id;
        }
    }
    if (!sky_found) throw ValidationError("class registry must contain a 'sky' class");
    if (entries_.size() > 256) throw ValidationError("class registry exceeds 256 classes");
}

ClassRegistry ClassRegistry::builtin() {
    return ClassRegistry({
        {0, "road", {128, 64, 128}},
        {1, "sidewalk", {244, 35, 232}},
        {2, "building_left", {70, 70, 70}},
        {3, "building_right", {102, 102, 156}},
        {4, "vegetation", {107, 142, 35}},
        {5, "terrain", {152, 251, 152}},
        {6, "object", {220, 220, 0}},
        {7, "sky", {70, 130, 180}},
    });
}

ClassRegistry ClassRegistry::from_json_text(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("registry JSON parse failure: ") + e.what());
    }
    if (!doc.contains("classes") || !doc["classes"].is_array()) {
        throw ValidationError("registry JSON must have a 'classes' array");
    }
    std::vector<Entry> entries;
    for (const auto& c : doc["classes"]) {
        Entry e;
        e.id = c.at("id").get<ClassId>();
        e.name = c.at("name").get<std::string>();
        auto rgb = c.at("rgb");
        if (!rgb.is_array() || rgb.size() != 3) {
            throw ValidationError("registry class '" + e.name + "' needs rgb as [r,g,b]");
        }
        e.color = {rgb[0].get<std::uint8_t>(), rgb[1].get<std::uint8_t>(), rgb[2].get<std::uint8_t>()};
        entries.push_back(std::move(e));
    }
    return ClassRegistry(std::move(entries));
}

ClassRegistry ClassRegistry::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open registry file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

const ClassRegistry::Entry& ClassRegistry::entry(ClassId id) const {
    if (id >= entries_.size()) {
        throw ValidationError("unregistered class id " + std::to_string(id));
    }
    return entries_[id];
}

std::optional<ClassId> ClassRegistry::find(const std::string& name) const {
    for (const Entry& e : entries_) {
        if (e.name == name) return e.id;
    }
    return std::nullopt;
}

std::string ClassRegistry::to_json_text() const {
    nlohmann::json classes = nlohmann::json::array();
    for (const Entry& e : entries_) {
        classes.push_back({{"id", e.id},
                           {"name", e.name},
                           {"rgb", {e.color.r, e.color.g, e.color.b}}});
    }
    return nlohmann::json{{"classes", classes}}.dump(2) + "\n";
}

std::vector<Rgb8> ClassRegistry::palette() const {
    std::vector<Rgb8> p;
    p.reserve(entries_.size());
    for (const Entry& e : entries_) p.push_back(e.color);
    return p;
}

// ---------------------------------------------------------------------------
// SemanticHeightField

SemanticHeightField::SemanticHeightField(Image<float> elevation, ClassImage semantics,
                                         double cell_size, Vec2d origin,
                                         const ClassRegistry& registry)
    : elevation_(std::move(elevation)), semantics_(std::move(semantics)),
      cell_size_(cell_size), origin_(origin) {
    if (!elevation_.same_shape(semantics_)) {
        throw ValidationError("height field elevation and semantics shapes differ");
    }
    if (elevation_.empty()) throw ValidationError("height field is empty");
    if (!(cell_size_ > 0.0)) throw ValidationError("cell_size must be positive");
    for (int r = 0; r < height(); ++r) {
        for (int c = 0; c < width(); ++c) {
            float e = elevation_.at(r, c);
            if (!std::isfinite(e) || e < 0.0f) {
                throw ValidationError("elevation at cell (" + std::to_string(r) + "," +
                                      std::to_string(c) + ") must be finite and >= 0");
            }
            ClassId k = semantics_.at(r, c);
            if (!registry.has(k)) {
                throw ValidationError("semantics at cell (" + std::to_string(r) + "," +
                                      std::to_string(c) + ") uses unregistered class " +
                                      std::to_string(k));
            }
            if (k == registry.sky_id()) {
                throw ValidationError("height field must not assign the sky class (cell " +
                                      std::to_string(r) + "," + std::to_string(c) + ")");
            }
            if (e > max_elevation_) max_elevation_ = e;
        }
    }
}

std::optional<std::pair<int, int>> SemanticHeightField::cell_at(double x, double y) const {
    // Row 0 is northernmost: row index grows as y decreases.
    long col = static_cast<long>(std::floor((x - origin_.x) / cell_size_ + 0.5));
    long row = static_cast<long>(std::floor((origin_.y - y) / cell_size_ + 0.5));
    if (col < 0 || col >= width() || row < 0 || row >= height()) return std::nullopt;
    return std::make_pair(static_cast<int>(row), static_cast<int>(col));
}

// ---------------------------------------------------------------------------
// Trajectory

double Trajectory::effective_heading(std::size_t t) const {
    const TrajectoryFrame& f = frames.at(t);
    return f.half_turn ? f.heading + kTwoPi / 2.0 : f.heading;
}

void Trajectory::validate() const {
    if (frames.empty()) throw ValidationError("trajectory must have at least one frame");
    if (center_index >= frames.size()) {
        throw ValidationError("trajectory center index " + std::to_string(center_index) +
                              " out of range for " + std::to_string(frames.size()) + " frames");
    }
    if (!(camera_height > 0.0)) throw ValidationError("camera height must be positive");
}

namespace {

Vec2d forward_of(double heading) { return {std::sin(heading), std::cos(heading)}; }

}  // namespace

Trajectory make_linear_trajectory(Vec2d center, double heading, double step_m, int frames,
                                  double camera_height) {
    if (frames < 1) throw ValidationError("trajectory needs at least one frame");
    if (!(step_m > 0.0) && frames > 1) throw ValidationError("trajectory step must be positive");
    Trajectory traj;
    traj.camera_height = camera_height;
    traj.center_index = static_cast<std::size_t>((frames - 1) / 2);
    Vec2d fwd = forward_of(heading);
    for (int i = 0; i < frames; ++i) {
        double offset = (i - static_cast<int>(traj.center_index)) * step_m;
        traj.frames.push_back({{center.x + offset * fwd.x, center.y + offset * fwd.y}, heading, false});
    }
    traj.validate();
    return traj;
}

Trajectory make_uturn_trajectory(Vec2d center, double heading, double step_m, int frames,
                                 double camera_height) {
    if (frames < 2 || frames % 2 != 0) {
        throw ValidationError("u-turn trajectory needs an even frame count >= 2");
    }
    if (!(step_m > 0.0)) throw ValidationError("trajectory step must be positive");
    int half = frames / 2;
    Vec2d fwd = forward_of(heading);
    // Outbound locations, centered on the requested point. The return leg
    // reuses the same location doubles so paired frames share positions
    // bit-for-bit.
    std::vector<Vec2d> locations(half);
    double mid = (half - 1) / 2.0;
    for (int i = 0; i < half; ++i) {
        double offset = (i - mid) * step_m;
        locations[i] = {center.x + offset * fwd.x, center.y + offset * fwd.y};
    }
    Trajectory traj;
    traj.camera_height = camera_height;
    traj.center_index = static_cast<std::size_t>((frames - 1) / 2);  // == half - 1
    for (int i = 0; i < half; ++i) traj.frames.push_back({locations[i], heading, false});
    for (int i = half - 1; i >= 0; --i) traj.frames.push_back({locations[i], heading, true});
    traj.validate();
    return traj;
}

// ---------------------------------------------------------------------------
// PointCloud / PointPixelMap

void PointCloud::validate() const {
    std::size_t n = positions.size();
    if (sky.size() != n) throw ValidationError("point cloud sky flags must match point count");
    if (!semantics.empty() && semantics.size() != n) {
        throw ValidationError("point cloud semantics channel size mismatch");
    }
    if (!rgb.empty() && rgb.size() != n) {
        throw ValidationError("point cloud rgb channel size mismatch");
    }
    if (feature_dim < 0) throw ValidationError("negative feature dimension");
    if (feature_dim > 0 && features.size() != n * static_cast<std::size_t>(feature_dim)) {
        throw ValidationError("point cloud feature channel size mismatch");
    }
    if (feature_dim == 0 && !features.empty()) {
        throw ValidationError("point cloud features present but feature_dim is 0");
    }
}

void PointPixelMap::validate_complete(std::size_t point_count) const {
    for (std::size_t i = 0; i < indices.size(); ++i) {
        std::uint32_t v = indices[i];
        if (v == 0 || v > point_count) {
            throw ValidationError("point-pixel map entry " + std::to_string(i) + " = " +
                                  std::to_string(v) + " outside [1, " +
                                  std::to_string(point_count) + "]");
        }
    }
}

// ---------------------------------------------------------------------------
// Conventions

WorldConventions world_conventions() {
    return WorldConventions{
        1,
        "x = east, y = north, z = up",
        "height-field row 0 is the northernmost row",
        "heading 0 faces +y (north); positive heading turns clockwise (toward +x)",
        "psi(q) = 2*pi*(q+0.5)/W - pi, measured clockwise from the heading direction",
        "theta(p) = pi/2 - pi*(p+0.5)/H",
        "camera optical center at (x, y, camera_height)",
    };
}

Vec3d ray_from_angles(double heading, double psi, double theta) {
    double a = heading + psi;  // absolute compass azimuth
    double horiz = std::cos(theta);
    return {horiz * std::sin(a), horiz * std::cos(a), std::sin(theta)};
}

}  // namespace crossview
