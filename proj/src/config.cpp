#include "crossview/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace crossview {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& what) {
    throw ValidationError("config: " + path + ": " + what);
}

double num(const json& v, const std::string& path) {
    if (!v.is_number()) bad(path, "expected a number");
    return v.get<double>();
}

int integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) bad(path, "expected an integer");
    return v.get<int>();
}

bool boolean(const json& v, const std::string& path) {
    if (!v.is_boolean()) bad(path, "expected true or false");
    return v.get<bool>();
}

std::string text(const json& v, const std::string& path) {
    if (!v.is_string()) bad(path, "expected a string");
    return v.get<std::string>();
}

Vec2d pair2(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        bad(path, "expected [x, y]");
    return {v[0].get<double>(), v[1].get<double>()};
}

void apply_scene(const json& obj, PipelineConfig::Scene& s) {
    for (const auto& [k, v] : obj.items()) {
        if (k == "height") s.height_path = text(v, "scene.height");
        else if (k == "semantics") s.semantics_path = text(v, "scene.semantics");
        else if (k == "registry") s.registry_path = text(v, "scene.registry");
        else if (k == "satellite") s.satellite_path = text(v, "scene.satellite");
        else if (k == "cell_size") s.cell_size = num(v, "scene.cell_size");
        else if (k == "origin") s.origin = pair2(v, "scene.origin");
        else bad("scene." + k, "unknown key");
    }
}

void apply_trajectory(const json& obj, PipelineConfig::Trajectory& t) {
    for (const auto& [k, v] : obj.items()) {
        if (k == "range_m") t.range_m = num(v, "trajectory.range_m");
        else if (k == "step_m") t.step_m = num(v, "trajectory.step_m");
        else if (k == "frames") t.frames = integer(v, "trajectory.frames");
        else if (k == "uturn") t.uturn = boolean(v, "trajectory.uturn");
        else if (k == "heading") t.heading = num(v, "trajectory.heading");
        else if (k == "center") {
            if (v.is_null()) {
                t.has_center = false;
            } else {
                t.center = pair2(v, "trajectory.center");
                t.has_center = true;
            }
        } else bad("trajectory." + k, "unknown key");
    }
}

void apply_render(const json& obj, PipelineConfig::Render& r) {
    for (const auto& [k, v] : obj.items()) {
        if (k == "height") r.height = integer(v, "render.height");
        else if (k == "width") r.width = integer(v, "render.width");
        else if (k == "epsilon") r.epsilon = num(v, "render.epsilon");
        else if (k == "sky_radius") r.sky_radius = num(v, "render.sky_radius");
        else if (k == "camera_height") r.camera_height = num(v, "render.camera_height");
        else bad("render." + k, "unknown key");
    }
}

void apply_voxel(const json& obj, PipelineConfig::Voxel& x) {
    for (const auto& [k, v] : obj.items()) {
        if (k == "horizontal") x.horizontal = num(v, "voxel.horizontal");
        else if (k == "vertical") x.vertical = num(v, "voxel.vertical");
        else if (k == "max_height") x.max_height = num(v, "voxel.max_height");
        else if (k == "feature_size") x.feature_size = num(v, "voxel.feature_size");
        else bad("voxel." + k, "unknown key");
    }
}

void apply_doc(const json& doc, PipelineConfig& cfg) {
    if (!doc.is_object()) throw ValidationError("config: top level must be an object");
    for (const auto& [k, v] : doc.items()) {
        if (k == "scene") apply_scene(v, cfg.scene);
        else if (k == "trajectory") apply_trajectory(v, cfg.trajectory);
        else if (k == "render") apply_render(v, cfg.render);
        else if (k == "voxel") apply_voxel(v, cfg.voxel);
        else if (k == "knn") {
            for (const auto& [kk, vv] : v.items()) {
                if (kk == "k") cfg.knn_k = integer(vv, "knn.k");
                else bad("knn." + kk, "unknown key");
            }
        } else if (k == "seed") {
            if (!v.is_number_unsigned() && !v.is_number_integer()) bad("seed", "expected an integer");
            cfg.seed = v.get<std::uint64_t>();
        } else bad(k, "unknown key");
    }
}

json parse(const std::string& source, const std::string& what) {
    try {
        return json::parse(source);
    } catch (const json::exception& e) {
        throw ValidationError(what + ": " + e.what());
    }
}

// Objects merge key-by-key; anything else replaces.
void deep_merge(json& base, const json& patch) {
    if (!base.is_object() || !patch.is_object()) {
        base = patch;
        return;
    }
    for (const auto& [k, v] : patch.items()) {
        if (base.contains(k)) deep_merge(base[k], v);
        else base[k] = v;
    }
}

}  // namespace

PipelineConfig PipelineConfig::from_json_text(const std::string& source) {
    PipelineConfig cfg;
    apply_doc(parse(source, "config"), cfg);
    cfg.validate();
    return cfg;
}

PipelineConfig PipelineConfig::from_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

std::string PipelineConfig::to_json_text() const {
    json doc;
    doc["scene"] = {{"height", scene.height_path},
                    {"semantics", scene.semantics_path},
                    {"registry", scene.registry_path},
                    {"satellite", scene.satellite_path},
                    {"cell_size", scene.cell_size},
                    {"origin", {scene.origin.x, scene.origin.y}}};
    doc["trajectory"] = {{"range_m", trajectory.range_m},
                         {"step_m", trajectory.step_m},
                         {"frames", trajectory.frames},
                         {"uturn", trajectory.uturn},
                         {"heading", trajectory.heading},
                         {"center", trajectory.has_center
                                        ? json({trajectory.center.x, trajectory.center.y})
                                        : json(nullptr)}};
    doc["render"] = {{"height", render.height},
                     {"width", render.width},
                     {"epsilon", render.epsilon},
                     {"sky_radius", render.sky_radius},
                     {"camera_height", render.camera_height}};
    doc["voxel"] = {{"horizontal", voxel.horizontal},
                    {"vertical", voxel.vertical},
                    {"max_height", voxel.max_height},
                    {"feature_size", voxel.feature_size}};
    doc["knn"] = {{"k", knn_k}};
    doc["seed"] = seed;
    return doc.dump(2) + "\n";
}

void PipelineConfig::validate() const {
    auto positive = [](double v, const char* what) {
        if (!(v > 0.0)) throw ValidationError(std::string("config: ") + what + " must be positive");
    };
    positive(scene.cell_size, "scene.cell_size");
    positive(trajectory.range_m, "trajectory.range_m");
    positive(trajectory.step_m, "trajectory.step_m");
    positive(render.epsilon, "render.epsilon");
    positive(render.sky_radius, "render.sky_radius");
    positive(render.camera_height, "render.camera_height");
    positive(voxel.horizontal, "voxel.horizontal");
    positive(voxel.vertical, "voxel.vertical");
    positive(voxel.max_height, "voxel.max_height");
    positive(voxel.feature_size, "voxel.feature_size");
    if (render.height < 1 || render.width < 2)
        throw ValidationError("config: render raster is too small");
    if (render.width % 2 != 0)
        throw ValidationError("config: render.width must be even (half-turn column shifts)");
    if (knn_k < 1) throw ValidationError("config: knn.k must be at least 1");
    if (trajectory.frames < 1) throw ValidationError("config: trajectory.frames must be positive");

    if (trajectory.uturn) {
        if (trajectory.frames % 2 != 0)
            throw ValidationError("config: u-turn trajectories need an even frame count");
    } else {
        // frames = 2*(range/2)/step + 1: the step count must reproduce the
        // configured range.
        double steps = trajectory.range_m / trajectory.step_m;
        if (std::abs(steps - (trajectory.frames - 1)) > 1e-9) {
            std::ostringstream msg;
            msg << "config: trajectory.frames (" << trajectory.frames
                << ") does not match range_m/step_m + 1 (" << steps + 1.0 << ")";
            throw ValidationError(msg.str());
        }
    }
}

PipelineConfig resolve_config(const std::string& config_path,
                              const std::vector<std::string>& overrides) {
    json doc = parse(PipelineConfig().to_json_text(), "defaults");
    if (!config_path.empty()) {
        std::ifstream in(config_path, std::ios::binary);
        if (!in) throw IoError("cannot open config file: " + config_path);
        std::ostringstream buf;
        buf << in.rdbuf();
        deep_merge(doc, parse(buf.str(), config_path));
    }
    for (const std::string& kv : overrides) {
        std::size_t eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ValidationError("config: override must look like key.path=value: " + kv);
        std::string key = kv.substr(0, eq);
        std::string raw = kv.substr(eq + 1);
        json value;
        try {
            value = json::parse(raw);
        } catch (const json::exception&) {
            value = raw;  // unquoted strings (paths, names)
        }
        json* slot = &doc;
        std::size_t start = 0;
        while (true) {
            std::size_t dot = key.find('.', start);
            std::string part = key.substr(start, dot - start);
            if (part.empty()) throw ValidationError("config: empty key segment in " + kv);
            if (!slot->is_object()) throw ValidationError("config: " + key + " is not settable");
            slot = &(*slot)[part];
            if (dot == std::string::npos) break;
            start = dot + 1;
        }
        *slot = value;
    }
    PipelineConfig cfg;
    apply_doc(doc, cfg);
    cfg.validate();
    return cfg;
}

}  // namespace crossview
