#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "crossview/config.hpp"

using namespace crossview;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("cvx_config_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string write_file(const TempDir& dir, const std::string& name, const std::string& text) {
    std::string path = dir.file(name);
    std::ofstream out(path, std::ios::binary);
    out << text;
    return path;
}

}  // namespace

TEST_CASE("defaults carry the pipeline constants") {
    PipelineConfig cfg;
    CHECK(cfg.trajectory.range_m == 7.0);
    CHECK(cfg.trajectory.step_m == 0.5);
    CHECK(cfg.trajectory.frames == 15);
    CHECK_FALSE(cfg.trajectory.uturn);
    CHECK_FALSE(cfg.trajectory.has_center);
    CHECK(cfg.render.height == 256);
    CHECK(cfg.render.width == 512);
    CHECK(cfg.render.epsilon == 0.005);
    CHECK(cfg.render.sky_radius == 200.0);
    CHECK(cfg.render.camera_height == 3.0);
    CHECK(cfg.scene.cell_size == 0.25);
    CHECK(cfg.voxel.horizontal == 0.25);
    CHECK(cfg.voxel.vertical == 0.25);
    CHECK(cfg.voxel.max_height == 30.0);
    CHECK(cfg.voxel.feature_size == 0.03125);
    CHECK(cfg.knn_k == 32);
    CHECK(cfg.seed == 0);
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("JSON round trip preserves every field") {
    PipelineConfig cfg;
    cfg.scene.height_path = "h.pfm";
    cfg.scene.semantics_path = "s.png";
    cfg.scene.registry_path = "classes.json";
    cfg.scene.satellite_path = "sat.png";
    cfg.scene.cell_size = 0.5;
    cfg.scene.origin = {-3.25, 12.0};
    cfg.trajectory.range_m = 2.0;
    cfg.trajectory.step_m = 0.25;
    cfg.trajectory.frames = 9;
    cfg.trajectory.heading = 1.25;
    cfg.trajectory.has_center = true;
    cfg.trajectory.center = {1.5, -2.0};
    cfg.render.height = 64;
    cfg.render.width = 128;
    cfg.render.epsilon = 0.01;
    cfg.render.sky_radius = 80.0;
    cfg.render.camera_height = 2.0;
    cfg.voxel.horizontal = 0.5;
    cfg.voxel.vertical = 0.2;
    cfg.voxel.max_height = 12.0;
    cfg.voxel.feature_size = 0.0625;
    cfg.knn_k = 9;
    cfg.seed = (1ull << 63) + 5;  // must survive as an unsigned 64-bit value

    PipelineConfig back = PipelineConfig::from_json_text(cfg.to_json_text());
    CHECK(back == cfg);

    // Defaults round-trip too, including the null trajectory center.
    PipelineConfig defaults;
    CHECK(PipelineConfig::from_json_text(defaults.to_json_text()) == defaults);
    CHECK(defaults.to_json_text().find("\"center\": null") != std::string::npos);
}

TEST_CASE("u-turn paths round trip and validate on even frame counts") {
    PipelineConfig cfg;
    cfg.trajectory.uturn = true;
    cfg.trajectory.frames = 6;
    CHECK_NOTHROW(cfg.validate());
    CHECK(PipelineConfig::from_json_text(cfg.to_json_text()) == cfg);

    cfg.trajectory.frames = 7;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("resolve precedence: overrides beat the file, the file beats defaults") {
    TempDir dir;
    std::string path = write_file(dir, "config.json", R"({
        "trajectory": {"frames": 5, "range_m": 2.0},
        "render": {"height": 64, "width": 128}
    })");

    PipelineConfig from_file = resolve_config(path, {});
    CHECK(from_file.trajectory.frames == 5);
    CHECK(from_file.trajectory.range_m == 2.0);
    CHECK(from_file.trajectory.step_m == 0.5);  // untouched default
    CHECK(from_file.render.height == 64);
    CHECK(from_file.render.width == 128);
    CHECK(from_file.render.epsilon == 0.005);

    PipelineConfig with_sets = resolve_config(
        path, {"trajectory.frames=9", "trajectory.range_m=4", "trajectory.uturn=false",
               "scene.height=h.pfm", "scene.semantics=\"s.png\"", "seed=11"});
    CHECK(with_sets.trajectory.frames == 9);
    CHECK(with_sets.trajectory.range_m == 4.0);
    CHECK(with_sets.scene.height_path == "h.pfm");    // bare value read as a string
    CHECK(with_sets.scene.semantics_path == "s.png"); // quoted value unwraps
    CHECK(with_sets.seed == 11);
    CHECK(with_sets.render.height == 64);  // file value still wins over the default
}

TEST_CASE("resolving without a file yields the defaults") {
    CHECK(resolve_config("", {}) == PipelineConfig{});
}

TEST_CASE("bad documents and overrides are rejected") {
    TempDir dir;

    CHECK_THROWS_AS(resolve_config(dir.file("missing.json"), {}), IoError);

    std::string unknown = write_file(dir, "unknown.json", R"({"renderr": {"height": 4}})");
    CHECK_THROWS_WITH_AS(resolve_config(unknown, {}),
                         doctest::Contains("unknown key"), ValidationError);

    std::string nested = write_file(dir, "nested.json", R"({"render": {"heigth": 4}})");
    CHECK_THROWS_WITH_AS(resolve_config(nested, {}),
                         doctest::Contains("render.heigth"), ValidationError);

    std::string syntax = write_file(dir, "syntax.json", "{\"render\": ");
    CHECK_THROWS_AS(resolve_config(syntax, {}), ValidationError);

    CHECK_THROWS_WITH_AS(resolve_config("", {"trajectory.frames"}),
                         doctest::Contains("="), ValidationError);
    CHECK_THROWS_WITH_AS(resolve_config("", {"trajectory.frmaes=3"}),
                         doctest::Contains("unknown key"), ValidationError);
}

TEST_CASE("validation enforces the published frame-count relations") {
    // Straight path: frames must equal range/step + 1.
    CHECK_THROWS_WITH_AS(resolve_config("", {"trajectory.frames=9"}),
                         doctest::Contains("range_m/step_m"), ValidationError);
    CHECK_NOTHROW(resolve_config("", {"trajectory.frames=9", "trajectory.range_m=4"}));

    // U-turn: an even number of frames, no range constraint.
    CHECK_NOTHROW(resolve_config("", {"trajectory.uturn=true", "trajectory.frames=16"}));
    CHECK_THROWS_AS(resolve_config("", {"trajectory.uturn=true", "trajectory.frames=15"}),
                    ValidationError);

    // Panorama width must be even so half-turn column shifts stay exact.
    CHECK_THROWS_WITH_AS(resolve_config("", {"render.width=511"}), doctest::Contains("even"),
                         ValidationError);
    CHECK_THROWS_AS(resolve_config("", {"render.height=0"}), ValidationError);
    CHECK_THROWS_AS(resolve_config("", {"render.epsilon=0"}), ValidationError);
    CHECK_THROWS_AS(resolve_config("", {"trajectory.step_m=-0.5"}), ValidationError);
    CHECK_THROWS_AS(resolve_config("", {"voxel.feature_size=0"}), ValidationError);
    CHECK_THROWS_AS(resolve_config("", {"knn.k=0"}), ValidationError);
}

TEST_CASE("explicit trajectory centers parse from and serialize to JSON") {
    PipelineConfig with_center =
        PipelineConfig::from_json_text(R"({"trajectory": {"center": [1.5, -2.0]}})");
    CHECK(with_center.trajectory.has_center);
    CHECK(with_center.trajectory.center.x == 1.5);
    CHECK(with_center.trajectory.center.y == -2.0);

    PipelineConfig null_center =
        PipelineConfig::from_json_text(R"({"trajectory": {"center": null}})");
    CHECK_FALSE(null_center.trajectory.has_center);

    CHECK(with_center.to_json_text().find("[\n      1.5,\n      -2.0\n    ]") !=
          std::string::npos);
}
