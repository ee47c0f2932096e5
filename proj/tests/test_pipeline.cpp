#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "crossview/config.hpp"
#include "crossview/extraction.hpp"
#include "crossview/io/formats.hpp"
#include "crossview/metrics.hpp"
#include "crossview/pipeline.hpp"
#include "crossview/stylize.hpp"

using namespace crossview;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() / ("cvx_pipeline_test_" + std::to_string(::getpid()) +
                                            "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

/// One generated scene shared by the whole binary; regenerating it per case
/// would only re-test cmd_sample_scene's determinism.
struct SceneFixture {
    TempDir dir;
    std::string root;
    std::string report;

    SceneFixture() : root(dir.file("scene")) {
        report = pipeline::cmd_sample_scene(root, 0);
    }
    std::string config_path() const { return (fs::path(root) / "config.json").string(); }
    std::string center_dir() const { return (fs::path(root) / "center").string(); }
};

SceneFixture& scene() {
    static SceneFixture fixture;
    return fixture;
}

/// The bundled scene config shrunk to a quick 3-frame, 32x64 run.
PipelineConfig small_cfg() {
    PipelineConfig cfg = resolve_config(scene().config_path(), {});
    cfg.render.height = 32;
    cfg.render.width = 64;
    cfg.trajectory.frames = 3;
    cfg.trajectory.range_m = 1.0;
    cfg.validate();
    return cfg;
}

std::string sha(const std::string& path) { return io::sha256_file(path); }

}  // namespace

TEST_CASE("sample scenes are deterministic per seed") {
    TempDir dir;
    std::string again = dir.file("again");
    std::string other = dir.file("other");
    pipeline::cmd_sample_scene(again, 0);
    pipeline::cmd_sample_scene(other, 1);

    for (const char* name : {"height.pfm", "semantics.png", "satellite.png", "center/depth.pfm",
                             "center/semantics.png", "center/rgb.png"}) {
        CHECK(sha((fs::path(scene().root) / name).string()) ==
              sha((fs::path(again) / name).string()));
    }
    CHECK(sha((fs::path(scene().root) / "satellite.png").string()) !=
          sha((fs::path(other) / "satellite.png").string()));

    // The emitted configs differ only in their embedded paths.
    PipelineConfig a = resolve_config(scene().config_path(), {});
    PipelineConfig b = resolve_config((fs::path(again) / "config.json").string(), {});
    a.scene = b.scene = PipelineConfig::Scene{};
    CHECK(a == b);

    // Every recorded output hash matches the file on disk.
    json rep = json::parse(scene().report);
    CHECK(rep.at("command") == "sample-scene");
    for (const json& out : rep.at("outputs")) {
        CHECK(sha(out.at("path").get<std::string>()) == out.at("sha256").get<std::string>());
    }
}

TEST_CASE("the sample scene loads and centers the default trajectory on a road") {
    PipelineConfig cfg = small_cfg();
    pipeline::LoadedScene loaded = pipeline::load_scene(cfg);
    CHECK(loaded.field.height() == 144);
    CHECK(loaded.field.width() == 144);

    Vec2d center = loaded.field.footprint_center();
    CHECK(center.x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(center.y == doctest::Approx(0.0).epsilon(1e-12));

    auto cell = loaded.field.cell_at(center.x, center.y);
    REQUIRE(cell.has_value());
    CHECK(loaded.field.semantic(cell->first, cell->second) == *loaded.registry.find("road"));

    Trajectory traj = pipeline::make_trajectory(cfg, loaded.field);
    REQUIRE(traj.size() == 3);
    CHECK(traj.center_index == 1);
    CHECK(traj.frames[1].location.x == center.x);
    CHECK(traj.frames[1].location.y == center.y);
}

TEST_CASE("voxelize writes a grid whose report matches the file") {
    TempDir dir;
    PipelineConfig cfg = small_cfg();
    std::string path = dir.file("grid.cvgx");
    json rep = json::parse(pipeline::cmd_voxelize(cfg, path, 0));

    VoxelGrid grid = io::read_grid(path);
    CHECK(rep.at("grid").at("dims") == json({grid.nx(), grid.ny(), grid.nz()}));
    CHECK(rep.at("grid").at("occupied") == grid.occupied_count());
    CHECK(rep.at("outputs").size() == 1);
    CHECK(rep.at("outputs")[0].at("sha256") == sha(path));
    CHECK(rep.at("config").at("render").at("height") == 32);

    PipelineConfig broken = cfg;
    broken.scene.height_path = dir.file("missing.pfm");
    CHECK_THROWS_AS(pipeline::cmd_voxelize(broken, dir.file("g2.cvgx"), 0), IoError);
}

TEST_CASE("extract writes a complete mapping and does not depend on threads") {
    TempDir dir;
    PipelineConfig cfg = small_cfg();
    json rep = json::parse(pipeline::cmd_extract(cfg, dir.file("one"), 1));
    pipeline::cmd_extract(cfg, dir.file("many"), 3);

    for (const char* name : {"points.ply", "map.cvpm"}) {
        CHECK(sha(dir.file(std::string("one/") + name)) ==
              sha(dir.file(std::string("many/") + name)));
    }

    PointPixelMap map = io::read_map(dir.file("one/map.cvpm"));
    PointCloud cloud = io::read_ply(dir.file("one/points.ply"));
    CHECK(map.frames == 3);
    CHECK(map.height == 32);
    CHECK(map.width == 64);
    CHECK_NOTHROW(map.validate_complete(cloud.size()));

    // Center-out processing: the center frame starts the cloud.
    CHECK(rep.at("frame_stats").size() == 3);
    CHECK(rep.at("frame_stats")[1].at("points_before") == 0);
    CHECK(rep.at("frame_stats")[1].at("new_points") == 32 * 64);
    CHECK(rep.at("points") == cloud.size());
}

TEST_CASE("render regathers the extraction exactly and reruns byte-identically") {
    TempDir dir;
    PipelineConfig cfg = small_cfg();
    pipeline::cmd_extract(cfg, dir.file("ext"), 0);
    json rep = json::parse(pipeline::cmd_render(cfg, dir.file("ext"), dir.file("a"), 0));
    pipeline::cmd_render(cfg, dir.file("ext"), dir.file("b"), 0);

    CHECK(rep.at("frames") == 3);
    for (int t = 0; t < 3; ++t) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%04d", t);
        for (const char* kind : {"rgb", "semantics"}) {
            std::string rel = std::string(kind) + "/" + name + ".png";
            CHECK(sha(dir.file("a/" + rel)) == sha(dir.file("b/" + rel)));
        }
        std::string rel = std::string("depth/") + name + ".pfm";
        CHECK(sha(dir.file("a/" + rel)) == sha(dir.file("b/" + rel)));
    }

    // The written frames are the pure gather of the per-point channels.
    PointCloud cloud = io::read_ply(dir.file("ext/points.ply"));
    PointPixelMap map = io::read_map(dir.file("ext/map.cvpm"));
    pipeline::LoadedScene loaded = pipeline::load_scene(cfg);
    std::vector<Rgb8> colors = stylize_points(cloud, loaded.registry, cfg.seed);
    RgbImage expected_rgb = render_channel(map, colors)[0];
    CHECK(io::read_png_rgb(dir.file("a/rgb/frame_0000.png")) == expected_rgb);

    ClassImage expected_sem = render_channel(map, cloud.semantics)[0];
    CHECK(io::read_png_palette(dir.file("a/semantics/frame_0000.png")).classes == expected_sem);
}

TEST_CASE("ground-truth video reproduces the captured center frame bit for bit") {
    TempDir dir;
    PipelineConfig cfg = resolve_config(scene().config_path(), {});
    cfg.trajectory.frames = 3;
    cfg.trajectory.range_m = 1.0;
    cfg.validate();

    json rep = json::parse(pipeline::cmd_gt_video(cfg, scene().center_dir(), dir.file("gtv"), 0));
    CHECK(rep.at("frames") == 3);
    CHECK(rep.at("points") >= 512 * 256);

    // Frame 1 is the center frame; its pixels map one-to-one onto the
    // captured rasters and seed values pass through the colorizer unchanged.
    CHECK(sha(dir.file("gtv/rgb/frame_0001.png")) ==
          sha((fs::path(scene().center_dir()) / "rgb.png").string()));
    CHECK(sha(dir.file("gtv/semantics/frame_0001.png")) ==
          sha((fs::path(scene().center_dir()) / "semantics.png").string()));
}

TEST_CASE("warp marks exactly the non-sky pixels valid") {
    TempDir dir;
    PipelineConfig cfg = small_cfg();
    pipeline::cmd_extract(cfg, dir.file("ext"), 0);
    json rep = json::parse(pipeline::cmd_warp(cfg, dir.file("ext"), dir.file("w"), 0));
    CHECK(rep.at("frames") == 3);

    PointCloud cloud = io::read_ply(dir.file("ext/points.ply"));
    PointPixelMap map = io::read_map(dir.file("ext/map.cvpm"));
    for (int t = 0; t < 3; ++t) {
        char name[48];
        std::snprintf(name, sizeof(name), "w/validity/frame_%04d.png", t);
        MaskImage mask = io::read_png_mask(dir.file(name));
        for (int p = 0; p < 32; ++p)
            for (int q = 0; q < 64; ++q) {
                std::uint32_t idx = map.at(t, p, q);
                CHECK(mask.at(p, q) == (cloud.sky[idx - 1] ? 0 : 1));
            }
    }

    PipelineConfig no_sat = cfg;
    no_sat.scene.satellite_path.clear();
    CHECK_THROWS_AS(pipeline::cmd_warp(no_sat, dir.file("ext"), dir.file("w2"), 0),
                    ValidationError);
}

TEST_CASE("metrics command scores identical directories at the caps") {
    TempDir dir;
    PipelineConfig cfg = small_cfg();
    pipeline::cmd_extract(cfg, dir.file("ext"), 0);
    pipeline::cmd_render(cfg, dir.file("ext"), dir.file("ren"), 0);

    std::string report_path = dir.file("report.json");
    std::string text =
        pipeline::cmd_metrics(dir.file("ren/rgb"), dir.file("ren/rgb"), "", report_path);
    json rep = json::parse(text);
    CHECK(rep.at("frames") ==
          json({"frame_0000.png", "frame_0001.png", "frame_0002.png"}));
    const json& mean = rep.at("report").at("mean");
    CHECK(mean.at("mse") == 0.0);
    CHECK(mean.at("psnr") == 100.0);
    CHECK(mean.at("ssim") == 1.0);
    CHECK(mean.at("sharp_diff") == 100.0);

    std::ifstream in(report_path, std::ios::binary);
    std::string file_text((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
    CHECK(file_text == text);

    // All-ones weight masks change nothing.
    fs::create_directories(dir.file("weights"));
    for (int t = 0; t < 3; ++t) {
        char name[48];
        std::snprintf(name, sizeof(name), "weights/frame_%04d.png", t);
        io::write_png_mask(dir.file(name), MaskImage(32, 64, 1));
    }
    json weighted = json::parse(
        pipeline::cmd_metrics(dir.file("ren/rgb"), dir.file("ren/rgb"), dir.file("weights"), ""));
    CHECK(weighted.at("report") == rep.at("report"));

    // Frame-count mismatches are caught before any comparison.
    fs::create_directories(dir.file("short"));
    fs::copy_file(dir.file("ren/rgb/frame_0000.png"), dir.file("short/frame_0000.png"));
    CHECK_THROWS_AS(pipeline::cmd_metrics(dir.file("ren/rgb"), dir.file("short"), "", ""),
                    ValidationError);
    CHECK_THROWS_AS(pipeline::cmd_metrics(dir.file("empty"), dir.file("empty"), "", ""), IoError);
}

TEST_CASE("uturn command reports exact self-consistency") {
    TempDir dir;
    PipelineConfig cfg = small_cfg();
    json rep = json::parse(pipeline::cmd_uturn(cfg, dir.file("u"), 4, 0));
    CHECK(rep.at("frames") == 4);
    CHECK(rep.at("pairs") == 2);
    const json& rows = rep.at("report").at("rows");
    REQUIRE(rows.size() == 2);
    for (const json& row : rows) {
        CHECK(row.at("mse") == 0.0);
        CHECK(row.at("psnr") == 100.0);
        CHECK(row.at("ssim") == 1.0);
    }
    CHECK(fs::exists(dir.file("u/rgb/frame_0003.png")));
    CHECK(fs::exists(dir.file("u/report.json")));

    // A u-turn config supplies its own frame count when no override is given.
    PipelineConfig uturn_cfg = cfg;
    uturn_cfg.trajectory.uturn = true;
    uturn_cfg.trajectory.frames = 4;
    uturn_cfg.validate();
    json from_cfg = json::parse(pipeline::cmd_uturn(uturn_cfg, dir.file("u2"), 0, 0));
    CHECK(from_cfg.at("frames") == 4);

    CHECK_THROWS_AS(pipeline::cmd_uturn(cfg, dir.file("u3"), 3, 0), ValidationError);
}
