#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "crossview/io/formats.hpp"
#include "support/helpers.hpp"

using namespace crossview;
using namespace crossview::testing;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("cvx_io_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

PointCloud sample_cloud(std::mt19937_64& rng, std::size_t n, bool semantics, bool rgb) {
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    PointCloud cloud;
    for (std::size_t i = 0; i < n; ++i) {
        cloud.positions.push_back({u(rng), u(rng), std::abs(u(rng))});
        cloud.sky.push_back(i % 7 == 0 ? 1 : 0);
        if (semantics) cloud.semantics.push_back(static_cast<ClassId>(rng() % 8));
        if (rgb) {
            cloud.rgb.push_back({static_cast<std::uint8_t>(rng() & 0xff),
                                 static_cast<std::uint8_t>(rng() & 0xff),
                                 static_cast<std::uint8_t>(rng() & 0xff)});
        }
    }
    return cloud;
}

}  // namespace

TEST_CASE("pfm round trip is bitwise for floats") {
    TempDir dir;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<float> u(-1000.0f, 1000.0f);
    Image<float> img(5, 9);
    for (std::size_t i = 0; i < img.size(); ++i) img.data()[i] = u(rng);

    std::string path = dir.file("a.pfm");
    io::write_pfm(path, img);
    Image<float> back = io::read_pfm(path);
    REQUIRE(back.height() == 5);
    REQUIRE(back.width() == 9);
    for (std::size_t i = 0; i < img.size(); ++i) CHECK(back.data()[i] == img.data()[i]);

    // Header is the fixed negative-scale little-endian form.
    std::ifstream in(path, std::ios::binary);
    std::string header(11, '\0');
    in.read(header.data(), 11);
    CHECK(header == "Pf\n9 5\n-1.0");
}

TEST_CASE("depth pfm narrows to f32 at the boundary") {
    TempDir dir;
    DepthImage depth(3, 4);
    for (std::size_t i = 0; i < depth.size(); ++i)
        depth.data()[i] = 1.0 + static_cast<double>(i) / 7.0;
    std::string path = dir.file("d.pfm");
    io::write_pfm_depth(path, depth);
    DepthImage back = io::read_pfm_depth(path);
    REQUIRE(back.same_shape(depth));
    for (std::size_t i = 0; i < depth.size(); ++i)
        CHECK(back.data()[i] == static_cast<double>(static_cast<float>(depth.data()[i])));
}

TEST_CASE("pfm reader rejects garbage") {
    TempDir dir;
    CHECK_THROWS_AS(io::read_pfm(dir.file("missing.pfm")), IoError);
    std::string bad = dir.file("bad.pfm");
    std::ofstream(bad, std::ios::binary) << "PF\n2 2\n-1.0\n";
    CHECK_THROWS_AS(io::read_pfm(bad), IoError);  // color PFM unsupported
}

TEST_CASE("png rgb round trip") {
    TempDir dir;
    std::mt19937_64 rng(2);
    RgbImage img(7, 13);
    for (std::size_t i = 0; i < img.size(); ++i)
        img.data()[i] = {static_cast<std::uint8_t>(rng() & 0xff),
                         static_cast<std::uint8_t>(rng() & 0xff),
                         static_cast<std::uint8_t>(rng() & 0xff)};
    std::string path = dir.file("img.png");
    io::write_png_rgb(path, img);
    RgbImage back = io::read_png_rgb(path);
    REQUIRE(back.same_shape(img));
    for (std::size_t i = 0; i < img.size(); ++i) CHECK(back.data()[i] == img.data()[i]);
}

TEST_CASE("palette png carries ids and colors") {
    TempDir dir;
    ClassRegistry reg = ClassRegistry::builtin();
    std::vector<Rgb8> palette = reg.palette();
    ClassImage classes(6, 8);
    for (std::size_t i = 0; i < classes.size(); ++i)
        classes.data()[i] = static_cast<ClassId>(i % palette.size());

    std::string path = dir.file("sem.png");
    io::write_png_palette(path, classes, palette);
    io::PalettePng back = io::read_png_palette(path);
    REQUIRE(back.classes.same_shape(classes));
    for (std::size_t i = 0; i < classes.size(); ++i)
        CHECK(back.classes.data()[i] == classes.data()[i]);
    REQUIRE(back.palette.size() == palette.size());
    for (std::size_t i = 0; i < palette.size(); ++i) CHECK(back.palette[i] == palette[i]);

    ClassImage outside(2, 2, static_cast<ClassId>(palette.size()));
    CHECK_THROWS_AS(io::write_png_palette(dir.file("x.png"), outside, palette), ValidationError);
}

TEST_CASE("mask png is 1-bit and validates values") {
    TempDir dir;
    MaskImage mask(9, 17);
    std::mt19937_64 rng(3);
    for (std::size_t i = 0; i < mask.size(); ++i) mask.data()[i] = rng() & 1;
    std::string path = dir.file("mask.png");
    io::write_png_mask(path, mask);
    MaskImage back = io::read_png_mask(path);
    REQUIRE(back.same_shape(mask));
    for (std::size_t i = 0; i < mask.size(); ++i) CHECK(back.data()[i] == mask.data()[i]);

    MaskImage bad(2, 2, 2);
    CHECK_THROWS_AS(io::write_png_mask(dir.file("bad.png"), bad), ValidationError);
}

TEST_CASE("ply round trip preserves every channel bitwise") {
    TempDir dir;
    std::mt19937_64 rng(4);

    for (bool semantics : {true, false}) {
        for (bool rgb : {true, false}) {
            PointCloud cloud = sample_cloud(rng, 123, semantics, rgb);
            std::string path = dir.file("c.ply");
            io::write_ply(path, cloud);
            PointCloud back = io::read_ply(path);
            REQUIRE(back.size() == cloud.size());
            for (std::size_t i = 0; i < cloud.size(); ++i) {
                CHECK(back.positions[i].x == cloud.positions[i].x);
                CHECK(back.positions[i].y == cloud.positions[i].y);
                CHECK(back.positions[i].z == cloud.positions[i].z);
                CHECK(back.sky[i] == cloud.sky[i]);
            }
            CHECK(back.semantics.size() == cloud.semantics.size());
            CHECK(back.rgb.size() == cloud.rgb.size());
            for (std::size_t i = 0; i < cloud.semantics.size(); ++i)
                CHECK(back.semantics[i] == cloud.semantics[i]);
            for (std::size_t i = 0; i < cloud.rgb.size(); ++i) CHECK(back.rgb[i] == cloud.rgb[i]);
        }
    }
}

TEST_CASE("grid file round trip") {
    TempDir dir;
    std::mt19937_64 rng(5);
    VoxelGrid grid = random_grid(rng, 12, 0.25, 0.1, 6, {-1.5, 2.25, 0.0});
    std::string path = dir.file("g.cvgx");
    io::write_grid(path, grid);
    VoxelGrid back = io::read_grid(path);
    REQUIRE(back.nx() == grid.nx());
    REQUIRE(back.ny() == grid.ny());
    REQUIRE(back.nz() == grid.nz());
    CHECK(back.horizontal_size() == grid.horizontal_size());
    CHECK(back.vertical_size() == grid.vertical_size());
    CHECK(back.origin().x == grid.origin().x);
    CHECK(back.origin().y == grid.origin().y);
    CHECK(back.origin().z == grid.origin().z);
    CHECK(back.occupied_count() == grid.occupied_count());
    for (int x = 0; x < grid.nx(); ++x)
        for (int y = 0; y < grid.ny(); ++y)
            for (int z = 0; z < grid.nz(); ++z) {
                CHECK(back.occupied(x, y, z) == grid.occupied(x, y, z));
                if (grid.occupied(x, y, z)) CHECK(back.at(x, y, z) == grid.at(x, y, z));
            }

    VoxelGrid aniso(4, 4, 4, 0.5, 0.25, {0, 0, 0});
    aniso.set(0, 0, 0, 1);
    CHECK_THROWS_AS(io::write_grid(dir.file("a.cvgx"), aniso), ValidationError);

    std::string junk = dir.file("junk.cvgx");
    std::ofstream(junk, std::ios::binary) << "NOPE";
    CHECK_THROWS_AS(io::read_grid(junk), IoError);
}

TEST_CASE("map file round trip") {
    TempDir dir;
    PointPixelMap map;
    map.frames = 3;
    map.height = 4;
    map.width = 5;
    map.indices.resize(3 * 4 * 5);
    for (std::size_t i = 0; i < map.indices.size(); ++i)
        map.indices[i] = static_cast<std::uint32_t>(i % 17 + 1);

    std::string path = dir.file("m.cvpm");
    io::write_map(path, map);
    PointPixelMap back = io::read_map(path);
    REQUIRE(back.frames == map.frames);
    REQUIRE(back.height == map.height);
    REQUIRE(back.width == map.width);
    CHECK(back.indices == map.indices);
}

TEST_CASE("sha256 matches the published test vector") {
    CHECK(io::sha256_hex("abc", 3) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(io::sha256_hex("", 0) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");

    TempDir dir;
    std::string path = dir.file("blob.bin");
    std::string payload(100000, '\0');
    std::mt19937_64 rng(6);
    for (auto& c : payload) c = static_cast<char>(rng() & 0xff);
    std::ofstream(path, std::ios::binary).write(payload.data(), payload.size());
    CHECK(io::sha256_file(path) == io::sha256_hex(payload.data(), payload.size()));
    CHECK_THROWS_AS(io::sha256_file(dir.file("missing")), IoError);
}
