#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "crossview/error.hpp"
#include "crossview/voxelizer.hpp"
#include "support/helpers.hpp"

using namespace crossview;
using namespace crossview::testing;

namespace {

SemanticHeightField make_field(const std::vector<std::vector<float>>& elev,
                               const std::vector<std::vector<ClassId>>& sem, double cell_size,
                               const ClassRegistry& reg) {
    int rows = static_cast<int>(elev.size());
    int cols = static_cast<int>(elev[0].size());
    Image<float> e(rows, cols);
    ClassImage s(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            e.at(r, c) = elev[r][c];
            s.at(r, c) = sem[r][c];
        }
    return SemanticHeightField(std::move(e), std::move(s), cell_size, {0.0, 0.0}, reg);
}

}  // namespace

TEST_CASE("flat field extrudes to a single labeled ground layer") {
    ClassRegistry reg = ClassRegistry::builtin();
    auto field = make_field({{0, 0}, {0, 0}}, {{0, 1}, {4, 5}}, 0.5, reg);
    VoxelGrid grid = build_occupancy(field, 0.25, 0.25, 2.0);
    CHECK(grid.nx() == 4);
    CHECK(grid.ny() == 4);
    // Every column: exactly the ground voxel.
    CHECK(grid.occupied_count() == 16);
    for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 4; ++y) {
            CHECK(grid.occupied(x, y, 0));
            for (int z = 1; z < grid.nz(); ++z) CHECK_FALSE(grid.occupied(x, y, z));
        }
    // Classes land in the right quadrant: row 0 is north (high y).
    CHECK(grid.at(0, 3, 0) == 0);   // NW cell
    CHECK(grid.at(3, 3, 0) == 1);   // NE cell
    CHECK(grid.at(0, 0, 0) == 4);   // SW cell
    CHECK(grid.at(3, 0, 0) == 5);   // SE cell
}

TEST_CASE("elevation 2.0 at 0.25 vertical voxels gives 8 voxels above ground") {
    ClassRegistry reg = ClassRegistry::builtin();
    auto field = make_field({{2.0f}}, {{2}}, 0.25, reg);
    VoxelGrid grid = build_occupancy(field, 0.25, 0.25, 2.0);
    CHECK(grid.occupied_count() == 9);  // ground + 8
    CHECK(grid.nz() == 9);
    for (int z = 0; z <= 8; ++z) CHECK(grid.at(0, 0, z) == 2);
}

TEST_CASE("occupied count matches the per-cell summation oracle") {
    ClassRegistry reg = ClassRegistry::builtin();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<float> h(0.0f, 6.0f);
    for (int trial = 0; trial < 5; ++trial) {
        int rows = 3 + trial, cols = 4;
        Image<float> elev(rows, cols);
        ClassImage sem(rows, cols, 0);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) elev.at(r, c) = h(rng);
        SemanticHeightField field(elev, sem, 0.5, {0.0, 0.0}, reg);
        double vv = 0.25, hv = 0.25;
        VoxelGrid grid = build_occupancy(field, vv, hv, 6.0);

        std::size_t expect = 0;
        std::size_t per_cell = 4;  // (0.5 / 0.25)^2
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) {
                expect += per_cell * (1 + static_cast<std::size_t>(
                                              std::ceil(elev.at(r, c) / vv)));
            }
        CHECK(grid.occupied_count() == expect);
    }
}

TEST_CASE("build_occupancy is monotone in elevation") {
    ClassRegistry reg = ClassRegistry::builtin();
    auto low = make_field({{1.0f, 0.5f}}, {{0, 1}}, 0.5, reg);
    auto high = make_field({{1.5f, 0.5f}}, {{0, 1}}, 0.5, reg);
    VoxelGrid a = build_occupancy(low, 0.25, 0.5, 4.0);
    VoxelGrid b = build_occupancy(high, 0.25, 0.5, 4.0);
    a.for_each_occupied([&](int x, int y, int z, ClassId) { CHECK(b.occupied(x, y, z)); });
}

TEST_CASE("build_occupancy input validation") {
    ClassRegistry reg = ClassRegistry::builtin();
    auto field = make_field({{3.0f}}, {{0}}, 0.5, reg);
    CHECK_THROWS_AS(build_occupancy(field, 0.25, 0.75, 6.0), ValidationError);  // hv > cell
    CHECK_THROWS_AS(build_occupancy(field, 0.25, 0.3, 6.0), ValidationError);   // not a divisor
    CHECK_THROWS_WITH_AS(build_occupancy(field, 0.25, 0.5, 2.0),
                         doctest::Contains("elevation exceeds"), ValidationError);
}

TEST_CASE("feature averaging within a voxel") {
    PointCloud cloud;
    cloud.positions = {{0.01, 0.01, 0.01}, {0.04, 0.04, 0.04}, {1.0, 1.0, 1.0}};
    cloud.sky = {0, 0, 0};
    cloud.feature_dim = 1;
    cloud.features = {1.0, 3.0, 9.0};
    FeatureVoxelization vox = voxelize_features(cloud, 0.03125);

    REQUIRE(vox.voxel_count() == 3);  // first two points share no voxel at 3.125 cm
    CHECK(vox.features[0] == 1.0);

    FeatureVoxelization coarse = voxelize_features(cloud, 0.5);
    REQUIRE(coarse.voxel_count() == 2);
    CHECK(coarse.features[0] == 2.0);  // mean of 1 and 3
    CHECK(coarse.features[1] == 9.0);
    CHECK(coarse.point_voxel[0] == 0);
    CHECK(coarse.point_voxel[1] == 0);
    CHECK(coarse.point_voxel[2] == 1);
}

TEST_CASE("voxel means match a brute-force group-by oracle") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> coord(-2.0, 2.0);
    std::uniform_real_distribution<double> val(0.0, 1.0);
    PointCloud cloud;
    cloud.feature_dim = 3;
    for (int i = 0; i < 1000; ++i) {
        cloud.positions.push_back({coord(rng), coord(rng), std::abs(coord(rng))});
        cloud.sky.push_back(0);
        for (int d = 0; d < 3; ++d) cloud.features.push_back(val(rng));
    }
    double vs = 0.25;
    FeatureVoxelization vox = voxelize_features(cloud, vs);

    std::map<std::tuple<std::int64_t, std::int64_t, std::int64_t>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        auto k = std::make_tuple(static_cast<std::int64_t>(std::floor(cloud.positions[i].x / vs)),
                                 static_cast<std::int64_t>(std::floor(cloud.positions[i].y / vs)),
                                 static_cast<std::int64_t>(std::floor(cloud.positions[i].z / vs)));
        groups[k].push_back(i);
    }
    CHECK(groups.size() == vox.voxel_count());
    for (const auto& [key, members] : groups) {
        VoxelKey vk{std::get<0>(key), std::get<1>(key), std::get<2>(key)};
        auto it = vox.index.find(vk);
        REQUIRE(it != vox.index.end());
        for (int d = 0; d < 3; ++d) {
            double naive = 0.0;
            for (std::size_t i : members) naive += cloud.features[i * 3 + d];
            naive /= static_cast<double>(members.size());
            CHECK(std::abs(vox.features[it->second * 3 + d] - naive) <= 1e-12);
        }
    }

    // Devoxelized features are constant within each group ...
    std::vector<double> devox = devoxelize(vox, cloud);
    for (const auto& [key, members] : groups) {
        for (std::size_t i : members)
            for (int d = 0; d < 3; ++d)
                CHECK(devox[i * 3 + d] == devox[members[0] * 3 + d]);
    }

    // ... and voxelizing them again reproduces the voxel table exactly.
    PointCloud again = cloud;
    again.features = devox;
    FeatureVoxelization fixed = voxelize_features(again, vs);
    REQUIRE(fixed.voxel_count() == vox.voxel_count());
    for (std::size_t v = 0; v < vox.voxel_count() * 3; ++v) {
        CHECK(fixed.features[v] == vox.features[v]);  // bitwise
    }
}

TEST_CASE("devoxelize rejects points outside the table") {
    PointCloud cloud;
    cloud.positions = {{0.0, 0.0, 0.0}};
    cloud.sky = {0};
    cloud.feature_dim = 1;
    cloud.features = {2.0};
    FeatureVoxelization vox = voxelize_features(cloud, 0.5);

    PointCloud other = cloud;
    other.positions[0] = {5.0, 5.0, 5.0};
    CHECK_THROWS_AS(devoxelize(vox, other), ValidationError);
}

TEST_CASE("empty cloud voxelizes to an empty table") {
    PointCloud cloud;
    cloud.feature_dim = 2;
    FeatureVoxelization vox = voxelize_features(cloud, 0.03125);
    CHECK(vox.voxel_count() == 0);
    CHECK(vox.feature_dim == 2);
}

TEST_CASE("gather_point_semantics: column class, sky flag wins") {
    ClassRegistry reg = ClassRegistry::builtin();
    auto field = make_field({{0.0f, 0.0f}}, {{0, 3}}, 1.0, reg);
    PointCloud cloud;
    cloud.positions = {{0.1, 0.0, 1.0}, {1.2, 0.1, 50.0}, {0.9, -0.2, 2.0}};
    cloud.sky = {0, 1, 0};
    auto sem = gather_point_semantics(cloud, field, reg.sky_id());
    CHECK(sem[0] == 0);             // over the road cell
    CHECK(sem[1] == reg.sky_id());  // flagged sky above a building cell
    CHECK(sem[2] == 3);             // building_right cell

    cloud.positions.push_back({40.0, 0.0, 1.0});
    cloud.sky.push_back(0);
    CHECK_THROWS_AS(gather_point_semantics(cloud, field, reg.sky_id()), ValidationError);

    // Random points against the direct per-point lookup.
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> x(-0.49, 1.49);
    std::uniform_real_distribution<double> y(-0.49, 0.49);
    PointCloud rand_cloud;
    for (int i = 0; i < 1000; ++i) {
        rand_cloud.positions.push_back({x(rng), y(rng), 1.0});
        rand_cloud.sky.push_back(0);
    }
    auto labels = gather_point_semantics(rand_cloud, field, reg.sky_id());
    for (std::size_t i = 0; i < rand_cloud.size(); ++i) {
        auto cell = field.cell_at(rand_cloud.positions[i].x, rand_cloud.positions[i].y);
        REQUIRE(cell.has_value());
        CHECK(labels[i] == field.semantic(cell->first, cell->second));
        CHECK(labels[i] != reg.sky_id());
    }
}
