#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "lpr/error.hpp"
#include "lpr/poses.hpp"
#include "lpr/synth.hpp"
#include "test_helpers.hpp"

using namespace lpr;
using lpr::test::TempDir;

namespace {

WorldParams small_world() {
    WorldParams p;
    p.num_landmarks = 25;
    p.x_min = -15;
    p.x_max = 15;
    p.y_min = -15;
    p.y_max = 15;
    return p;
}

}  // namespace

TEST_CASE("generate_world") {
    SUBCASE("same seed, same world") {
        const WorldModel a = generate_world(99, small_world());
        const WorldModel b = generate_world(99, small_world());
        REQUIRE(a.landmarks.size() == b.landmarks.size());
        for (std::size_t i = 0; i < a.landmarks.size(); ++i) {
            CHECK(a.landmarks[i].x == b.landmarks[i].x);
            CHECK(a.landmarks[i].y == b.landmarks[i].y);
            CHECK(a.landmarks[i].radius == b.landmarks[i].radius);
        }
    }

    SUBCASE("zero landmarks is a valid empty world") {
        WorldParams p = small_world();
        p.num_landmarks = 0;
        CHECK(generate_world(1, p).landmarks.empty());
    }

    SUBCASE("minimum separation holds") {
        const WorldModel w = generate_world(7, small_world());
        for (std::size_t i = 0; i < w.landmarks.size(); ++i) {
            for (std::size_t j = i + 1; j < w.landmarks.size(); ++j) {
                CHECK(std::hypot(w.landmarks[i].x - w.landmarks[j].x,
                                 w.landmarks[i].y - w.landmarks[j].y) >= w.params.min_separation);
            }
        }
    }

    SUBCASE("infeasible packing errors out") {
        WorldParams p = small_world();
        p.num_landmarks = 200;
        p.x_min = -1;
        p.x_max = 1;
        p.y_min = -1;
        p.y_max = 1;
        p.min_separation = 2.0;
        CHECK_THROWS_AS(generate_world(1, p), ConfigError);
    }
}

TEST_CASE("render_scan") {
    const WorldModel world = generate_world(5, small_world());
    SensorModel sensor;
    sensor.max_range = 100.0;

    SUBCASE("same seed renders the same cloud") {
        const PointCloud a = render_scan(world, make_pose(0, 0, 0), sensor, 3);
        const PointCloud b = render_scan(world, make_pose(0, 0, 0), sensor, 3);
        REQUIRE(a.size() == b.size());
        CHECK(a.points[0].x == b.points[0].x);
    }

    SUBCASE("pose change is pure frame algebra with zero noise") {
        const Pose2D pose_a = make_pose(1.0, -2.0, 30.0);
        const Pose2D delta = make_pose(0.5, 0.25, 45.0);
        const Pose2D pose_b = pose_compose(pose_a, delta);
        const PointCloud in_a = render_scan(world, pose_a, sensor, 3);
        const PointCloud in_b = render_scan(world, pose_b, sensor, 3);
        REQUIRE(in_a.size() == in_b.size());
        // in_b = delta^{-1} applied to in_a.
        const PointCloud expected = transform_cloud(in_a, pose_inverse(delta));
        for (std::size_t i = 0; i < in_a.size(); ++i) {
            CHECK(std::abs(in_b.points[i].x - expected.points[i].x) < 1e-9);
            CHECK(std::abs(in_b.points[i].y - expected.points[i].y) < 1e-9);
            CHECK(in_b.points[i].z == expected.points[i].z);
        }
    }

    SUBCASE("dropout thins the cloud by roughly its fraction") {
        const std::size_t full = render_scan(world, make_pose(0, 0, 0), sensor, 11).size();
        SensorModel lossy = sensor;
        lossy.dropout = 0.3;
        const std::size_t thinned = render_scan(world, make_pose(0, 0, 0), lossy, 11).size();
        const double ratio = static_cast<double>(thinned) / static_cast<double>(full);
        CHECK(ratio > 0.65);
        CHECK(ratio < 0.75);
    }

    SUBCASE("points budget caps the scan size") {
        SensorModel tight = sensor;
        tight.points_budget = 500;
        const PointCloud pc = render_scan(world, make_pose(0, 0, 0), tight, 1);
        CHECK(pc.size() <= 500);
    }
}

TEST_CASE("generate_benchmark") {
    SensorModel sensor;
    BenchmarkLayout layout;
    layout.path_length = 10.0;
    layout.num_queries = 6;
    layout.world = small_world();
    layout.world.x_min = -15;
    layout.world.x_max = 25;

    SUBCASE("writes the expected structure and is deterministic") {
        TempDir dir_a("bench_a");
        TempDir dir_b("bench_b");
        const BenchmarkPaths a = generate_benchmark(4, layout, sensor, dir_a.str());
        const BenchmarkPaths b = generate_benchmark(4, layout, sensor, dir_b.str());

        const std::vector<PoseRow> refs = load_poses_csv(a.ref_poses_csv);
        CHECK(refs.size() == 11);  // 0..10 m at 1 m spacing
        const std::vector<PoseRow> queries = load_poses_csv(a.query_poses_csv);
        CHECK(queries.size() == 6);
        for (const PoseRow& row : refs) {
            CHECK(std::filesystem::exists(std::filesystem::path(a.ref_dir) / (row.id + ".bin")));
        }

        CHECK(lpr::test::read_file(a.ref_poses_csv) == lpr::test::read_file(b.ref_poses_csv));
        CHECK(lpr::test::read_file(a.query_poses_csv) == lpr::test::read_file(b.query_poses_csv));
        CHECK(lpr::test::read_file(a.association_csv) == lpr::test::read_file(b.association_csv));
        CHECK(lpr::test::read_file((std::filesystem::path(a.ref_dir) / "ref_00000.bin").string()) ==
              lpr::test::read_file((std::filesystem::path(b.ref_dir) / "ref_00000.bin").string()));
    }

    SUBCASE("every query is near a reference and yaw offsets are on the grid") {
        TempDir dir("bench_c");
        const BenchmarkPaths paths = generate_benchmark(4, layout, sensor, dir.str());
        const std::vector<PoseRow> refs = load_poses_csv(paths.ref_poses_csv);
        for (const PoseRow& q : load_poses_csv(paths.query_poses_csv)) {
            double nearest = 1e9;
            for (const PoseRow& r : refs) {
                nearest = std::min(nearest, std::hypot(q.pose.x - r.pose.x, q.pose.y - r.pose.y));
            }
            CHECK(nearest <= 2.0);
            const double yaw_steps = q.pose.yaw_deg / layout.query_yaw_step_deg;
            CHECK(yaw_steps == doctest::Approx(std::round(yaw_steps)).epsilon(1e-12));
        }
    }
}
