#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lpr/geometry.hpp"

namespace lpr {

// Vertical cylinder landmark; the point generator samples its lateral
// surface. BEV projection of such worlds loses nothing, which keeps the
// matcher's behavior separable from descriptor expressiveness.
struct Landmark {
    double x = 0.0;
    double y = 0.0;
    double radius = 0.3;
    double height = 4.0;       // z spans [0, height]
    double intensity = 1.0;
    double density = 400.0;    // surface points per square meter
};

struct WorldParams {
    int num_landmarks = 60;
    double x_min = -20.0;
    double x_max = 80.0;
    double y_min = -20.0;
    double y_max = 20.0;
    double min_separation = 1.5;
    double radius_min = 0.15;
    double radius_max = 0.9;
    double height_min = 2.5;
    double height_max = 5.0;
    double density = 400.0;
};

struct WorldModel {
    std::uint64_t seed = 0;
    WorldParams params;
    std::vector<Landmark> landmarks;
};

struct SensorModel {
    double max_range = 40.0;
    double dropout = 0.0;       // fraction of points discarded, in [0, 1)
    double noise_sigma = 0.0;   // per-axis Gaussian, meters
    int points_budget = 40000;  // cap on sampled points per scan

    void validate() const;
};

struct BenchmarkLayout {
    double path_length = 60.0;
    double ref_spacing = 1.0;       // pre-thinning spacing along the path
    int num_queries = 25;
    double query_max_offset = 1.75; // |dx|,|dy| from the path point
    int query_yaw_step_deg = 10;    // query yaw offsets are multiples of this
    WorldParams world;
};

// Uniform landmark placement with a minimum-separation rejection rule.
// Deterministic per seed; throws after bounded retries when infeasible.
WorldModel generate_world(std::uint64_t seed, const WorldParams& params);

// Samples landmark surfaces within sensor range and expresses them in the
// sensor frame. Surface samples depend only on (world, seed), never on the
// pose, so two renders of one world see the same physical points.
PointCloud render_scan(const WorldModel& world, const Pose2D& sensor_pose,
                       const SensorModel& sensor, std::uint64_t seed);

struct BenchmarkPaths {
    std::string ref_dir;
    std::string query_dir;
    std::string ref_poses_csv;
    std::string query_poses_csv;  // ground truth
    std::string association_csv;  // query -> nearest reference
    std::string world_csv;
};

// Writes reference scans along a straight path plus perturbed query scans,
// poses CSVs and a query->nearest-reference association file.
BenchmarkPaths generate_benchmark(std::uint64_t seed, const BenchmarkLayout& layout,
                                  const SensorModel& sensor, const std::string& out_dir);

}  // namespace lpr
