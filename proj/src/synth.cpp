#include "lpr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "lpr/error.hpp"
#include "lpr/poses.hpp"
#include "lpr/rng.hpp"

namespace lpr {

namespace fs = std::filesystem;

void SensorModel::validate() const {
    if (!(max_range > 0.0)) throw ConfigError("sensor range must be positive");
    if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must be in [0, 1)");
    if (noise_sigma < 0.0) throw ConfigError("noise sigma must be >= 0");
    if (points_budget < 1) throw ConfigError("points budget must be >= 1");
}

WorldModel generate_world(std::uint64_t seed, const WorldParams& params) {
    if (params.num_landmarks < 0) throw ConfigError("landmark count must be >= 0");
    if (!(params.x_max > params.x_min) || !(params.y_max > params.y_min)) {
        throw ConfigError("world extent is empty");
    }
    WorldModel world;
    world.seed = seed;
    world.params = params;
    Rng rng(derive_stream(seed, "world"));

    const long max_attempts = 1000L * std::max(1, params.num_landmarks);
    long attempts = 0;
    while (static_cast<int>(world.landmarks.size()) < params.num_landmarks) {
        if (++attempts > max_attempts) {
            throw ConfigError("could not place " + std::to_string(params.num_landmarks) +
                              " landmarks with separation " + std::to_string(params.min_separation));
        }
        Landmark lm;
        lm.x = rng.next_uniform(params.x_min, params.x_max);
        lm.y = rng.next_uniform(params.y_min, params.y_max);
        lm.radius = rng.next_uniform(params.radius_min, params.radius_max);
        lm.height = rng.next_uniform(params.height_min, params.height_max);
        lm.intensity = rng.next_uniform(0.5, 1.0);
        lm.density = params.density;
        bool ok = true;
        for (const Landmark& other : world.landmarks) {
            if (std::hypot(lm.x - other.x, lm.y - other.y) < params.min_separation) {
                ok = false;
                break;
            }
        }
        if (ok) world.landmarks.push_back(lm);
    }
    return world;
}

PointCloud render_scan(const WorldModel& world, const Pose2D& sensor_pose,
                       const SensorModel& sensor, std::uint64_t seed) {
    sensor.validate();

    // The budget is shared by the landmarks in sensor range; per-landmark
    // counts depend only on that visible set, so renders from poses seeing
    // the same landmarks draw identical surface points.
    std::vector<std::size_t> visible;
    for (std::size_t k = 0; k < world.landmarks.size(); ++k) {
        const Landmark& lm = world.landmarks[k];
        if (std::hypot(lm.x - sensor_pose.x, lm.y - sensor_pose.y) <= sensor.max_range) {
            visible.push_back(k);
        }
    }
    std::vector<int> counts(visible.size());
    double total = 0.0;
    for (std::size_t v = 0; v < visible.size(); ++v) {
        const Landmark& lm = world.landmarks[visible[v]];
        const double area = 2.0 * M_PI * lm.radius * lm.height;
        counts[v] = std::max(1, static_cast<int>(std::lround(lm.density * area)));
        total += counts[v];
    }
    if (total > sensor.points_budget) {
        const double scale = sensor.points_budget / total;
        for (int& c : counts) c = std::max(1, static_cast<int>(std::floor(c * scale)));
    }

    const Pose2D world_to_sensor = pose_inverse(sensor_pose);
    const double rad = world_to_sensor.yaw_deg * M_PI / 180.0;
    const double rc = std::cos(rad), rs = std::sin(rad);

    PointCloud pc;
    pc.frame = Frame::Sensor;
    for (std::size_t v = 0; v < visible.size(); ++v) {
        const std::size_t k = visible[v];
        const Landmark& lm = world.landmarks[k];
        Rng rng(derive_stream(derive_stream(world.seed, seed), static_cast<std::uint64_t>(k)));
        for (int n = 0; n < counts[v]; ++n) {
            const double phi = rng.next_uniform(0.0, 2.0 * M_PI);
            const double wx = lm.x + lm.radius * std::cos(phi);
            const double wy = lm.y + lm.radius * std::sin(phi);
            const double wz = rng.next_uniform(0.0, lm.height);
            double nx = 0.0, ny = 0.0, nz = 0.0;
            if (sensor.noise_sigma > 0.0) {
                nx = rng.next_normal(0.0, sensor.noise_sigma);
                ny = rng.next_normal(0.0, sensor.noise_sigma);
                nz = rng.next_normal(0.0, sensor.noise_sigma);
            }
            const bool keep = sensor.dropout > 0.0 ? !rng.next_bernoulli(sensor.dropout) : true;
            if (!keep) continue;
            Point3 p;
            p.x = rc * wx - rs * wy + world_to_sensor.x + nx;
            p.y = rs * wx + rc * wy + world_to_sensor.y + ny;
            p.z = wz + nz;
            p.intensity = lm.intensity;
            pc.points.push_back(p);
        }
    }
    return pc;
}

namespace {

void write_world_csv(const WorldModel& world, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write world file: " + path);
    out << "x,y,radius,height,intensity\n";
    char buf[200];
    for (const Landmark& lm : world.landmarks) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g", lm.x, lm.y, lm.radius,
                      lm.height, lm.intensity);
        out << buf << '\n';
    }
}

std::string index_name(const char* prefix, int i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s_%05d", prefix, i);
    return buf;
}

}  // namespace

BenchmarkPaths generate_benchmark(std::uint64_t seed, const BenchmarkLayout& layout,
                                  const SensorModel& sensor, const std::string& out_dir) {
    sensor.validate();
    if (!(layout.ref_spacing > 0.0)) throw ConfigError("reference spacing must be positive");
    if (layout.num_queries < 0) throw ConfigError("query count must be >= 0");
    if (layout.query_yaw_step_deg <= 0 || 360 % layout.query_yaw_step_deg != 0) {
        throw ConfigError("query yaw step must divide 360");
    }

    std::error_code ec;
    fs::create_directories(fs::path(out_dir) / "ref", ec);
    fs::create_directories(fs::path(out_dir) / "query", ec);
    if (ec) throw DataError("cannot create output directory: " + out_dir);

    BenchmarkPaths paths;
    paths.ref_dir = (fs::path(out_dir) / "ref").string();
    paths.query_dir = (fs::path(out_dir) / "query").string();
    paths.ref_poses_csv = (fs::path(out_dir) / "ref_poses.csv").string();
    paths.query_poses_csv = (fs::path(out_dir) / "query_poses.csv").string();
    paths.association_csv = (fs::path(out_dir) / "association.csv").string();
    paths.world_csv = (fs::path(out_dir) / "world.csv").string();

    const WorldModel world = generate_world(derive_stream(seed, "benchmark-world"), layout.world);
    write_world_csv(world, paths.world_csv);

    // Reference traverse: heading along +x, one scan every ref_spacing.
    std::vector<PoseRow> ref_rows;
    const int n_refs = static_cast<int>(std::floor(layout.path_length / layout.ref_spacing)) + 1;
    for (int i = 0; i < n_refs; ++i) {
        const std::string id = index_name("ref", i);
        const Pose2D pose = make_pose(i * layout.ref_spacing, 0.0, 0.0);
        ref_rows.push_back(PoseRow{id, pose});
        const PointCloud scan =
            render_scan(world, pose, sensor, derive_stream(seed, "ref-scan-" + id));
        write_pointcloud_bin(scan, (fs::path(paths.ref_dir) / (id + ".bin")).string());
    }
    write_poses_csv(ref_rows, paths.ref_poses_csv);

    // Query traverse: perturbed positions and yaws off the path.
    Rng qrng(derive_stream(seed, "queries"));
    std::vector<PoseRow> query_rows;
    std::ofstream assoc(paths.association_csv, std::ios::trunc);
    if (!assoc) throw DataError("cannot write association file: " + paths.association_csv);
    assoc << "query_id,nearest_ref_id,dx,dy,dyaw\n";
    const int yaw_steps = 360 / layout.query_yaw_step_deg;
    for (int i = 0; i < layout.num_queries; ++i) {
        const std::string id = index_name("query", i);
        const double s = qrng.next_uniform(0.0, layout.path_length);
        const double dx = qrng.next_uniform(-layout.query_max_offset, layout.query_max_offset);
        const double dy = qrng.next_uniform(-layout.query_max_offset, layout.query_max_offset);
        const double dyaw =
            layout.query_yaw_step_deg * static_cast<double>(qrng.next_below(yaw_steps));
        const Pose2D pose = make_pose(s + dx, dy, dyaw);
        query_rows.push_back(PoseRow{id, pose});
        const PointCloud scan =
            render_scan(world, pose, sensor, derive_stream(seed, "query-scan-" + id));
        write_pointcloud_bin(scan, (fs::path(paths.query_dir) / (id + ".bin")).string());

        int nearest = 0;
        double best = std::numeric_limits<double>::infinity();
        for (int r = 0; r < n_refs; ++r) {
            const double d = std::hypot(pose.x - ref_rows[r].pose.x, pose.y - ref_rows[r].pose.y);
            if (d < best) {
                best = d;
                nearest = r;
            }
        }
        char buf[200];
        std::snprintf(buf, sizeof buf, "%s,%s,%.17g,%.17g,%.17g", id.c_str(),
                      ref_rows[nearest].id.c_str(), pose.x - ref_rows[nearest].pose.x,
                      pose.y - ref_rows[nearest].pose.y, pose.yaw_deg);
        assoc << buf << '\n';
    }
    write_poses_csv(query_rows, paths.query_poses_csv);
    return paths;
}

}  // namespace lpr
