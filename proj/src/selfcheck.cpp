#include "lpr/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "lpr/config.hpp"
#include "lpr/correlation.hpp"
#include "lpr/descriptor.hpp"
#include "lpr/pose_metrics.hpp"
#include "lpr/rng.hpp"
#include "lpr/search.hpp"
#include "lpr/synth.hpp"

namespace lpr {

namespace {

Grid random_grid(Rng& rng, int rows, int cols) {
    Grid g(rows, cols);
    for (double& v : g.data) v = rng.next_uniform(-1.0, 1.0);
    return g;
}

bool check_fft_oracle(std::string& detail) {
    Rng rng(0x5eedf00dULL);
    const int edges[] = {8, 16, 31, 32};
    for (int trial = 0; trial < 48; ++trial) {
        const Grid q = random_grid(rng, edges[rng.next_below(4)], edges[rng.next_below(4)]);
        const Grid r = random_grid(rng, edges[rng.next_below(4)], edges[rng.next_below(4)]);
        const CorrelationSurface direct = correlate_direct(q, r);
        const CorrelationSurface fast = correlate_fft(q, r);
        double max_direct = 0.0, max_err = 0.0;
        for (std::size_t k = 0; k < direct.values.size(); ++k) {
            max_direct = std::max(max_direct, std::abs(direct.values.data[k]));
            max_err = std::max(max_err, std::abs(direct.values.data[k] - fast.values.data[k]));
        }
        if (max_err > 1e-6 * (1.0 + max_direct)) {
            detail = "trial " + std::to_string(trial) + ": max error " + std::to_string(max_err);
            return false;
        }
    }
    return true;
}

bool check_rotation_exactness(std::string& detail) {
    Rng rng(42);
    BevDescriptor desc;
    desc.cell_size = 0.3;
    desc.occupied_value = 1.0;
    desc.unoccupied_value = 0.0;
    desc.grid = Grid(40, 40, 0.0);
    for (int k = 0; k < 120; ++k) {
        desc.grid.at(static_cast<int>(rng.next_below(40)), static_cast<int>(rng.next_below(40))) = 1.0;
    }
    // One full turn in right angles must reproduce the grid exactly.
    BevDescriptor turned = desc;
    for (int k = 0; k < 4; ++k) turned = rotate_descriptor(turned, 90.0);
    if (!(turned.grid == desc.grid)) {
        detail = "360-degree turn did not reproduce the grid";
        return false;
    }
    const BevDescriptor quarter = rotate_descriptor(desc, 90.0);
    for (int i = 0; i < 40; ++i) {
        for (int j = 0; j < 40; ++j) {
            if (quarter.grid.at(i, j) != desc.grid.at(j, 39 - i)) {
                detail = "90-degree rotation is not the exact array rotation";
                return false;
            }
        }
    }
    return true;
}

bool check_metric_fixtures(std::string& detail) {
    if (std::abs(rre(make_pose(0, 0, 10), make_pose(0, 0, 350)) - 20.0) > 1e-12) {
        detail = "rre wraparound 10 vs 350 != 20";
        return false;
    }
    if (std::abs(rte(make_pose(0, 0, 0), make_pose(3, 4, 0)) - 5.0) > 1e-12) {
        detail = "rte 3-4-5 failed";
        return false;
    }
    const Pose2D p = shift_to_pose(make_pose(0, 0, 90), 1.0, 0.0, 0.0);
    if (std::abs(p.x) > 1e-12 || std::abs(p.y - 1.0) > 1e-12) {
        detail = "shift rotation by reference yaw failed";
        return false;
    }
    return true;
}

bool check_end_to_end(std::string& detail) {
    Config config = default_config();
    config.search.window.wx = 9.0;
    config.search.window.wy = 9.0;
    config.synth_path_length = 16.0;
    config.synth_num_landmarks = 40;
    config.synth_world_margin = 10.0;
    config.synth_points_budget = 15000;
    const BenchmarkLayout layout = make_benchmark_layout(config);
    const SensorModel sensor = make_sensor_model(config);
    const WorldModel world = generate_world(7, layout.world);

    std::vector<ReferenceScan> scans;
    for (int i = 0; i <= 8; ++i) {
        const Pose2D pose = make_pose(2.0 * i, 0.0, 0.0);
        scans.push_back(ReferenceScan{"ref_" + std::to_string(i),
                                      render_scan(world, pose, sensor, 100 + i), pose});
    }
    const ReferenceIndex index = build_reference_index(scans, config.search);

    const double vx = config.search.voxel_size;
    const struct {
        double dx, dy, dyaw;
    } cases[] = {{0.0, 0.0, 0.0}, {1.3, -0.8, 90.0}, {-0.7, 1.1, 40.0}};
    for (const auto& c : cases) {
        const Pose2D truth = make_pose(8.0 + c.dx, c.dy, c.dyaw);
        const PointCloud scan = render_scan(world, truth, sensor, 999);
        const LocalizeResult res = localize(index, scan, config.search.rotation_step_deg,
                                            config.search.top_n);
        const double err_t = rte(res.estimate.pose, truth);
        const double err_r = rre(res.estimate.pose, truth);
        if (err_t > std::sqrt(2.0) * vx + 1e-9 || err_r > config.search.rotation_step_deg / 2.0) {
            detail = "pose error too large: rte=" + std::to_string(err_t) +
                     " rre=" + std::to_string(err_r);
            return false;
        }
    }
    return true;
}

}  // namespace

bool run_selfcheck(std::ostream& out) {
    struct Check {
        const char* name;
        bool (*fn)(std::string&);
    };
    const Check checks[] = {
        {"fft matches direct correlation oracle", check_fft_oracle},
        {"descriptor rotation right-angle exactness", check_rotation_exactness},
        {"pose metric fixtures", check_metric_fixtures},
        {"miniature end-to-end localization", check_end_to_end},
    };
    bool all_ok = true;
    for (const Check& check : checks) {
        std::string detail;
        const bool ok = check.fn(detail);
        out << (ok ? "PASS" : "FAIL") << ": " << check.name;
        if (!ok && !detail.empty()) out << " (" << detail << ")";
        out << '\n';
        all_ok = all_ok && ok;
    }
    return all_ok;
}

}  // namespace lpr
