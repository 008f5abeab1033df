// Acceptance suite: the release gate for the matcher. Every check prints one
// PASS/FAIL line; the process exits nonzero if any check fails.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "lpr/config.hpp"
#include "lpr/correlation.hpp"
#include "lpr/descriptor.hpp"
#include "lpr/pose_metrics.hpp"
#include "lpr/rng.hpp"
#include "lpr/search.hpp"
#include "lpr/synth.hpp"

namespace fs = std::filesystem;
using namespace lpr;
using Clock = std::chrono::steady_clock;

namespace {

// Pass bar for the noise-robustness benchmark, frozen from the reference
// run of this implementation (observed recall 1.00 on the pinned seed).
constexpr double kNoiseRecallBar = 0.90;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

Grid random_grid(Rng& rng, int rows, int cols) {
    Grid g(rows, cols);
    for (double& v : g.data) v = rng.next_uniform(-1.0, 1.0);
    return g;
}

WorldParams corridor_world(double path_length, int landmarks, double margin = 20.0) {
    WorldParams w;
    w.num_landmarks = landmarks;
    w.x_min = -margin;
    w.x_max = path_length + margin;
    w.y_min = -margin;
    w.y_max = margin;
    return w;
}

SensorModel clean_sensor() {
    SensorModel s;
    s.max_range = 26.0;  // covers the crop window diagonal
    s.points_budget = 60000;
    return s;
}

SearchConfig default_search() { return default_config().search; }

struct Traverse {
    WorldModel world;
    std::vector<ReferenceScan> refs;
    ReferenceIndex index;
};

// References every 2 m along a straight path, default descriptor settings.
Traverse make_traverse(std::uint64_t seed, double path_length, int landmarks,
                       const SensorModel& sensor) {
    Traverse t;
    t.world = generate_world(seed, corridor_world(path_length, landmarks));
    const int count = static_cast<int>(path_length / 2.0) + 1;
    for (int i = 0; i < count; ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "ref_%04d", i);
        const Pose2D pose = make_pose(2.0 * i, 0.0, 0.0);
        t.refs.push_back(
            ReferenceScan{id, render_scan(t.world, pose, sensor, 1000 + i), pose});
    }
    t.index = build_reference_index(t.refs, default_search());
    return t;
}

// ---------------------------------------------------------------------------

bool fft_direct_equivalence(std::string& detail) {
    const auto t0 = Clock::now();
    Rng rng(20240817);
    const int edges[] = {8, 16, 31, 32};
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const Grid q = random_grid(rng, edges[rng.next_below(4)], edges[rng.next_below(4)]);
        const Grid r = random_grid(rng, edges[rng.next_below(4)], edges[rng.next_below(4)]);
        const CorrelationSurface direct = correlate_direct(q, r);
        const CorrelationSurface fast = correlate_fft(q, r);
        double max_direct = 0.0, max_err = 0.0;
        for (std::size_t k = 0; k < direct.values.size(); ++k) {
            max_direct = std::max(max_direct, std::abs(direct.values.data[k]));
            max_err = std::max(max_err, std::abs(direct.values.data[k] - fast.values.data[k]));
        }
        const double tol = 1e-6 * (1.0 + max_direct);
        worst = std::max(worst, max_err / tol);
        if (max_err > tol) {
            detail = "trial " + std::to_string(trial) + " error " + std::to_string(max_err) +
                     " above tolerance " + std::to_string(tol);
            return false;
        }
    }
    const double elapsed = seconds_since(t0);
    std::ostringstream os;
    os << "200 pairs, worst error at " << worst << " of tolerance, " << elapsed << " s";
    detail = os.str();
    return elapsed < 10.0;
}

bool exact_angle_recovery(std::string& detail) {
    int checked = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const SensorModel sensor = clean_sensor();
        const Traverse t = make_traverse(seed, 30.0, 300, sensor);
        const int target = 7;  // reference at (14, 0, 0)
        const Pose2D ref_pose = t.refs[target].pose;
        for (int angle = 0; angle < 360; angle += 10) {
            // Same render stream as the reference: the query cloud is the
            // reference cloud expressed in a yawed sensor frame, exactly.
            const PointCloud query = render_scan(
                t.world, make_pose(ref_pose.x, ref_pose.y, angle), sensor, 1000 + target);
            const LocalizeResult res = localize(t.index, query, 10, 2);
            if (res.estimate.ref_id != t.refs[target].id) {
                detail = "seed " + std::to_string(seed) + " angle " + std::to_string(angle) +
                         ": matched " + res.estimate.ref_id;
                return false;
            }
            const double err = std::abs(normalize_deg(res.match.theta_deg - angle));
            const bool right_angle = angle % 90 == 0;
            if ((right_angle && err != 0.0) || err > 5.0) {
                detail = "seed " + std::to_string(seed) + " angle " + std::to_string(angle) +
                         ": theta_match " + std::to_string(res.match.theta_deg);
                return false;
            }
            ++checked;
        }
    }
    detail = std::to_string(checked) + "/180 angle recoveries exact";
    return checked == 180;
}

bool translation_recovery(std::string& detail) {
    const SensorModel sensor = clean_sensor();
    const Traverse t = make_traverse(11, 30.0, 300, sensor);
    const Pose2D center = t.refs[7].pose;
    const double bound = std::sqrt(2.0) * default_search().voxel_size + 1e-9;
    double worst = 0.0;
    int cases = 0;
    for (int dx = -4; dx <= 4; ++dx) {
        for (int dy = -4; dy <= 4; ++dy) {
            const Pose2D truth = make_pose(center.x + dx, center.y + dy, 0.0);
            const PointCloud query =
                render_scan(t.world, truth, sensor, 50000 + 100 * (dx + 4) + (dy + 4));
            const LocalizeResult res = localize(t.index, query, 10, 2);
            const double err = rte(res.estimate.pose, truth);
            worst = std::max(worst, err);
            if (err > bound) {
                detail = "offset (" + std::to_string(dx) + ", " + std::to_string(dy) + "): rte " +
                         std::to_string(err) + " above " + std::to_string(bound);
                return false;
            }
            ++cases;
        }
    }
    std::ostringstream os;
    os << cases << " offsets in [-4,4]^2, worst rte " << worst << " m (bound " << bound << ")";
    detail = os.str();
    return true;
}

bool shift_correction_benefit(std::string& detail) {
    const SensorModel sensor = clean_sensor();
    const Traverse t = make_traverse(23, 100.0, 400, sensor);
    Rng rng(derive_stream(23, "queries"));
    double sum_corrected = 0.0, sum_raw = 0.0;
    const int n = 40;
    for (int i = 0; i < n; ++i) {
        const double s = rng.next_uniform(2.0, 98.0);
        const double dx = rng.next_uniform(-4.0, 4.0);
        const double dy = rng.next_uniform(-4.0, 4.0);
        const double yaw = 10.0 * static_cast<double>(rng.next_below(36));
        const Pose2D truth = make_pose(s + dx, dy, yaw);
        const PointCloud query = render_scan(t.world, truth, sensor, 90000 + i);
        const LocalizeResult res = localize(t.index, query, 10, 2);
        sum_corrected += rte(res.estimate.pose, truth);
        sum_raw += rte(t.index.refs[res.match.ref_index].pose, truth);
    }
    const double mean_corrected = sum_corrected / n;
    const double mean_raw = sum_raw / n;
    std::ostringstream os;
    os << "mean rte " << mean_corrected << " m corrected vs " << mean_raw
       << " m raw matched-reference position";
    detail = os.str();
    return mean_corrected * 3.0 < mean_raw;
}

bool noise_robustness(std::string& detail) {
    SensorModel sensor = clean_sensor();
    sensor.dropout = 0.30;
    sensor.noise_sigma = 0.05;
    const Traverse t = make_traverse(31, 198.0, 300, sensor);  // 100 references
    if (t.index.refs.size() != 100) {
        detail = "expected 100 references, got " + std::to_string(t.index.refs.size());
        return false;
    }
    Rng rng(derive_stream(31, "queries"));
    int within = 0;
    const int n = 50;
    for (int i = 0; i < n; ++i) {
        const double s = rng.next_uniform(1.0, 197.0);
        const double dx = rng.next_uniform(-1.75, 1.75);
        const double dy = rng.next_uniform(-1.75, 1.75);
        const double yaw = 10.0 * static_cast<double>(rng.next_below(36));
        const Pose2D truth = make_pose(s + dx, dy, yaw);
        const PointCloud query = render_scan(t.world, truth, sensor, 70000 + i);
        const LocalizeResult res = localize(t.index, query, 10, 2);
        if (rte(res.estimate.pose, truth) <= 3.0) ++within;
    }
    const double recall = static_cast<double>(within) / n;
    std::ostringstream os;
    os << "recall@1 " << recall << " with 30% dropout and 0.05 m noise (bar " << kNoiseRecallBar
       << ")";
    detail = os.str();
    return recall >= kNoiseRecallBar;
}

bool metric_unit_correctness(std::string& detail) {
    // Hand-computed fixtures, asserted exactly.
    if (rre(make_pose(0, 0, 10), make_pose(0, 0, 350)) != 20.0) {
        detail = "rre(10, 350) != 20";
        return false;
    }
    if (rre(make_pose(0, 0, 0), make_pose(0, 0, 180)) != 180.0) {
        detail = "rre(0, 180) != 180";
        return false;
    }
    if (rte(make_pose(0, 0, 0), make_pose(3, 4, 0)) != 5.0) {
        detail = "rte 3-4-5 failed";
        return false;
    }

    auto fixture = [](double rte_m, double rre_deg) {
        PoseEstimate est;
        est.pose = make_pose(rte_m, 0, rre_deg);
        return make_eval_record("q", est, make_pose(0, 0, 0), 3.0);
    };
    const std::vector<EvalRecord> records = {fixture(0.5, 1), fixture(1.5, 2), fixture(2.9, 3),
                                             fixture(3.2, 4)};
    if (recall_at_1(records, 3.0) != 0.75) {
        detail = "recall fixture != 0.75";
        return false;
    }
    const std::vector<EvalRecord> positives = {fixture(1.9, 4.9), fixture(2.0, 4.9),
                                               fixture(1.9, 5.0), fixture(0.0, 0.0)};
    if (success_rate(positives).value != 0.5) {
        detail = "strict SR boundary fixture != 0.5";
        return false;
    }
    const Pose2D corrected = shift_to_pose(make_pose(2, 3, 180), 1.0, 1.0, 30.0);
    if (std::abs(corrected.x - 1.0) > 1e-12 || std::abs(corrected.y - 2.0) > 1e-12 ||
        std::abs(corrected.yaw_deg + 150.0) > 1e-12) {
        detail = "pose correction fixture failed";
        return false;
    }
    detail = "recall, SR, RTE/RRE and pose-correction fixtures exact";
    return true;
}

bool runtime_envelope(std::string& detail) {
    const SensorModel sensor = clean_sensor();
    const double path_length = 2998.0;  // 1500 references at 2 m spacing
    const WorldModel world = generate_world(47, corridor_world(path_length, 1800));

    std::vector<PoseRow> traverse;
    for (int i = 0; i < 1500; ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "ref_%04d", i);
        traverse.push_back(PoseRow{id, make_pose(2.0 * i, 0.0, 0.0)});
    }
    const auto t0 = Clock::now();
    const ReferenceIndex index = build_reference_index(
        traverse,
        [&](const std::string& id) {
            const int i = std::stoi(id.substr(4));
            return render_scan(world, traverse[i].pose, sensor, 1000 + i);
        },
        default_search());
    const double build_s = seconds_since(t0);
    if (index.refs.size() != 1500) {
        detail = "expected 1500 references, got " + std::to_string(index.refs.size());
        return false;
    }

    const Pose2D truth = make_pose(1500.7, 0.9, 130.0);
    const PointCloud query = render_scan(world, truth, sensor, 424242);
    const auto t1 = Clock::now();
    const LocalizeResult res = localize(index, query, 10, 2);
    const double localize_s = seconds_since(t1);

    std::ostringstream os;
    os << "localize " << localize_s << " s against 1500 references (build " << build_s
       << " s, rte " << rte(res.estimate.pose, truth) << " m)";
    detail = os.str();
    return localize_s <= 3.0 && rte(res.estimate.pose, truth) <= 3.0;
}

bool evaluate_determinism(std::string& detail) {
    const std::string dir =
        (fs::temp_directory_path() / ("lpr_accept_" + std::to_string(::getpid()))).string();
    fs::create_directories(dir);
    const std::string cli = LPR_CLI_PATH;
    auto run = [&](const std::string& args) {
        const std::string cmd = cli + " " + args + " > " + dir + "/out.txt 2> " + dir + "/err.txt";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    };
    auto slurp = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    };

    bool ok = true;
    std::string why;
    if (run("synth --out " + dir + "/data --set synth_path_length=20 --set synth_num_queries=6"
            " --set synth_num_landmarks=40") != 0) {
        ok = false;
        why = "synth failed";
    }
    if (ok && run("build-index --scans " + dir + "/data/ref --poses " + dir +
                  "/data/ref_poses.csv --out " + dir + "/index") != 0) {
        ok = false;
        why = "build-index failed";
    }
    const std::string eval_cmd = "evaluate --index " + dir + "/index --queries " + dir +
                                 "/data/query --gt " + dir + "/data/query_poses.csv --out " + dir;
    if (ok && run(eval_cmd + "/report_a.csv") != 0) {
        ok = false;
        why = "first evaluate failed";
    }
    if (ok && run(eval_cmd + "/report_b.csv") != 0) {
        ok = false;
        why = "second evaluate failed";
    }
    if (ok) {
        const std::string a = slurp(dir + "/report_a.csv");
        const std::string b = slurp(dir + "/report_b.csv");
        if (a.empty() || a != b) {
            ok = false;
            why = "report CSVs differ between runs";
        } else {
            why = "two evaluate runs produced byte-identical reports";
        }
    }
    std::error_code ec;
    fs::remove_all(dir, ec);
    detail = why;
    return ok;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        bool (*fn)(std::string&);
    };
    const Criterion criteria[] = {
        {"FFT/direct oracle equivalence (200 pairs, <10 s)", fft_direct_equivalence},
        {"exact-angle recovery over 36 angles x 5 seeds", exact_angle_recovery},
        {"translation recovery within sqrt(2)*voxel", translation_recovery},
        {"shift correction beats raw reference pose 3x", shift_correction_benefit},
        {"recall under 30% dropout and 0.05 m noise", noise_robustness},
        {"metric unit correctness on fixtures", metric_unit_correctness},
        {"localize runtime <= 3 s at 1500 references", runtime_envelope},
        {"byte-identical evaluate reports across runs", evaluate_determinism},
    };

    int failures = 0;
    int number = 0;
    for (const Criterion& criterion : criteria) {
        ++number;
        std::string detail;
        const auto t0 = Clock::now();
        const bool ok = criterion.fn(detail);
        const double elapsed = seconds_since(t0);
        std::printf("%s: criterion %d - %s [%.1f s]%s%s\n", ok ? "PASS" : "FAIL", number,
                    criterion.name, elapsed, detail.empty() ? "" : ": ", detail.c_str());
        std::fflush(stdout);
        failures += ok ? 0 : 1;
    }
    std::printf("acceptance: %d/8 criteria passed\n", 8 - failures);
    return failures == 0 ? 0 : 1;
}
