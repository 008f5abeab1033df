#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "lpr/config.hpp"
#include "lpr/error.hpp"
#include "lpr/poses.hpp"
#include "lpr/search.hpp"
#include "lpr/selfcheck.hpp"
#include "lpr/synth.hpp"

namespace fs = std::filesystem;
using namespace lpr;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

Config load_effective_config(const std::string& config_path,
                             const std::vector<std::string>& overrides) {
    Config config = default_config();
    if (!config_path.empty()) apply_config_file(config, config_path);
    for (const std::string& assignment : overrides) apply_override(config, assignment);
    config.validate();
    return config;
}

// Scans are stored as <dir>/<id>.bin or <dir>/<id>.txt.
std::string resolve_scan(const std::string& dir, const std::string& id) {
    const fs::path bin = fs::path(dir) / (id + ".bin");
    if (fs::exists(bin)) return bin.string();
    const fs::path txt = fs::path(dir) / (id + ".txt");
    if (fs::exists(txt)) return txt.string();
    throw DataError("missing scan for id '" + id + "' in " + dir);
}

PointCloud load_scan(const std::string& path) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".txt") {
        return load_pointcloud_ascii(path);
    }
    return load_pointcloud_bin(path);
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_build_index(const Config& config, const std::string& scan_dir, const std::string& poses_csv,
                    const std::string& out_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<PoseRow> traverse = load_poses_csv(poses_csv);
    if (traverse.empty()) throw DataError("no reference poses in " + poses_csv);
    std::map<std::string, std::string> scan_paths;
    for (const PoseRow& row : traverse) scan_paths[row.id] = resolve_scan(scan_dir, row.id);

    ReferenceIndex index = build_reference_index(
        traverse, [&](const std::string& id) { return load_scan(scan_paths.at(id)); },
        config.search);
    index.config_echo = canonical_dump(config);
    save_index(index, out_dir);

    std::cout << "references: " << index.refs.size() << " (of " << traverse.size()
              << " input scans, spacing " << config.search.ref_spacing << " m)\n"
              << "mosaic: " << index.tile_rows << "x" << index.tile_cols << " tiles, "
              << index.mosaic.rows << "x" << index.mosaic.cols << " cells\n"
              << "built in " << fmt6(elapsed_s(t0)) << " s\n";
    return kExitOk;
}

int cmd_localize(const Config& config, const std::string& index_dir, const std::string& scan_path,
                 const std::string& dump_surface) {
    ReferenceIndex index = load_index(index_dir);
    const PointCloud scan = load_scan(scan_path);
    const LocalizeResult res =
        localize(index, scan, config.search.rotation_step_deg, config.search.top_n);
    if (res.estimate.low_confidence) {
        std::cerr << "warning: query descriptor has no occupied cells; low-confidence estimate\n";
    }
    if (!dump_surface.empty()) {
        write_grid(res.best_surface.values, index.high_cell, dump_surface);
    }
    std::cout << res.estimate.ref_id << ' ' << fmt6(res.estimate.pose.x) << ' '
              << fmt6(res.estimate.pose.y) << ' ' << fmt6(res.estimate.pose.yaw_deg) << ' '
              << fmt6(res.estimate.score) << '\n';
    return kExitOk;
}

int cmd_evaluate(const Config& config, const std::string& index_dir, const std::string& query_dir,
                 const std::string& gt_csv, const std::string& out_csv, bool score_uncorrected) {
    ReferenceIndex index = load_index(index_dir);

    std::map<std::string, Pose2D> ground_truth;
    for (const PoseRow& row : load_poses_csv(gt_csv)) ground_truth[row.id] = row.pose;

    // Queries are the scan files in the directory, processed in id order.
    std::map<std::string, std::string> queries;
    for (const auto& entry : fs::directory_iterator(query_dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = entry.path().extension().string();
        if (ext != ".bin" && ext != ".txt") continue;
        queries[entry.path().stem().string()] = entry.path().string();
    }
    if (queries.empty()) throw DataError("no query scans (*.bin, *.txt) in " + query_dir);
    for (const auto& [id, path] : queries) {
        if (!ground_truth.count(id)) {
            throw DataError("no ground-truth row for query '" + id + "' in " + gt_csv);
        }
    }

    std::vector<EvalRecord> records;
    records.reserve(queries.size());
    for (const auto& [id, path] : queries) {
        const LocalizeResult res = localize(index, load_scan(path), config.search.rotation_step_deg,
                                            config.search.top_n);
        PoseEstimate est = res.estimate;
        if (score_uncorrected) {
            // Score the raw matched-reference position instead of the
            // shift-corrected estimate; yaw keeps the sweep correction.
            const Pose2D ref_pose = index.refs[res.match.ref_index].pose;
            est.pose = make_pose(ref_pose.x, ref_pose.y, est.pose.yaw_deg);
        }
        records.push_back(
            make_eval_record(id, std::move(est), ground_truth.at(id), config.recall_threshold_m));
    }

    write_report_csv(records, out_csv);
    const EvalReport report =
        aggregate(records, config.recall_threshold_m, config.sr_rte_m, config.sr_rre_deg);
    std::cout << format_summary(report, config.recall_threshold_m, config.sr_rte_m,
                                config.sr_rre_deg);
    std::cout << "report: " << out_csv << '\n';
    return kExitOk;
}

int cmd_synth(const Config& config, const std::string& out_dir) {
    if (config.synth_num_landmarks == 0) {
        std::cerr << "warning: generating a zero-landmark world; scans will be empty\n";
    }
    const BenchmarkPaths paths = generate_benchmark(config.synth_seed, make_benchmark_layout(config),
                                                    make_sensor_model(config), out_dir);
    std::cout << "reference scans: " << paths.ref_dir << '\n'
              << "query scans:     " << paths.query_dir << '\n'
              << "reference poses: " << paths.ref_poses_csv << '\n'
              << "query gt poses:  " << paths.query_poses_csv << '\n'
              << "associations:    " << paths.association_csv << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"BEV matched-filter place recognition and 3-DoF relocalization"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    app.add_option("-c,--config", config_path, "Config file (key = value lines)");
    app.add_option("--set", overrides, "Override a config key, e.g. --set voxel_size=0.75")
        ->allow_extra_args(false);

    auto* build = app.add_subcommand("build-index", "Build a reference index from scans + poses");
    build->fallthrough();
    std::string scan_dir, poses_csv, out_dir;
    build->add_option("--scans", scan_dir, "Directory with <id>.bin / <id>.txt scans")->required();
    build->add_option("--poses", poses_csv, "Reference poses CSV (id,x,y,yaw)")->required();
    build->add_option("--out", out_dir, "Output index directory")->required();

    auto* loc = app.add_subcommand("localize", "Localize a single scan against an index");
    loc->fallthrough();
    std::string index_dir, scan_path, dump_surface;
    loc->add_option("--index", index_dir, "Index directory")->required();
    loc->add_option("--scan", scan_path, "Query scan file")->required();
    loc->add_option("--dump-surface", dump_surface,
                    "Write the winning correlation surface to this file");

    auto* eval = app.add_subcommand("evaluate", "Localize every query scan and report metrics");
    eval->fallthrough();
    std::string query_dir, gt_csv, out_csv;
    bool score_uncorrected = false;
    eval->add_option("--index", index_dir, "Index directory")->required();
    eval->add_option("--queries", query_dir, "Directory with query scans")->required();
    eval->add_option("--gt", gt_csv, "Ground-truth poses CSV (id,x,y,yaw)")->required();
    eval->add_option("--out", out_csv, "Report CSV path")->required();
    eval->add_flag("--score-uncorrected", score_uncorrected,
                   "Score the matched reference position instead of the corrected estimate");

    auto* synth = app.add_subcommand("synth", "Generate a synthetic benchmark dataset");
    synth->fallthrough();
    synth->add_option("--out", out_dir, "Output dataset directory")->required();

    auto* selfcheck = app.add_subcommand("selfcheck", "Run built-in consistency checks");
    selfcheck->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        const Config config = load_effective_config(config_path, overrides);
        if (build->parsed()) return cmd_build_index(config, scan_dir, poses_csv, out_dir);
        if (loc->parsed()) return cmd_localize(config, index_dir, scan_path, dump_surface);
        if (eval->parsed()) {
            return cmd_evaluate(config, index_dir, query_dir, gt_csv, out_csv, score_uncorrected);
        }
        if (synth->parsed()) return cmd_synth(config, out_dir);
        if (selfcheck->parsed()) {
            return run_selfcheck(std::cout) ? kExitOk : kExitInternal;
        }
        std::cerr << "error: no subcommand\n";
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const InternalError& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}
