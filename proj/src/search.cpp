#include "lpr/search.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "lpr/error.hpp"

namespace lpr {

namespace fs = std::filesystem;

void SearchConfig::validate() const {
    window.validate();
    descriptor.validate();
    if (!(voxel_size > 0.0)) throw ConfigError("voxel size must be positive");
    sweep_angles(rotation_step_deg);  // throws unless it divides 360
    if (top_n < 1) throw ConfigError("top-n must be >= 1");
    if (!(ref_spacing >= 0.0)) throw ConfigError("reference spacing must be >= 0");
}

int ReferenceIndex::find_ref(const std::string& id) const {
    for (std::size_t i = 0; i < refs.size(); ++i) {
        if (refs[i].id == id) return static_cast<int>(i);
    }
    return -1;
}

std::vector<int> thin_by_spacing(const std::vector<Pose2D>& poses, double spacing) {
    std::vector<int> kept;
    for (std::size_t i = 0; i < poses.size(); ++i) {
        if (kept.empty() || std::hypot(poses[i].x - poses[kept.back()].x,
                                       poses[i].y - poses[kept.back()].y) >= spacing) {
            kept.push_back(static_cast<int>(i));
        }
    }
    return kept;
}

namespace {

void finalize_mosaic(ReferenceIndex& index, const std::vector<BevDescriptor>& lows) {
    const int n = static_cast<int>(index.refs.size());
    index.tile_cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    index.tile_rows = (n + index.tile_cols - 1) / index.tile_cols;
    index.tile_h = lows[0].grid.rows;
    index.tile_w = lows[0].grid.cols;
    index.low_cell = lows[0].cell_size;

    index.mosaic = Grid(index.tile_rows * index.tile_h, index.tile_cols * index.tile_w, 0.0);
    for (int t = 0; t < n; ++t) {
        const int ti = (t / index.tile_cols) * index.tile_h;
        const int tj = (t % index.tile_cols) * index.tile_w;
        const Grid& g = lows[t].grid;
        for (int i = 0; i < g.rows; ++i) {
            for (int j = 0; j < g.cols; ++j) {
                index.mosaic.at(ti + i, tj + j) = g.at(i, j);
            }
        }
    }
    index.mosaic_correlator =
        std::make_shared<FftCorrelator>(index.mosaic, index.tile_h, index.tile_w);
}

}  // namespace

ReferenceIndex build_reference_index(const std::vector<PoseRow>& traverse, const CloudLoader& loader,
                                     const SearchConfig& config) {
    config.validate();
    if (traverse.empty()) throw DataError("reference traverse is empty");
    {
        std::unordered_set<std::string> ids;
        for (const PoseRow& row : traverse) {
            if (!ids.insert(row.id).second) throw DataError("duplicate reference id: " + row.id);
        }
    }

    std::vector<Pose2D> poses;
    poses.reserve(traverse.size());
    for (const PoseRow& row : traverse) poses.push_back(row.pose);
    const std::vector<int> kept = thin_by_spacing(poses, config.ref_spacing);

    ReferenceIndex index;
    index.config = config;
    index.high_cell = config.voxel_size;

    std::vector<BevDescriptor> lows;
    lows.reserve(kept.size());
    for (int i : kept) {
        const PoseRow& row = traverse[i];
        DescriptorPair pair =
            make_reference_descriptors(loader(row.id), config.window, config.voxel_size,
                                       config.descriptor,
                                       derive_stream(config.descriptor.rng_seed, row.id));
        index.refs.push_back(ReferenceEntry{row.id, row.pose, std::move(pair.high.grid)});
        lows.push_back(std::move(pair.low));
    }
    finalize_mosaic(index, lows);
    return index;
}

ReferenceIndex build_reference_index(const std::vector<ReferenceScan>& scans,
                                     const SearchConfig& config) {
    std::vector<PoseRow> traverse;
    traverse.reserve(scans.size());
    for (const ReferenceScan& s : scans) traverse.push_back(PoseRow{s.id, s.pose});
    auto loader = [&scans](const std::string& id) -> PointCloud {
        for (const ReferenceScan& s : scans) {
            if (s.id == id) return s.cloud;
        }
        throw DataError("scan not found: " + id);
    };
    return build_reference_index(traverse, loader, config);
}

namespace {

// Shared tile-max scan; `value_at(i, j)` reads the correlation surface.
template <typename ValueAt>
std::vector<TileMax> tile_maxima_impl(const ReferenceIndex& index, ValueAt&& value_at) {
    const int ci = index.tile_h / 2;
    const int cj = index.tile_w / 2;
    std::vector<TileMax> out(index.refs.size());
    for (int t = 0; t < static_cast<int>(index.refs.size()); ++t) {
        const int ti = (t / index.tile_cols) * index.tile_h;
        const int tj = (t % index.tile_cols) * index.tile_w;
        TileMax tm;
        tm.ref_index = t;
        for (int i = 0; i < index.tile_h; ++i) {
            for (int j = 0; j < index.tile_w; ++j) {
                const double v = value_at(ti + i, tj + j);
                if (v > tm.score) {
                    tm.score = v;
                    tm.shift_i = i - ci;
                    tm.shift_j = j - cj;
                }
            }
        }
        out[t] = tm;
    }
    return out;
}

}  // namespace

std::vector<TileMax> per_tile_maxima(const CorrelationSurface& surface,
                                     const ReferenceIndex& index) {
    if (surface.values.rows != index.mosaic.rows || surface.values.cols != index.mosaic.cols) {
        throw ConfigError("surface dimensions do not match the reference mosaic");
    }
    return tile_maxima_impl(index, [&](int i, int j) { return surface.values.at(i, j); });
}

std::vector<Candidate> global_search(const ReferenceIndex& index, const BevDescriptor& q_low,
                                     int k_deg, int n) {
    if (n < 1) throw ConfigError("top-n must be >= 1");
    if (q_low.grid.rows != index.tile_h || q_low.grid.cols != index.tile_w) {
        throw ConfigError("low-res query dimensions do not match the mosaic tile size");
    }
    if (q_low.cell_size != index.low_cell) {
        throw ConfigError("low-res query cell size does not match the mosaic");
    }

    // Tile maxima are extracted inside the sweep workers, straight from the
    // padded FFT output; the per-reference reduction then runs in ascending
    // theta order, so results are independent of worker scheduling.
    const std::size_t n_thetas = sweep_angles(k_deg).size();
    std::vector<std::vector<TileMax>> slots(n_thetas);
    rotation_sweep_unordered(
        q_low, *index.mosaic_correlator, k_deg,
        [&](std::size_t t, const PaddedCorrelation& padded) {
            // Wrap lookups hoisted into index tables; the scan then runs at
            // plain array speed.
            std::vector<std::size_t> row_of(padded.rows);
            std::vector<int> col_of(padded.cols);
            for (int i = 0; i < padded.rows; ++i) {
                int a = (i - padded.ci) % padded.n0;
                if (a < 0) a += padded.n0;
                row_of[i] = static_cast<std::size_t>(a) * padded.n1;
            }
            for (int j = 0; j < padded.cols; ++j) {
                int b = (j - padded.cj) % padded.n1;
                if (b < 0) b += padded.n1;
                col_of[j] = b;
            }
            slots[t] = tile_maxima_impl(index, [&](int i, int j) {
                return padded.data[row_of[i] + col_of[j]];
            });
        });

    std::vector<Candidate> best(index.refs.size());
    for (std::size_t t = 0; t < n_thetas; ++t) {
        const int theta = static_cast<int>(t) * k_deg;
        for (const TileMax& tm : slots[t]) {
            Candidate& c = best[tm.ref_index];
            if (tm.score > c.score) {
                c.ref_index = tm.ref_index;
                c.theta_deg = theta;
                c.shift_i = tm.shift_i;
                c.shift_j = tm.shift_j;
                c.score = tm.score;
            }
        }
    }

    std::sort(best.begin(), best.end(), [](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.ref_index < b.ref_index;
    });
    if (static_cast<int>(best.size()) > n) best.resize(n);
    return best;
}

LocalSearchResult local_search(const ReferenceIndex& index, const BevDescriptor& q_high,
                               const std::vector<Candidate>& candidates, int k_deg) {
    if (candidates.empty()) throw ConfigError("local search requires at least one candidate");
    if (q_high.cell_size != index.high_cell) {
        throw ConfigError("high-res query cell size does not match the index");
    }

    // Candidates arrive sorted by (stage-1 score desc, ref index asc), so a
    // strictly-greater update realizes the documented tie-break chain.
    bool have_best = false;
    PeakResult best_peak;
    const Candidate* best_candidate = nullptr;
    CorrelationSurface best_surface;
    for (const Candidate& cand : candidates) {
        const ReferenceEntry& ref = index.refs[cand.ref_index];
        SweepResult sweep = rotation_sweep(q_high, ref.high_grid, k_deg);
        if (!have_best || sweep.best.score > best_peak.score) {
            have_best = true;
            best_peak = sweep.best;
            best_candidate = &cand;
            const std::size_t theta_idx = static_cast<std::size_t>(sweep.best.theta_deg) / k_deg;
            best_surface = std::move(sweep.surfaces[theta_idx]);
        }
    }

    const ReferenceEntry& ref = index.refs[best_candidate->ref_index];
    MatchResult match;
    match.ref_id = ref.id;
    match.ref_index = best_candidate->ref_index;
    match.theta_deg = best_peak.theta_deg;
    // Row offsets are x bins, column offsets y bins; peak displacement from
    // the query-center cell is the query's offset in the reference frame.
    match.x_shift = (best_peak.i - q_high.grid.rows / 2) * index.high_cell;
    match.y_shift = (best_peak.j - q_high.grid.cols / 2) * index.high_cell;
    match.score = best_peak.score;
    return LocalSearchResult{std::move(match), std::move(best_surface)};
}

LocalizeResult localize(const ReferenceIndex& index, const PointCloud& query_cloud, int k_deg,
                        int n) {
    const DescriptorPair q = make_query_descriptors(query_cloud, index.config.window,
                                                    index.config.voxel_size, index.config.descriptor);
    const bool low_confidence = q.high.occupied_count() == 0;
    const std::vector<Candidate> candidates = global_search(index, q.low, k_deg, n);
    LocalSearchResult local = local_search(index, q.high, candidates, k_deg);

    const ReferenceEntry& ref = index.refs[local.match.ref_index];
    LocalizeResult result;
    result.estimate.pose =
        shift_to_pose(ref.pose, local.match.x_shift, local.match.y_shift, local.match.theta_deg);
    result.estimate.ref_id = ref.id;
    result.estimate.score = local.match.score;
    result.estimate.low_confidence = low_confidence;
    result.match = std::move(local.match);
    result.best_surface = std::move(local.best_surface);
    return result;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace {

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string ref_grid_name(int i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "ref_%05d.grid", i);
    return buf;
}

double parse_double(const std::string& s, const std::string& key) {
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        throw DataError("manifest: bad numeric value for " + key);
    }
}

}  // namespace

void save_index(const ReferenceIndex& index, const std::string& dir) {
    std::error_code ec;
    fs::create_directories(fs::path(dir) / "refs", ec);
    if (ec) throw DataError("cannot create index directory: " + dir);

    std::ofstream man((fs::path(dir) / "manifest.txt").string(), std::ios::trunc);
    if (!man) throw DataError("cannot write index manifest in " + dir);
    const SearchConfig& c = index.config;
    man << "format_version = " << kIndexFormatVersion << '\n'
        << "reference_count = " << index.refs.size() << '\n'
        << "tile_rows = " << index.tile_rows << '\n'
        << "tile_cols = " << index.tile_cols << '\n'
        << "tile_height = " << index.tile_h << '\n'
        << "tile_width = " << index.tile_w << '\n'
        << "high_cell_size = " << fmt17(index.high_cell) << '\n'
        << "low_cell_size = " << fmt17(index.low_cell) << '\n'
        << "crop_wx = " << fmt17(c.window.wx) << '\n'
        << "crop_wy = " << fmt17(c.window.wy) << '\n'
        << "crop_h1 = " << fmt17(c.window.h1) << '\n'
        << "crop_h2 = " << fmt17(c.window.h2) << '\n'
        << "intensity_min = " << fmt17(c.window.intensity_min) << '\n'
        << "voxel_size = " << fmt17(c.voxel_size) << '\n'
        << "density_threshold = " << c.descriptor.density_threshold << '\n'
        << "unoccupied_weight = " << fmt17(c.descriptor.unoccupied_weight) << '\n'
        << "patch_edge = " << c.descriptor.patch_edge << '\n'
        << "patch_max_occupied = " << c.descriptor.patch_max_occupied << '\n'
        << "pool_edge = " << c.descriptor.pool_edge << '\n'
        << "rng_seed = " << c.descriptor.rng_seed << '\n'
        << "rotation_step_deg = " << c.rotation_step_deg << '\n'
        << "top_n = " << c.top_n << '\n'
        << "ref_spacing = " << fmt17(c.ref_spacing) << '\n'
        << "config_echo_begin\n"
        << index.config_echo << "config_echo_end\n";
    if (!man) throw DataError("short write to index manifest in " + dir);
    man.close();

    write_grid(index.mosaic, index.low_cell, (fs::path(dir) / "mosaic.grid").string());

    // FFTW wisdom for the mosaic-scale transforms: importing it on load makes
    // later processes plan (and therefore round) exactly like this one.
    const std::string wisdom = export_fft_wisdom();
    if (!wisdom.empty()) {
        std::ofstream wout((fs::path(dir) / "fftw_wisdom.txt").string(), std::ios::trunc);
        wout << wisdom;
    }

    std::vector<PoseRow> rows;
    rows.reserve(index.refs.size());
    for (const ReferenceEntry& r : index.refs) rows.push_back(PoseRow{r.id, r.pose});
    write_poses_csv(rows, (fs::path(dir) / "poses.csv").string());

    for (std::size_t i = 0; i < index.refs.size(); ++i) {
        write_grid(index.refs[i].high_grid, index.high_cell,
                   (fs::path(dir) / "refs" / ref_grid_name(static_cast<int>(i))).string());
    }
}

ReferenceIndex load_index(const std::string& dir) {
    std::ifstream man((fs::path(dir) / "manifest.txt").string());
    if (!man) throw DataError("cannot open index manifest in " + dir);

    std::map<std::string, std::string> kv;
    std::string echo;
    std::string line;
    bool in_echo = false;
    while (std::getline(man, line)) {
        if (in_echo) {
            if (line == "config_echo_end") {
                in_echo = false;
                continue;
            }
            echo += line;
            echo += '\n';
            continue;
        }
        if (line.empty()) continue;
        if (line == "config_echo_begin") {
            in_echo = true;
            continue;
        }
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) throw DataError("malformed manifest line: " + line);
        kv[line.substr(0, eq)] = line.substr(eq + 3);
    }
    auto need = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw DataError("manifest: missing key " + key);
        return it->second;
    };

    if (need("format_version") != std::to_string(kIndexFormatVersion)) {
        throw DataError("unsupported index format version " + need("format_version") +
                        " (expected " + std::to_string(kIndexFormatVersion) + ")");
    }

    ReferenceIndex index;
    index.config_echo = echo;
    index.tile_rows = static_cast<int>(parse_double(need("tile_rows"), "tile_rows"));
    index.tile_cols = static_cast<int>(parse_double(need("tile_cols"), "tile_cols"));
    index.tile_h = static_cast<int>(parse_double(need("tile_height"), "tile_height"));
    index.tile_w = static_cast<int>(parse_double(need("tile_width"), "tile_width"));
    index.high_cell = parse_double(need("high_cell_size"), "high_cell_size");
    index.low_cell = parse_double(need("low_cell_size"), "low_cell_size");

    SearchConfig& c = index.config;
    c.window.wx = parse_double(need("crop_wx"), "crop_wx");
    c.window.wy = parse_double(need("crop_wy"), "crop_wy");
    c.window.h1 = parse_double(need("crop_h1"), "crop_h1");
    c.window.h2 = parse_double(need("crop_h2"), "crop_h2");
    c.window.intensity_min = parse_double(need("intensity_min"), "intensity_min");
    c.voxel_size = parse_double(need("voxel_size"), "voxel_size");
    c.descriptor.density_threshold =
        static_cast<int>(parse_double(need("density_threshold"), "density_threshold"));
    c.descriptor.unoccupied_weight = parse_double(need("unoccupied_weight"), "unoccupied_weight");
    c.descriptor.patch_edge = static_cast<int>(parse_double(need("patch_edge"), "patch_edge"));
    c.descriptor.patch_max_occupied =
        static_cast<int>(parse_double(need("patch_max_occupied"), "patch_max_occupied"));
    c.descriptor.pool_edge = static_cast<int>(parse_double(need("pool_edge"), "pool_edge"));
    c.descriptor.rng_seed = static_cast<std::uint64_t>(std::stoull(need("rng_seed")));
    c.rotation_step_deg =
        static_cast<int>(parse_double(need("rotation_step_deg"), "rotation_step_deg"));
    c.top_n = static_cast<int>(parse_double(need("top_n"), "top_n"));
    c.ref_spacing = parse_double(need("ref_spacing"), "ref_spacing");
    c.validate();

    const int count = static_cast<int>(parse_double(need("reference_count"), "reference_count"));

    double cell = 0.0;
    index.mosaic = read_grid((fs::path(dir) / "mosaic.grid").string(), &cell);
    if (cell != index.low_cell || index.mosaic.rows != index.tile_rows * index.tile_h ||
        index.mosaic.cols != index.tile_cols * index.tile_w) {
        throw DataError("index mosaic does not match its manifest in " + dir);
    }

    const std::vector<PoseRow> rows = load_poses_csv((fs::path(dir) / "poses.csv").string());
    if (static_cast<int>(rows.size()) != count) {
        throw DataError("index poses.csv row count does not match the manifest in " + dir);
    }
    for (int i = 0; i < count; ++i) {
        ReferenceEntry entry;
        entry.id = rows[i].id;
        entry.pose = rows[i].pose;
        entry.high_grid = read_grid((fs::path(dir) / "refs" / ref_grid_name(i)).string(), &cell);
        if (cell != index.high_cell) {
            throw DataError("index reference grid cell size mismatch in " + dir);
        }
        index.refs.push_back(std::move(entry));
    }
    if (index.refs.empty()) throw DataError("index contains no references: " + dir);

    {
        std::ifstream win((fs::path(dir) / "fftw_wisdom.txt").string());
        if (win) {
            std::string wisdom((std::istreambuf_iterator<char>(win)),
                               std::istreambuf_iterator<char>());
            import_fft_wisdom(wisdom);
        }
    }
    index.mosaic_correlator =
        std::make_shared<FftCorrelator>(index.mosaic, index.tile_h, index.tile_w);
    return index;
}

}  // namespace lpr
