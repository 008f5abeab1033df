#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "lpr/correlation.hpp"
#include "lpr/descriptor.hpp"
#include "lpr/geometry.hpp"
#include "lpr/grid.hpp"
#include "lpr/pose_metrics.hpp"
#include "lpr/poses.hpp"

namespace lpr {

struct SearchConfig {
    CropWindow window;
    double voxel_size = 0.3;
    DescriptorParams descriptor;
    int rotation_step_deg = 10;  // k
    int top_n = 2;               // n
    double ref_spacing = 2.0;    // meters between kept reference poses

    void validate() const;
};

struct ReferenceScan {
    std::string id;
    PointCloud cloud;
    Pose2D pose;
};

struct ReferenceEntry {
    std::string id;
    Pose2D pose;
    Grid high_grid;  // patch-downsampled high-resolution descriptor
};

// Immutable after build; localize calls may run concurrently against it.
struct ReferenceIndex {
    SearchConfig config;
    std::vector<ReferenceEntry> refs;
    Grid mosaic;  // low-res tiles, row-major, unused tiles all-zero
    int tile_rows = 0;
    int tile_cols = 0;
    int tile_h = 0;  // low-res descriptor dimensions (one tile)
    int tile_w = 0;
    double high_cell = 0.0;
    double low_cell = 0.0;
    std::string config_echo;  // canonical text of the config used to build
    std::shared_ptr<const FftCorrelator> mosaic_correlator;

    int find_ref(const std::string& id) const;  // -1 when absent
};

// Greedy path-ordered thinning: keeps a pose when it is at least `spacing`
// from the last kept one. Returns kept indices.
std::vector<int> thin_by_spacing(const std::vector<Pose2D>& poses, double spacing);

using CloudLoader = std::function<PointCloud(const std::string& id)>;

// Thins the input traverse, builds reference descriptors and packs the
// low-res ones into a near-square mosaic (ceil(sqrt(N)) columns). The loader
// form fetches clouds lazily, only for kept references.
ReferenceIndex build_reference_index(const std::vector<PoseRow>& traverse, const CloudLoader& loader,
                                     const SearchConfig& config);
ReferenceIndex build_reference_index(const std::vector<ReferenceScan>& scans,
                                     const SearchConfig& config);

struct TileMax {
    int ref_index = -1;
    double score = -std::numeric_limits<double>::infinity();
    int shift_i = 0;  // intra-tile peak relative to the query-center cell
    int shift_j = 0;
};

// Best surface value over each used tile's block (a cell's nearest tile
// center is the tile containing it). One entry per reference.
std::vector<TileMax> per_tile_maxima(const CorrelationSurface& surface, const ReferenceIndex& index);

struct Candidate {
    int ref_index = -1;
    int theta_deg = 0;
    int shift_i = 0;  // low-res cells
    int shift_j = 0;
    double score = -std::numeric_limits<double>::infinity();
};

// Stage 1: rotation sweep of the low-res query over the mosaic; per
// reference the best (theta, shift, score) is kept, and the n best distinct
// references are returned in descending score order.
std::vector<Candidate> global_search(const ReferenceIndex& index, const BevDescriptor& q_low,
                                     int k_deg, int n);

struct MatchResult {
    std::string ref_id;
    int ref_index = -1;
    double theta_deg = 0.0;   // [0, 360)
    double x_shift = 0.0;     // meters, query displacement along the reference x axis
    double y_shift = 0.0;
    double score = 0.0;
};

struct LocalSearchResult {
    MatchResult match;
    CorrelationSurface best_surface;  // surface the winning peak came from
};

// Stage 2: full-resolution re-ranking of the stage-1 candidates. Ties are
// broken by the stage-1 score, then by lower reference index.
LocalSearchResult local_search(const ReferenceIndex& index, const BevDescriptor& q_high,
                               const std::vector<Candidate>& candidates, int k_deg);

struct LocalizeResult {
    PoseEstimate estimate;
    MatchResult match;
    CorrelationSurface best_surface;
};

LocalizeResult localize(const ReferenceIndex& index, const PointCloud& query_cloud, int k_deg,
                        int n);

// Index directory layout: manifest.txt, mosaic.grid, poses.csv,
// refs/ref_%05d.grid. The manifest embeds a verbatim config echo.
void save_index(const ReferenceIndex& index, const std::string& dir);
ReferenceIndex load_index(const std::string& dir);

inline constexpr int kIndexFormatVersion = 1;

}  // namespace lpr
