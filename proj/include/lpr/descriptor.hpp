#pragma once

#include <cstdint>

#include "lpr/geometry.hpp"
#include "lpr/grid.hpp"
#include "lpr/rng.hpp"

namespace lpr {

enum class Resolution { High, Low };

// Which side of a match the descriptor describes. Occupied cells are 1 on
// both sides; unoccupied cells are 0 for references and the (negative)
// weight w for queries, so query-free space penalizes reference occupancy.
enum class DescriptorRole { Reference, Query };

struct BevDescriptor {
    Grid grid;
    double cell_size = 0.0;  // meters per cell
    Resolution resolution = Resolution::High;
    double occupied_value = 1.0;
    double unoccupied_value = 0.0;

    int occupied_count() const;
};

struct DescriptorParams {
    int density_threshold = 1;        // d: column is occupied when count > d
    double unoccupied_weight = -0.15; // w: query-side unoccupied value
    int patch_edge = 10;              // m
    int patch_max_occupied = 20;      // c
    int pool_edge = 2;                // u
    std::uint64_t rng_seed = 1;

    void validate() const;
};

// Counts distinct occupied z-voxels per (x, y) column. Row index = x bin,
// column index = y bin; grid size ceil(2*wx/vx) x ceil(2*wy/vx).
Grid height_density_map(const VoxelSet& v);

BevDescriptor threshold_occupancy(const Grid& hdm, const DescriptorParams& params,
                                  DescriptorRole role, double cell_size);

// Caps each disjoint m x m patch (partitioned from the top-left corner,
// ragged edges included) at c occupied cells; the survivors are a uniform
// random subset drawn without replacement via a seeded shuffle prefix.
BevDescriptor patch_downsample(const BevDescriptor& desc, const DescriptorParams& params, Rng& rng);

// Mean over u x u blocks; edges are padded with the unoccupied value first.
BevDescriptor average_pool(const BevDescriptor& desc, int u);

// Rotates grid content by theta degrees (counterclockwise in the metric x-y
// plane) about the array center ((H-1)/2, (W-1)/2), i.e. the sensor origin.
// Nearest-neighbor sampling; cells mapping outside take the unoccupied value.
// Right-angle rotations are exact array rotations.
BevDescriptor rotate_descriptor(const BevDescriptor& desc, double theta_deg);

struct DescriptorPair {
    BevDescriptor high;
    BevDescriptor low;
};

// crop -> voxelize -> HDM -> threshold (reference polarity) ->
// patch_downsample -> (identity, average_pool).
DescriptorPair make_reference_descriptors(const PointCloud& cloud, const CropWindow& win, double vx,
                                          const DescriptorParams& params, std::uint64_t rng_stream);

// Query path: no patch downsampling, query polarity (unoccupied = w).
DescriptorPair make_query_descriptors(const PointCloud& cloud, const CropWindow& win, double vx,
                                      const DescriptorParams& params);

}  // namespace lpr
