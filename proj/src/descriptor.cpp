#include "lpr/descriptor.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "lpr/error.hpp"

namespace lpr {

int BevDescriptor::occupied_count() const {
    int n = 0;
    for (double v : grid.data) {
        if (v == occupied_value) ++n;
    }
    return n;
}

void DescriptorParams::validate() const {
    if (density_threshold < 0) throw ConfigError("density threshold must be >= 0");
    if (patch_edge < 1) throw ConfigError("patch edge must be >= 1");
    if (patch_max_occupied < 0) throw ConfigError("patch occupancy cap must be >= 0");
    if (pool_edge < 1) throw ConfigError("pooling edge must be >= 1");
}

Grid height_density_map(const VoxelSet& v) {
    Grid hdm(v.nx, v.ny, 0.0);
    for (const VoxelEntry& e : v.voxels) {
        hdm.at(e.ix, e.iy) += 1.0;  // one per distinct z level
    }
    return hdm;
}

BevDescriptor threshold_occupancy(const Grid& hdm, const DescriptorParams& params,
                                  DescriptorRole role, double cell_size) {
    params.validate();
    BevDescriptor desc;
    desc.cell_size = cell_size;
    desc.resolution = Resolution::High;
    desc.occupied_value = 1.0;
    desc.unoccupied_value = role == DescriptorRole::Query ? params.unoccupied_weight : 0.0;
    desc.grid = Grid(hdm.rows, hdm.cols, desc.unoccupied_value);
    for (std::size_t k = 0; k < hdm.size(); ++k) {
        if (hdm.data[k] > static_cast<double>(params.density_threshold)) {
            desc.grid.data[k] = desc.occupied_value;
        }
    }
    return desc;
}

BevDescriptor patch_downsample(const BevDescriptor& desc, const DescriptorParams& params, Rng& rng) {
    params.validate();
    BevDescriptor out = desc;
    const int m = params.patch_edge;
    const int c = params.patch_max_occupied;

    std::vector<std::pair<int, int>> occupied;
    for (int pi = 0; pi < desc.grid.rows; pi += m) {
        for (int pj = 0; pj < desc.grid.cols; pj += m) {
            occupied.clear();
            const int iend = std::min(pi + m, desc.grid.rows);
            const int jend = std::min(pj + m, desc.grid.cols);
            for (int i = pi; i < iend; ++i) {
                for (int j = pj; j < jend; ++j) {
                    if (desc.grid.at(i, j) == desc.occupied_value) occupied.emplace_back(i, j);
                }
            }
            if (static_cast<int>(occupied.size()) <= c) continue;
            // Partial Fisher-Yates: the first c entries are the kept subset.
            for (int k = 0; k < c; ++k) {
                const auto pick = k + static_cast<int>(rng.next_below(occupied.size() - k));
                std::swap(occupied[k], occupied[pick]);
            }
            for (std::size_t k = c; k < occupied.size(); ++k) {
                out.grid.at(occupied[k].first, occupied[k].second) = desc.unoccupied_value;
            }
        }
    }
    return out;
}

BevDescriptor average_pool(const BevDescriptor& desc, int u) {
    if (u < 1) throw ConfigError("pooling edge must be >= 1");
    BevDescriptor out;
    out.cell_size = desc.cell_size * u;
    out.resolution = Resolution::Low;
    out.occupied_value = desc.occupied_value;
    out.unoccupied_value = desc.unoccupied_value;
    const int rows = (desc.grid.rows + u - 1) / u;
    const int cols = (desc.grid.cols + u - 1) / u;
    out.grid = Grid(rows, cols);
    const double inv = 1.0 / (u * u);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            double sum = 0.0;
            for (int di = 0; di < u; ++di) {
                for (int dj = 0; dj < u; ++dj) {
                    const int si = i * u + di;
                    const int sj = j * u + dj;
                    sum += (si < desc.grid.rows && sj < desc.grid.cols) ? desc.grid.at(si, sj)
                                                                        : desc.unoccupied_value;
                }
            }
            out.grid.at(i, j) = sum * inv;
        }
    }
    return out;
}

BevDescriptor rotate_descriptor(const BevDescriptor& desc, double theta_deg) {
    BevDescriptor out = desc;
    const double rad = theta_deg * M_PI / 180.0;
    const double c = std::cos(rad), s = std::sin(rad);
    const double ci = (desc.grid.rows - 1) * 0.5;
    const double cj = (desc.grid.cols - 1) * 0.5;
    for (int i = 0; i < desc.grid.rows; ++i) {
        const double u = i - ci;
        for (int j = 0; j < desc.grid.cols; ++j) {
            const double v = j - cj;
            // Inverse mapping: sample the source at R(-theta) * (u, v).
            const long si = std::lround(ci + c * u + s * v);
            const long sj = std::lround(cj - s * u + c * v);
            out.grid.at(i, j) = (si >= 0 && si < desc.grid.rows && sj >= 0 && sj < desc.grid.cols)
                                    ? desc.grid.at(static_cast<int>(si), static_cast<int>(sj))
                                    : desc.unoccupied_value;
        }
    }
    return out;
}

DescriptorPair make_reference_descriptors(const PointCloud& cloud, const CropWindow& win, double vx,
                                          const DescriptorParams& params, std::uint64_t rng_stream) {
    const VoxelSet voxels = voxelize(crop_window(cloud, win), win, vx);
    const Grid hdm = height_density_map(voxels);
    BevDescriptor high = threshold_occupancy(hdm, params, DescriptorRole::Reference, vx);
    Rng rng(rng_stream);
    high = patch_downsample(high, params, rng);
    BevDescriptor low = average_pool(high, params.pool_edge);
    return DescriptorPair{std::move(high), std::move(low)};
}

DescriptorPair make_query_descriptors(const PointCloud& cloud, const CropWindow& win, double vx,
                                      const DescriptorParams& params) {
    const VoxelSet voxels = voxelize(crop_window(cloud, win), win, vx);
    const Grid hdm = height_density_map(voxels);
    BevDescriptor high = threshold_occupancy(hdm, params, DescriptorRole::Query, vx);
    BevDescriptor low = average_pool(high, params.pool_edge);
    return DescriptorPair{std::move(high), std::move(low)};
}

}  // namespace lpr
