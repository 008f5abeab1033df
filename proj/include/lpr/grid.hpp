#pragma once

#include <cassert>
#include <string>
#include <vector>

namespace lpr {

// Dense row-major 2-D array of doubles. Used for height-density maps, BEV
// descriptors, the reference mosaic and correlation surfaces.
struct Grid {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Grid() = default;
    Grid(int r, int c, double fill = 0.0)
        : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}

    double& at(int i, int j) {
        assert(i >= 0 && i < rows && j >= 0 && j < cols);
        return data[static_cast<std::size_t>(i) * cols + j];
    }
    double at(int i, int j) const {
        assert(i >= 0 && i < rows && j >= 0 && j < cols);
        return data[static_cast<std::size_t>(i) * cols + j];
    }

    std::size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }

    bool operator==(const Grid& other) const = default;
};

// Text dump: header line "rows cols cell_size", then one row per line.
// Values are written with enough digits to round-trip exactly.
void write_grid(const Grid& g, double cell_size, const std::string& path);
Grid read_grid(const std::string& path, double* cell_size_out);

}  // namespace lpr
