#include "lpr/grid.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "lpr/error.hpp"

namespace lpr {

namespace {

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_grid(const Grid& g, double cell_size, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write grid file: " + path);
    out << g.rows << ' ' << g.cols << ' ' << format_value(cell_size) << '\n';
    for (int i = 0; i < g.rows; ++i) {
        for (int j = 0; j < g.cols; ++j) {
            if (j) out << ' ';
            out << format_value(g.at(i, j));
        }
        out << '\n';
    }
    if (!out) throw DataError("short write to grid file: " + path);
}

Grid read_grid(const std::string& path, double* cell_size_out) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open grid file: " + path);
    int rows = 0, cols = 0;
    double cell = 0.0;
    if (!(in >> rows >> cols >> cell) || rows < 1 || cols < 1 || !(cell > 0.0)) {
        throw DataError("malformed grid header in " + path);
    }
    Grid g(rows, cols);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!(in >> g.data[k])) {
            throw DataError("truncated grid data in " + path);
        }
    }
    if (cell_size_out) *cell_size_out = cell;
    return g;
}

}  // namespace lpr
