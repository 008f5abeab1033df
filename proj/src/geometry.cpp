#include "lpr/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "lpr/error.hpp"

namespace lpr {

void CropWindow::validate() const {
    if (!(wx > 0.0) || !(wy > 0.0)) {
        throw ConfigError("crop window half-extents must be positive");
    }
    if (!(h1 < h2)) {
        throw ConfigError("crop window requires h1 < h2");
    }
}

double normalize_deg(double deg) {
    double r = std::fmod(deg + 180.0, 360.0);
    if (r < 0.0) r += 360.0;
    return r - 180.0;
}

Pose2D make_pose(double x, double y, double yaw_deg) {
    return Pose2D{x, y, normalize_deg(yaw_deg)};
}

Pose2D pose_inverse(const Pose2D& p) {
    const double rad = -p.yaw_deg * M_PI / 180.0;
    const double c = std::cos(rad), s = std::sin(rad);
    return make_pose(-(c * p.x - s * p.y), -(s * p.x + c * p.y), -p.yaw_deg);
}

Pose2D pose_compose(const Pose2D& a, const Pose2D& b) {
    const double rad = a.yaw_deg * M_PI / 180.0;
    const double c = std::cos(rad), s = std::sin(rad);
    return make_pose(a.x + c * b.x - s * b.y, a.y + s * b.x + c * b.y, a.yaw_deg + b.yaw_deg);
}

int grid_dim(double extent, double cell) {
    if (!(cell > 0.0)) throw ConfigError("cell size must be positive");
    return std::max(1, static_cast<int>(std::ceil(extent / cell - 1e-9)));
}

namespace {

float read_le_float(const unsigned char* p) {
    std::uint32_t u = static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
                      static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
    float f;
    std::memcpy(&f, &u, sizeof f);
    return f;
}

void write_le_float(float f, unsigned char* p) {
    std::uint32_t u;
    std::memcpy(&u, &f, sizeof u);
    p[0] = static_cast<unsigned char>(u & 0xff);
    p[1] = static_cast<unsigned char>((u >> 8) & 0xff);
    p[2] = static_cast<unsigned char>((u >> 16) & 0xff);
    p[3] = static_cast<unsigned char>((u >> 24) & 0xff);
}

}  // namespace

PointCloud load_pointcloud_bin(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open scan file: " + path);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() % 16 != 0) {
        throw DataError("malformed scan file (size " + std::to_string(bytes.size()) +
                        " is not a multiple of 16): " + path);
    }
    PointCloud pc;
    pc.frame = Frame::Sensor;
    pc.points.reserve(bytes.size() / 16);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    for (std::size_t rec = 0; rec < bytes.size() / 16; ++rec, p += 16) {
        Point3 pt{read_le_float(p), read_le_float(p + 4), read_le_float(p + 8), read_le_float(p + 12)};
        if (!std::isfinite(pt.x) || !std::isfinite(pt.y) || !std::isfinite(pt.z) ||
            !std::isfinite(pt.intensity)) {
            throw DataError("malformed scan file (non-finite value in record " + std::to_string(rec) +
                            "): " + path);
        }
        pc.points.push_back(pt);
    }
    return pc;
}

void write_pointcloud_bin(const PointCloud& pc, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write scan file: " + path);
    unsigned char rec[16];
    for (const Point3& pt : pc.points) {
        write_le_float(static_cast<float>(pt.x), rec);
        write_le_float(static_cast<float>(pt.y), rec + 4);
        write_le_float(static_cast<float>(pt.z), rec + 8);
        write_le_float(static_cast<float>(pt.intensity), rec + 12);
        out.write(reinterpret_cast<const char*>(rec), 16);
    }
    if (!out) throw DataError("short write to scan file: " + path);
}

PointCloud load_pointcloud_ascii(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open scan file: " + path);
    PointCloud pc;
    pc.frame = Frame::Sensor;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        double v[4];
        int n = 0;
        while (n < 4 && (ss >> v[n])) ++n;
        std::string trailing;
        if (ss >> trailing) {
            throw DataError("parse error in " + path + " line " + std::to_string(lineno) +
                            ": trailing token '" + trailing + "'");
        }
        if (n == 0) continue;  // blank or comment-only line
        if (n < 3) {
            throw DataError("parse error in " + path + " line " + std::to_string(lineno) +
                            ": expected 3 or 4 numbers, got " + std::to_string(n));
        }
        pc.points.push_back(Point3{v[0], v[1], v[2], n == 4 ? v[3] : 0.0});
    }
    return pc;
}

PointCloud crop_window(const PointCloud& pc, const CropWindow& win) {
    win.validate();
    PointCloud out;
    out.frame = pc.frame;
    out.points.reserve(pc.points.size());
    for (const Point3& p : pc.points) {
        if (p.x >= -win.wx && p.x <= win.wx && p.y >= -win.wy && p.y <= win.wy && p.z >= win.h1 &&
            p.z <= win.h2 && p.intensity >= win.intensity_min) {
            out.points.push_back(p);
        }
    }
    return out;
}

VoxelSet voxelize(const PointCloud& pc, const CropWindow& win, double vx) {
    win.validate();
    if (!(vx > 0.0)) throw ConfigError("voxel size must be positive");

    VoxelSet vs;
    vs.vx = vx;
    vs.nx = grid_dim(2.0 * win.wx, vx);
    vs.ny = grid_dim(2.0 * win.wy, vx);
    vs.nz = grid_dim(win.h2 - win.h1, vx);

    auto bin = [vx](double v, int n) {
        int i = static_cast<int>(std::floor(v / vx));
        return std::clamp(i, 0, n - 1);
    };

    std::unordered_map<std::uint64_t, int> counts;
    counts.reserve(pc.points.size());
    for (const Point3& p : pc.points) {
        const int ix = bin(p.x + win.wx, vs.nx);
        const int iy = bin(p.y + win.wy, vs.ny);
        const int iz = bin(p.z - win.h1, vs.nz);
        const std::uint64_t key =
            (static_cast<std::uint64_t>(ix) * vs.ny + iy) * static_cast<std::uint64_t>(vs.nz) + iz;
        ++counts[key];
    }

    vs.voxels.reserve(counts.size());
    for (const auto& [key, count] : counts) {
        const int iz = static_cast<int>(key % vs.nz);
        const std::uint64_t xy = key / vs.nz;
        vs.voxels.push_back(VoxelEntry{static_cast<int>(xy / vs.ny), static_cast<int>(xy % vs.ny), iz, count});
    }
    std::sort(vs.voxels.begin(), vs.voxels.end(), [](const VoxelEntry& a, const VoxelEntry& b) {
        if (a.ix != b.ix) return a.ix < b.ix;
        if (a.iy != b.iy) return a.iy < b.iy;
        return a.iz < b.iz;
    });
    return vs;
}

PointCloud transform_cloud(const PointCloud& pc, const Pose2D& pose) {
    const double rad = pose.yaw_deg * M_PI / 180.0;
    const double c = std::cos(rad), s = std::sin(rad);
    PointCloud out;
    out.frame = pc.frame;
    out.points.reserve(pc.points.size());
    for (const Point3& p : pc.points) {
        out.points.push_back(
            Point3{c * p.x - s * p.y + pose.x, s * p.x + c * p.y + pose.y, p.z, p.intensity});
    }
    return out;
}

}  // namespace lpr
