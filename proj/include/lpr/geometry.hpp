#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace lpr {

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double intensity = 0.0;
};

enum class Frame { Sensor, World };

struct PointCloud {
    std::vector<Point3> points;
    Frame frame = Frame::Sensor;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

// Axis-aligned crop volume around the sensor: |x| <= wx, |y| <= wy,
// h1 <= z <= h2, intensity >= intensity_min. Bounds are closed.
struct CropWindow {
    double wx = 18.0;
    double wy = 18.0;
    double h1 = 1.0;
    double h2 = 3.0;
    double intensity_min = -std::numeric_limits<double>::infinity();

    void validate() const;
};

struct VoxelEntry {
    int ix = 0;
    int iy = 0;
    int iz = 0;
    int count = 0;  // points that fell into this voxel
};

// Occupied voxels of a cropped cloud, indices anchored at the window corner
// (-wx, -wy, h1). Entries are unique and sorted by (ix, iy, iz).
struct VoxelSet {
    double vx = 0.0;  // voxel edge, meters
    int nx = 0;       // index ranges: ix in [0, nx), iy in [0, ny), iz in [0, nz)
    int ny = 0;
    int nz = 0;
    std::vector<VoxelEntry> voxels;
};

struct Pose2D {
    double x = 0.0;
    double y = 0.0;
    double yaw_deg = 0.0;  // normalized to [-180, 180)
};

// Wraps an angle into [-180, 180).
double normalize_deg(double deg);

Pose2D make_pose(double x, double y, double yaw_deg);
Pose2D pose_inverse(const Pose2D& p);
Pose2D pose_compose(const Pose2D& a, const Pose2D& b);

// Number of cells covering `extent` at `cell` size; tolerant of extents that
// are an exact multiple of the cell size up to floating-point noise.
int grid_dim(double extent, double cell);

// Binary scan format: consecutive little-endian float32 quadruples
// (x, y, z, intensity), no header.
PointCloud load_pointcloud_bin(const std::string& path);
void write_pointcloud_bin(const PointCloud& pc, const std::string& path);

// ASCII scan format: "x y z [intensity]" per line, '#' starts a comment.
PointCloud load_pointcloud_ascii(const std::string& path);

PointCloud crop_window(const PointCloud& pc, const CropWindow& win);

VoxelSet voxelize(const PointCloud& pc, const CropWindow& win, double vx);

// Rotates x-y by pose.yaw_deg, then translates by (pose.x, pose.y); z kept.
PointCloud transform_cloud(const PointCloud& pc, const Pose2D& pose);

}  // namespace lpr
