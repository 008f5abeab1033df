#pragma once

#include <string>
#include <vector>

#include "lpr/geometry.hpp"

namespace lpr {

struct PoseRow {
    std::string id;
    Pose2D pose;
};

// CSV with mandatory header "id,x,y,yaw"; yaw in degrees. Ids must be unique.
std::vector<PoseRow> load_poses_csv(const std::string& path);
void write_poses_csv(const std::vector<PoseRow>& rows, const std::string& path);

}  // namespace lpr
