#include "lpr/poses.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "lpr/error.hpp"

namespace lpr {

std::vector<PoseRow> load_poses_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open poses file: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "id,x,y,yaw") {
        throw DataError("poses file must start with header 'id,x,y,yaw': " + path);
    }
    std::vector<PoseRow> rows;
    std::unordered_set<std::string> seen;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string id, xs, ys, yaws;
        if (!std::getline(ss, id, ',') || !std::getline(ss, xs, ',') || !std::getline(ss, ys, ',') ||
            !std::getline(ss, yaws)) {
            throw DataError("malformed row in " + path + " line " + std::to_string(lineno));
        }
        try {
            rows.push_back(PoseRow{id, make_pose(std::stod(xs), std::stod(ys), std::stod(yaws))});
        } catch (const std::exception&) {
            throw DataError("malformed number in " + path + " line " + std::to_string(lineno));
        }
        if (!seen.insert(id).second) {
            throw DataError("duplicate id '" + id + "' in " + path);
        }
    }
    return rows;
}

void write_poses_csv(const std::vector<PoseRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write poses file: " + path);
    out << "id,x,y,yaw\n";
    char buf[160];
    for (const PoseRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g", r.pose.x, r.pose.y, r.pose.yaw_deg);
        out << r.id << ',' << buf << '\n';
    }
    if (!out) throw DataError("short write to poses file: " + path);
}

}  // namespace lpr
