#include "lpr/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "lpr/error.hpp"

namespace lpr {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

long long parse_int(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(value, &pos);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected integer, got '" + value + "'");
    }
    if (pos != value.size()) {
        throw ConfigError("config key '" + key + "': expected integer, got '" + value + "'");
    }
    return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    std::uint64_t v = 0;
    try {
        v = std::stoull(value, &pos);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected unsigned integer, got '" + value + "'");
    }
    if (pos != value.size()) {
        throw ConfigError("config key '" + key + "': expected unsigned integer, got '" + value + "'");
    }
    return v;
}

double parse_real(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &pos);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected number, got '" + value + "'");
    }
    if (pos != value.size()) {
        throw ConfigError("config key '" + key + "': expected number, got '" + value + "'");
    }
    return v;
}

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct KeyDef {
    const char* name;
    std::function<void(Config&, const std::string&)> set;
    std::function<std::string(const Config&)> get;
};

const std::vector<KeyDef>& key_defs() {
    static const std::vector<KeyDef> defs = [] {
        std::vector<KeyDef> d;
        auto real = [&d](const char* name, auto getter) {
            d.push_back(KeyDef{
                name,
                [name, getter](Config& c, const std::string& v) { getter(c) = parse_real(name, v); },
                [getter](const Config& c) { return format_real(getter(const_cast<Config&>(c))); }});
        };
        auto integer = [&d](const char* name, auto getter) {
            d.push_back(KeyDef{name,
                               [name, getter](Config& c, const std::string& v) {
                                   getter(c) = static_cast<int>(parse_int(name, v));
                               },
                               [getter](const Config& c) {
                                   return std::to_string(getter(const_cast<Config&>(c)));
                               }});
        };
        auto u64 = [&d](const char* name, auto getter) {
            d.push_back(KeyDef{
                name,
                [name, getter](Config& c, const std::string& v) { getter(c) = parse_u64(name, v); },
                [getter](const Config& c) {
                    return std::to_string(getter(const_cast<Config&>(c)));
                }});
        };

        real("crop_wx", [](Config& c) -> double& { return c.search.window.wx; });
        real("crop_wy", [](Config& c) -> double& { return c.search.window.wy; });
        real("crop_h1", [](Config& c) -> double& { return c.search.window.h1; });
        real("crop_h2", [](Config& c) -> double& { return c.search.window.h2; });
        real("intensity_min", [](Config& c) -> double& { return c.search.window.intensity_min; });
        real("voxel_size", [](Config& c) -> double& { return c.search.voxel_size; });
        integer("density_threshold",
                [](Config& c) -> int& { return c.search.descriptor.density_threshold; });
        real("unoccupied_weight",
             [](Config& c) -> double& { return c.search.descriptor.unoccupied_weight; });
        integer("patch_edge", [](Config& c) -> int& { return c.search.descriptor.patch_edge; });
        integer("patch_max_occupied",
                [](Config& c) -> int& { return c.search.descriptor.patch_max_occupied; });
        integer("pool_edge", [](Config& c) -> int& { return c.search.descriptor.pool_edge; });
        u64("rng_seed", [](Config& c) -> std::uint64_t& { return c.search.descriptor.rng_seed; });
        integer("rotation_step_deg", [](Config& c) -> int& { return c.search.rotation_step_deg; });
        integer("top_n", [](Config& c) -> int& { return c.search.top_n; });
        real("ref_spacing", [](Config& c) -> double& { return c.search.ref_spacing; });
        real("recall_threshold_m", [](Config& c) -> double& { return c.recall_threshold_m; });
        real("sr_rte_m", [](Config& c) -> double& { return c.sr_rte_m; });
        real("sr_rre_deg", [](Config& c) -> double& { return c.sr_rre_deg; });
        u64("synth_seed", [](Config& c) -> std::uint64_t& { return c.synth_seed; });
        real("synth_path_length", [](Config& c) -> double& { return c.synth_path_length; });
        real("synth_ref_spacing", [](Config& c) -> double& { return c.synth_ref_spacing; });
        integer("synth_num_queries", [](Config& c) -> int& { return c.synth_num_queries; });
        real("synth_query_max_offset",
             [](Config& c) -> double& { return c.synth_query_max_offset; });
        integer("synth_query_yaw_step_deg",
                [](Config& c) -> int& { return c.synth_query_yaw_step_deg; });
        integer("synth_num_landmarks", [](Config& c) -> int& { return c.synth_num_landmarks; });
        real("synth_world_margin", [](Config& c) -> double& { return c.synth_world_margin; });
        real("synth_min_separation", [](Config& c) -> double& { return c.synth_min_separation; });
        real("synth_radius_min", [](Config& c) -> double& { return c.synth_radius_min; });
        real("synth_radius_max", [](Config& c) -> double& { return c.synth_radius_max; });
        real("synth_height_min", [](Config& c) -> double& { return c.synth_height_min; });
        real("synth_height_max", [](Config& c) -> double& { return c.synth_height_max; });
        real("synth_density", [](Config& c) -> double& { return c.synth_density; });
        real("synth_sensor_range", [](Config& c) -> double& { return c.synth_sensor_range; });
        real("synth_dropout", [](Config& c) -> double& { return c.synth_dropout; });
        real("synth_noise_sigma", [](Config& c) -> double& { return c.synth_noise_sigma; });
        integer("synth_points_budget", [](Config& c) -> int& { return c.synth_points_budget; });
        return d;
    }();
    return defs;
}

const KeyDef& find_key(const std::string& name) {
    for (const KeyDef& def : key_defs()) {
        if (name == def.name) return def;
    }
    throw ConfigError("unknown config key '" + name + "'");
}

}  // namespace

void Config::validate() const {
    search.validate();
    if (!(recall_threshold_m > 0.0)) throw ConfigError("recall threshold must be positive");
    if (!(sr_rte_m > 0.0) || !(sr_rre_deg > 0.0)) throw ConfigError("SR thresholds must be positive");
    make_sensor_model(*this).validate();
    if (synth_num_queries < 0) throw ConfigError("synth query count must be >= 0");
    if (synth_num_landmarks < 0) throw ConfigError("synth landmark count must be >= 0");
    if (!(synth_path_length > 0.0)) throw ConfigError("synth path length must be positive");
    if (!(synth_ref_spacing > 0.0)) throw ConfigError("synth reference spacing must be positive");
    if (synth_query_yaw_step_deg <= 0 || 360 % synth_query_yaw_step_deg != 0) {
        throw ConfigError("synth query yaw step must divide 360");
    }
    if (!(synth_radius_min > 0.0) || synth_radius_max < synth_radius_min) {
        throw ConfigError("synth landmark radius range is invalid");
    }
    if (!(synth_height_min > 0.0) || synth_height_max < synth_height_min) {
        throw ConfigError("synth landmark height range is invalid");
    }
    if (!(synth_density > 0.0)) throw ConfigError("synth point density must be positive");
}

Config default_config() { return Config{}; }

void apply_config_file(Config& config, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config file " + path + " line " + std::to_string(lineno) +
                              ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ConfigError("config file " + path + " line " + std::to_string(lineno) +
                              ": expected 'key = value'");
        }
        find_key(key).set(config, value);
    }
}

void apply_override(Config& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("override must look like key=value, got '" + assignment + "'");
    }
    const std::string key = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));
    if (key.empty() || value.empty()) {
        throw ConfigError("override must look like key=value, got '" + assignment + "'");
    }
    find_key(key).set(config, value);
}

std::string canonical_dump(const Config& config) {
    std::ostringstream os;
    for (const KeyDef& def : key_defs()) {
        os << def.name << " = " << def.get(config) << '\n';
    }
    return os.str();
}

BenchmarkLayout make_benchmark_layout(const Config& config) {
    BenchmarkLayout layout;
    layout.path_length = config.synth_path_length;
    layout.ref_spacing = config.synth_ref_spacing;
    layout.num_queries = config.synth_num_queries;
    layout.query_max_offset = config.synth_query_max_offset;
    layout.query_yaw_step_deg = config.synth_query_yaw_step_deg;
    layout.world.num_landmarks = config.synth_num_landmarks;
    layout.world.x_min = -config.synth_world_margin;
    layout.world.x_max = config.synth_path_length + config.synth_world_margin;
    layout.world.y_min = -config.synth_world_margin;
    layout.world.y_max = config.synth_world_margin;
    layout.world.min_separation = config.synth_min_separation;
    layout.world.radius_min = config.synth_radius_min;
    layout.world.radius_max = config.synth_radius_max;
    layout.world.height_min = config.synth_height_min;
    layout.world.height_max = config.synth_height_max;
    layout.world.density = config.synth_density;
    return layout;
}

SensorModel make_sensor_model(const Config& config) {
    SensorModel sensor;
    sensor.max_range = config.synth_sensor_range;
    sensor.dropout = config.synth_dropout;
    sensor.noise_sigma = config.synth_noise_sigma;
    sensor.points_budget = config.synth_points_budget;
    return sensor;
}

}  // namespace lpr
