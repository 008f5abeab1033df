#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lpr/search.hpp"
#include "lpr/synth.hpp"

namespace lpr {

// Flat `key = value` configuration ('#' starts a comment). Unknown keys are
// rejected. Command-line --set overrides win over file values.
struct Config {
    SearchConfig search;

    double recall_threshold_m = 3.0;
    double sr_rte_m = 2.0;
    double sr_rre_deg = 5.0;

    std::uint64_t synth_seed = 1;
    double synth_path_length = 60.0;
    double synth_ref_spacing = 1.0;
    int synth_num_queries = 25;
    double synth_query_max_offset = 1.75;
    int synth_query_yaw_step_deg = 10;
    int synth_num_landmarks = 60;
    double synth_world_margin = 20.0;
    double synth_min_separation = 1.5;
    double synth_radius_min = 0.15;
    double synth_radius_max = 0.9;
    double synth_height_min = 2.5;
    double synth_height_max = 5.0;
    double synth_density = 400.0;
    double synth_sensor_range = 40.0;
    double synth_dropout = 0.0;
    double synth_noise_sigma = 0.0;
    int synth_points_budget = 40000;

    void validate() const;
};

Config default_config();

// Parses a config file into `base` (later keys win within the file).
void apply_config_file(Config& config, const std::string& path);

// Applies one "key=value" override.
void apply_override(Config& config, const std::string& assignment);

// Canonical text form: every key in fixed order, values formatted so that
// parse(dump(c)) reproduces c exactly.
std::string canonical_dump(const Config& config);

// World/sensor/layout derived from the synth_* keys; the world rectangle
// covers the path plus the margin on all sides.
BenchmarkLayout make_benchmark_layout(const Config& config);
SensorModel make_sensor_model(const Config& config);

}  // namespace lpr
