#include <doctest.h>

#include "lpr/config.hpp"
#include "lpr/error.hpp"
#include "test_helpers.hpp"

using namespace lpr;
using lpr::test::TempDir;

TEST_CASE("defaults match the documented values") {
    const Config c = default_config();
    CHECK(c.search.window.wx == 18.0);
    CHECK(c.search.voxel_size == 0.3);
    CHECK(c.search.descriptor.unoccupied_weight == -0.15);
    CHECK(c.search.descriptor.patch_edge == 10);
    CHECK(c.search.descriptor.patch_max_occupied == 20);
    CHECK(c.search.descriptor.pool_edge == 2);
    CHECK(c.search.rotation_step_deg == 10);
    CHECK(c.search.top_n == 2);
    CHECK(c.search.ref_spacing == 2.0);
    CHECK(c.recall_threshold_m == 3.0);
    // 2 * 18 / 0.3 -> the 120x120 / 60x60 descriptor pair.
    CHECK(grid_dim(2.0 * c.search.window.wx, c.search.voxel_size) == 120);
    c.validate();
}

TEST_CASE("config file parsing") {
    TempDir dir("config");
    const std::string path = dir.str() + "/test.cfg";

    SUBCASE("values, comments, and blank lines") {
        lpr::test::write_file(path,
                              "# preset\nvoxel_size = 0.75\ndensity_threshold = 1 # urban\n\n"
                              "crop_wx=45\ncrop_wy =  45\n");
        Config c = default_config();
        apply_config_file(c, path);
        CHECK(c.search.voxel_size == 0.75);
        CHECK(c.search.descriptor.density_threshold == 1);
        CHECK(c.search.window.wx == 45.0);
        CHECK(c.search.window.wy == 45.0);
    }

    SUBCASE("unknown keys are rejected") {
        lpr::test::write_file(path, "voxel_sized = 0.75\n");
        Config c = default_config();
        CHECK_THROWS_AS(apply_config_file(c, path), ConfigError);
    }

    SUBCASE("malformed values are rejected") {
        lpr::test::write_file(path, "top_n = two\n");
        Config c = default_config();
        CHECK_THROWS_AS(apply_config_file(c, path), ConfigError);
        lpr::test::write_file(path, "voxel_size = 0.3m\n");
        CHECK_THROWS_AS(apply_config_file(c, path), ConfigError);
    }

    SUBCASE("missing file is a config error") {
        Config c = default_config();
        CHECK_THROWS_AS(apply_config_file(c, dir.str() + "/absent.cfg"), ConfigError);
    }
}

TEST_CASE("overrides win over file values") {
    TempDir dir("config_ovr");
    const std::string path = dir.str() + "/base.cfg";
    lpr::test::write_file(path, "voxel_size = 0.75\n");
    Config c = default_config();
    apply_config_file(c, path);
    apply_override(c, "voxel_size=1.3");
    CHECK(c.search.voxel_size == 1.3);
    CHECK_THROWS_AS(apply_override(c, "nonsense"), ConfigError);
    CHECK_THROWS_AS(apply_override(c, "bogus_key=1"), ConfigError);
}

TEST_CASE("canonical dump round-trips") {
    Config c = default_config();
    apply_override(c, "voxel_size=0.75");
    apply_override(c, "synth_seed=12345");
    apply_override(c, "unoccupied_weight=-0.2");
    const std::string dump = canonical_dump(c);

    TempDir dir("config_rt");
    const std::string path = dir.str() + "/dump.cfg";
    lpr::test::write_file(path, dump);
    Config back = default_config();
    apply_config_file(back, path);
    CHECK(canonical_dump(back) == dump);
    CHECK(back.search.voxel_size == 0.75);
    CHECK(back.synth_seed == 12345);
    CHECK(back.search.descriptor.unoccupied_weight == -0.2);
}

TEST_CASE("validation catches bad combinations") {
    Config c = default_config();
    c.search.rotation_step_deg = 7;
    CHECK_THROWS_AS(c.validate(), ConfigError);

    c = default_config();
    c.search.window.h1 = 5.0;  // h1 >= h2
    CHECK_THROWS_AS(c.validate(), ConfigError);

    c = default_config();
    c.search.top_n = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);

    c = default_config();
    c.synth_dropout = 1.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}
