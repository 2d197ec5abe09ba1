#include <catch2/catch_amalgamated.hpp>

#include "gemsim/scenarios.hpp"

using namespace gemsim;

TEST_CASE("config parsing with sections, comments and units") {
    const std::string text = R"(
# simulator config
[memory]
cell_length = 5 cm
field_gradient = 15 uT/cm
diffusion_coefficient = 105 cm^2/s   # quoted at 80 C
expansion_ratio = 1.4

[grid]
image_px = 256
pitch = 15 um
)";
    ConfigMap cfg = ConfigMap::parse_string(text);
    Settings s = Settings::from_config(cfg);
    CHECK(s.memory.cell_length == Catch::Approx(0.05).epsilon(1e-14));
    CHECK(s.memory.diffusion_D == Catch::Approx(1.05e-2).epsilon(1e-12));
    CHECK(s.grid.pitch == Catch::Approx(15e-6).epsilon(1e-14));
    CHECK(s.memory.gradient_write == Catch::Approx(zeeman_gradient(1.5e-3, 2.0)).epsilon(1e-12));
    CHECK(s.memory.gradient_read < 0.0);
    CHECK(s.scenario.expansion_ratio == Catch::Approx(1.4));
}

TEST_CASE("defaults apply when keys are missing") {
    Settings s = Settings::from_config(ConfigMap::parse_string(""));
    CHECK(s.memory.cell_length == Catch::Approx(0.05));
    CHECK(s.grid.image_px == 256);
    CHECK(s.scenario.frame_count == 28);
    CHECK(std::isinf(s.memory.tau_longitudinal));
}

TEST_CASE("cli overrides replace file values") {
    ConfigMap cfg = ConfigMap::parse_string("[memory]\ntarget_absorption = 0.30\n");
    cfg.apply_override("memory.target_absorption=0.25");
    cfg.apply_override("grid.z_cells=1024");
    Settings s = Settings::from_config(cfg);
    CHECK(s.memory.target_absorption == Catch::Approx(0.25));
    CHECK(s.grid.z_cells == 1024);
    CHECK_THROWS_AS(cfg.apply_override("no_equals_sign"), std::invalid_argument);
}

TEST_CASE("unknown keys are listed") {
    ConfigMap cfg = ConfigMap::parse_string("[memory]\ncell_lenth = 5 cm\n");
    CHECK_THROWS_WITH(Settings::from_config(cfg),
                      Catch::Matchers::ContainsSubstring("memory.cell_lenth"));
}

TEST_CASE("malformed values are rejected") {
    CHECK_THROWS_AS(ConfigMap::parse_string("[memory\ncell_length = 5 cm\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS(ConfigMap::parse_string("just a line\n"), std::invalid_argument);
    {
        ConfigMap cfg = ConfigMap::parse_string("[memory]\ncell_length = five cm\n");
        CHECK_THROWS_AS(Settings::from_config(cfg), std::invalid_argument);
    }
    {
        // wrong dimension for the key
        ConfigMap cfg = ConfigMap::parse_string("[memory]\ncell_length = 5 us\n");
        CHECK_THROWS_AS(Settings::from_config(cfg), std::invalid_argument);
    }
    {
        ConfigMap cfg = ConfigMap::parse_string("[memory]\nflip_shape = spline\n");
        CHECK_THROWS_AS(Settings::from_config(cfg), std::invalid_argument);
    }
}

TEST_CASE("the default configuration passes every validation rule") {
    Settings s = Settings::from_config(ConfigMap::parse_string(""));
    for (const auto& r : validate_all(s)) {
        INFO(r.rule << ": " << r.detail);
        CHECK(r.pass);
    }
}

TEST_CASE("every shipped config file parses and passes validation") {
    for (const char* name : {"default.ini", "two_image_movie.ini", "delay_independence.ini",
                             "mtf_study.ini"}) {
        const std::string path = std::string(GEMSIM_SOURCE_DIR) + "/configs/" + name;
        INFO(path);
        Settings s = Settings::from_config(ConfigMap::parse_file(path));
        for (const auto& r : validate_all(s)) {
            INFO(r.rule << ": " << r.detail);
            CHECK(r.pass);
        }
    }
}

TEST_CASE("validation flags a dt that violates the phase-winding rule") {
    ConfigMap cfg = ConfigMap::parse_string("[grid]\ndt = 100 ns\n");
    Settings s = Settings::from_config(cfg);
    bool found = false;
    for (const auto& r : validate_settings(s))
        if (r.rule.find("phase winding") != std::string::npos) {
            found = true;
            CHECK_FALSE(r.pass);
            CHECK(r.detail.find("rad") != std::string::npos);  // computed bound is reported
        }
    CHECK(found);
}

TEST_CASE("validation flags an under-resolved chart") {
    ConfigMap cfg = ConfigMap::parse_string("[scenario]\nbar_widths = 60 um\n");
    Settings s = Settings::from_config(cfg);
    bool found = false;
    for (const auto& r : validate_settings(s))
        if (r.rule.find("4*pitch") != std::string::npos) {
            found = true;
            CHECK_FALSE(r.pass);
        }
    CHECK(found);
}

TEST_CASE("the resolved-config echo parses back to the same settings") {
    Settings s = Settings::from_config(ConfigMap::parse_string(""));
    // echo uses resolved keys, not the input schema, so parse and spot-check
    ConfigMap echoed = ConfigMap::parse_string(s.echo());
    CHECK(echoed.get_quantity("memory.cell_length", "m", 0.0) ==
          Catch::Approx(s.memory.cell_length).epsilon(1e-15));
    CHECK(echoed.get_quantity("grid.pitch", "m", 0.0) == Catch::Approx(s.grid.pitch).epsilon(1e-15));
    CHECK(echoed.get_int("scenario.frame_count", -1) == s.scenario.frame_count);
    CHECK(echoed.get_quantity("memory.gradient_write", "1", 0.0) ==
          Catch::Approx(s.memory.gradient_write).epsilon(1e-15));
}
