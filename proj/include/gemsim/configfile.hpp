#pragma once

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gemsim/memory_config.hpp"
#include "gemsim/units.hpp"

namespace gemsim {

// Flat key/value config with [section] headers. Values may carry a
// unit ("cell_length = 5 cm"); bare numbers are taken in the SI unit
// the key declares. '#' starts a comment.

class ConfigMap {
public:
    static ConfigMap parse_string(const std::string& text, const std::string& origin = "<string>") {
        ConfigMap cfg;
        std::istringstream in(text);
        std::string line, section;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw std::invalid_argument(origin + ":" + std::to_string(line_no) +
                                                ": malformed section header");
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument(origin + ":" + std::to_string(line_no) +
                                            ": expected key = value");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty())
                throw std::invalid_argument(origin + ":" + std::to_string(line_no) + ": empty key");
            cfg.values_[section.empty() ? key : section + "." + key] = value;
        }
        return cfg;
    }

    static ConfigMap parse_file(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw std::runtime_error("config: cannot open " + path);
        std::ostringstream ss;
        ss << f.rdbuf();
        return parse_string(ss.str(), path);
    }

    /// Apply a "section.key=value" override (CLI --set).
    void apply_override(const std::string& assignment) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("override must look like section.key=value: " + assignment);
        values_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        touch(key);
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    bool get_bool(const std::string& key, bool fallback) const {
        const std::string v = get_string(key, fallback ? "true" : "false");
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw std::invalid_argument("config: key '" + key + "' is not a boolean: " + v);
    }

    int get_int(const std::string& key, int fallback) const {
        touch(key);
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            size_t pos = 0;
            const int v = std::stoi(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw std::invalid_argument("config: key '" + key + "' is not an integer: " + it->second);
        }
    }

    /// Numeric value in the SI unit `si_unit`; the file may use any
    /// compatible unit. "inf" is accepted for unbounded quantities.
    double get_quantity(const std::string& key, const std::string& si_unit, double fallback) const {
        touch(key);
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return parse_quantity(key, it->second, si_unit);
    }

    std::vector<double> get_quantity_list(const std::string& key, const std::string& si_unit,
                                          std::vector<double> fallback) const {
        touch(key);
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<double> out;
        std::istringstream ls(it->second);
        std::string item;
        while (std::getline(ls, item, ',')) out.push_back(parse_quantity(key, trim(item), si_unit));
        if (out.empty()) throw std::invalid_argument("config: key '" + key + "' has an empty list");
        return out;
    }

    /// Keys never read by any getter; used to reject typos.
    std::vector<std::string> unknown_keys() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : values_)
            if (!consumed_.count(k)) out.push_back(k);
        return out;
    }

    const std::map<std::string, std::string>& raw() const { return values_; }

private:
    static std::string trim(const std::string& s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return "";
        const auto b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
    }

    static double parse_quantity(const std::string& key, const std::string& text,
                                 const std::string& si_unit) {
        if (text == "inf" || text == "infinity") return std::numeric_limits<double>::infinity();
        char* end = nullptr;
        const double value = std::strtod(text.c_str(), &end);
        if (end == text.c_str())
            throw std::invalid_argument("config: key '" + key + "' is not numeric: " + text);
        std::string unit = trim(std::string(end));
        if (unit.empty()) return value;  // bare number: already in si_unit
        try {
            return unit_convert(value, unit, si_unit);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("config: key '" + key + "': " + e.what());
        }
    }

    void touch(const std::string& key) const { consumed_.insert(key); }

    std::map<std::string, std::string> values_;
    mutable std::set<std::string> consumed_;
};

struct GridSettings {
    int image_px = 256;
    double pitch = 15e-6;  // m, at the cell plane
    int z_cells = 512;
    double dt = 0.0;       // s, 0 selects the phase-winding default
};

struct ScenarioSettings {
    // camera gating
    double frame_t0 = 100e-9;
    double frame_width = 100e-9;
    int frame_count = 28;

    // input pulses
    double pulse_width = 1.1e-6;
    double pulse_spacing = 1.0e-6;   // two-image movie
    double last_pulse_delay = 1.0e-6;  // peak of the last pulse before the flip
    double expansion_ratio = 1.4;

    // patterns, specified at the mask plane
    double magnification = 0.75;
    double letter_height = 2.0e-3;
    double chart_extent = 2.4e-3;
    std::vector<double> bar_widths = {500e-6, 440e-6, 373.3333333333333e-6, 320e-6};

    // delay-independence study
    std::vector<double> flip_delays = {0.8e-6, 1.1e-6, 1.4e-6};
    int contrast_frame_count = 21;

    // mtf study
    std::vector<double> mtf_times = {1.2e-6, 1.8e-6, 2.4e-6, 3.0e-6};
};

struct Settings {
    MemoryConfig memory;
    GridSettings grid;
    ScenarioSettings scenario;

    static Settings from_config(const ConfigMap& cfg) {
        Settings s;

        const double field_gradient =
            cfg.get_quantity("memory.field_gradient", "T/m", 1.5e-3);
        const double g_eff = cfg.get_quantity("memory.zeeman_g_eff", "1", 2.0);
        s.memory.cell_length = cfg.get_quantity("memory.cell_length", "m", s.memory.cell_length);
        s.memory.gradient_write = zeeman_gradient(field_gradient, g_eff);
        s.scenario.expansion_ratio =
            cfg.get_quantity("memory.expansion_ratio", "1", s.scenario.expansion_ratio);
        s.memory.set_expansion(s.scenario.expansion_ratio);
        s.memory.flip_duration = cfg.get_quantity("memory.flip_duration", "s", s.memory.flip_duration);
        const std::string flip_shape = cfg.get_string("memory.flip_shape", "ramp");
        if (flip_shape == "step")
            s.memory.step_flip = true;
        else if (flip_shape != "ramp")
            throw std::invalid_argument("config: memory.flip_shape must be ramp or step");
        s.memory.coupling = cfg.get_quantity("memory.coupling", "1", s.memory.coupling);
        s.memory.target_absorption =
            cfg.get_quantity("memory.target_absorption", "1", s.memory.target_absorption);
        s.memory.optical_depth = cfg.get_quantity("memory.optical_depth", "1", s.memory.optical_depth);
        s.memory.diffusion_D =
            cfg.get_quantity("memory.diffusion_coefficient", "m^2/s", s.memory.diffusion_D);
        s.memory.decoherence_rate =
            cfg.get_quantity("memory.decoherence_rate", "Hz", s.memory.decoherence_rate);
        s.memory.tau_longitudinal =
            cfg.get_quantity("memory.tau_longitudinal", "s", s.memory.tau_longitudinal);

        s.grid.image_px = cfg.get_int("grid.image_px", s.grid.image_px);
        s.grid.pitch = cfg.get_quantity("grid.pitch", "m", s.grid.pitch);
        s.grid.z_cells = cfg.get_int("grid.z_cells", s.grid.z_cells);
        s.grid.dt = cfg.get_quantity("grid.dt", "s", s.grid.dt);

        auto& sc = s.scenario;
        sc.frame_t0 = cfg.get_quantity("scenario.first_frame", "s", sc.frame_t0);
        sc.frame_width = cfg.get_quantity("scenario.frame_width", "s", sc.frame_width);
        sc.frame_count = cfg.get_int("scenario.frame_count", sc.frame_count);
        sc.pulse_width = cfg.get_quantity("scenario.pulse_width", "s", sc.pulse_width);
        sc.pulse_spacing = cfg.get_quantity("scenario.pulse_spacing", "s", sc.pulse_spacing);
        sc.last_pulse_delay = cfg.get_quantity("scenario.last_pulse_delay", "s", sc.last_pulse_delay);
        sc.magnification = cfg.get_quantity("scenario.magnification", "1", sc.magnification);
        sc.letter_height = cfg.get_quantity("scenario.letter_height", "m", sc.letter_height);
        sc.chart_extent = cfg.get_quantity("scenario.chart_extent", "m", sc.chart_extent);
        sc.bar_widths = cfg.get_quantity_list("scenario.bar_widths", "m", sc.bar_widths);
        sc.flip_delays = cfg.get_quantity_list("scenario.flip_delays", "s", sc.flip_delays);
        sc.contrast_frame_count = cfg.get_int("scenario.contrast_frame_count", sc.contrast_frame_count);
        sc.mtf_times = cfg.get_quantity_list("scenario.mtf_times", "s", sc.mtf_times);

        const auto unknown = cfg.unknown_keys();
        if (!unknown.empty()) {
            std::string msg = "config: unknown keys:";
            for (const auto& k : unknown) msg += " " + k;
            throw std::invalid_argument(msg);
        }
        return s;
    }

    /// Resolved-config echo written into every results directory.
    std::string echo() const {
        char buf[4096];
        std::snprintf(
            buf, sizeof buf,
            "[memory]\n"
            "cell_length = %.17g m\n"
            "gradient_write = %.17g\n"
            "gradient_read = %.17g\n"
            "expansion_ratio = %.17g\n"
            "flip_duration = %.17g s\n"
            "flip_shape = %s\n"
            "coupling = %.17g\n"
            "target_absorption = %.17g\n"
            "optical_depth = %.17g\n"
            "diffusion_coefficient = %.17g m^2/s\n"
            "decoherence_rate = %.17g Hz\n"
            "tau_longitudinal = %.17g s\n"
            "[grid]\n"
            "image_px = %d\n"
            "pitch = %.17g m\n"
            "z_cells = %d\n"
            "dt = %.17g s\n"
            "[scenario]\n"
            "first_frame = %.17g s\n"
            "frame_width = %.17g s\n"
            "frame_count = %d\n"
            "pulse_width = %.17g s\n"
            "pulse_spacing = %.17g s\n"
            "last_pulse_delay = %.17g s\n"
            "magnification = %.17g\n"
            "letter_height = %.17g m\n"
            "chart_extent = %.17g m\n",
            memory.cell_length, memory.gradient_write, memory.gradient_read,
            scenario.expansion_ratio, memory.flip_duration, memory.step_flip ? "step" : "ramp",
            memory.coupling, memory.target_absorption, memory.optical_depth, memory.diffusion_D,
            memory.decoherence_rate, memory.tau_longitudinal, grid.image_px, grid.pitch,
            grid.z_cells, grid.dt, scenario.frame_t0, scenario.frame_width, scenario.frame_count,
            scenario.pulse_width, scenario.pulse_spacing, scenario.last_pulse_delay,
            scenario.magnification, scenario.letter_height, scenario.chart_extent);
        std::string out(buf);
        auto list_line = [](const char* key, const std::vector<double>& vs) {
            std::string line = key;
            line += " =";
            char num[32];
            for (size_t i = 0; i < vs.size(); ++i) {
                std::snprintf(num, sizeof num, " %.17g", vs[i]);
                line += num;
                if (i + 1 < vs.size()) line += ",";
            }
            return line + "\n";
        };
        out += list_line("bar_widths", scenario.bar_widths);
        out += list_line("flip_delays", scenario.flip_delays);
        out += list_line("mtf_times", scenario.mtf_times);
        return out;
    }
};

/// One validation rule outcome for `validate` reports.
struct RuleResult {
    std::string rule;
    bool pass = false;
    std::string detail;
};

inline std::vector<RuleResult> validate_settings(const Settings& s) {
    std::vector<RuleResult> results;
    char buf[256];
    auto add = [&](const std::string& rule, bool pass, const std::string& detail) {
        results.push_back({rule, pass, detail});
    };

    add("cell_length > 0", s.memory.cell_length > 0.0,
        "cell_length = " + std::to_string(s.memory.cell_length) + " m");
    add("diffusion_D >= 0", s.memory.diffusion_D >= 0.0,
        "D = " + std::to_string(s.memory.diffusion_D * 1e4) + " cm^2/s");
    add("optical_depth >= 0", s.memory.optical_depth >= 0.0,
        "OD = " + std::to_string(s.memory.optical_depth));
    add("target_absorption in [0, 1)",
        s.memory.target_absorption >= 0.0 && s.memory.target_absorption < 1.0,
        "target = " + std::to_string(s.memory.target_absorption));
    add("gradients have opposite signs",
        s.memory.gradient_write != 0.0 && s.memory.gradient_read != 0.0 &&
            std::signbit(s.memory.gradient_write) != std::signbit(s.memory.gradient_read),
        "write/read = " + std::to_string(s.memory.gradient_write) + " / " +
            std::to_string(s.memory.gradient_read));

    const double eta_max =
        std::max(std::abs(s.memory.gradient_write), std::abs(s.memory.gradient_read));
    double dt = s.grid.dt;
    if (dt == 0.0) dt = std::min(0.08 / (eta_max * s.memory.cell_length), s.scenario.pulse_width / 50.0);
    const double winding = dt * eta_max * s.memory.cell_length;
    std::snprintf(buf, sizeof buf, "dt*|eta|*L = %.4g rad (dt = %.4g ns, bound 0.1)", winding, dt * 1e9);
    add("gradient phase winding per step < 0.1 rad", winding < 0.1, buf);

    add("pulse width > 0", s.scenario.pulse_width > 0.0,
        "width = " + std::to_string(s.scenario.pulse_width * 1e6) + " us");
    add("last pulse peaks before the flip ramp",
        s.scenario.last_pulse_delay > s.memory.flip_duration / 2.0,
        "delay = " + std::to_string(s.scenario.last_pulse_delay * 1e6) + " us, ramp half-width = " +
            std::to_string(s.memory.flip_duration / 2.0 * 1e6) + " us");

    double min_bar = std::numeric_limits<double>::infinity();
    for (double a : s.scenario.bar_widths) min_bar = std::min(min_bar, a * s.scenario.magnification);
    std::snprintf(buf, sizeof buf, "min line width %.1f um vs 4*pitch = %.1f um (cell plane)",
                  min_bar * 1e6, 4.0 * s.grid.pitch * 1e6);
    add("chart lines resolved: a >= 4*pitch", min_bar >= 4.0 * s.grid.pitch, buf);

    std::snprintf(buf, sizeof buf, "finest line spans %.1f px (>= 16 required)", min_bar / s.grid.pitch);
    // relative slack: unit-converted inputs may land an ulp under an
    // exact pixel count
    add("finest chart line spans >= 16 px", min_bar / s.grid.pitch >= 16.0 * (1.0 - 1e-12), buf);

    const double stroke = 0.15 * s.scenario.letter_height * s.scenario.magnification;
    std::snprintf(buf, sizeof buf, "stroke %.1f um vs 3*pitch = %.1f um", stroke * 1e6,
                  3.0 * s.grid.pitch * 1e6);
    add("letter stroke resolved: stroke >= 3*pitch", stroke >= 3.0 * s.grid.pitch, buf);

    add("frame window positive", s.scenario.frame_width > 0.0 && s.scenario.frame_count >= 1,
        std::to_string(s.scenario.frame_count) + " frames of " +
            std::to_string(s.scenario.frame_width * 1e9) + " ns");

    return results;
}

}  // namespace gemsim
