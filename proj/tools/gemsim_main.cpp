// gemsim command line front end: scenario runs, config validation and
// static SVG plots of the exported CSV metrics.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gemsim/gemsim.hpp"

namespace fs = std::filesystem;
using namespace gemsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;  // invalid config, bad input files
constexpr int kExitUsage = 2;  // unknown scenario or malformed invocation

std::string timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    localtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
    return buf;
}

std::string output_root(const std::string& cli_out) {
    if (!cli_out.empty()) return cli_out;
    if (const char* env = std::getenv("GEMSIM_RESULTS_ROOT")) return env;
    return "results";
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    f << text;
}

Settings load_settings(const std::string& config_path, const std::vector<std::string>& overrides) {
    ConfigMap cfg = config_path.empty() ? ConfigMap::parse_string("")
                                        : ConfigMap::parse_file(config_path);
    for (const auto& o : overrides) cfg.apply_override(o);
    return Settings::from_config(cfg);
}

void write_frames(const FrameSet& frames, const fs::path& dir) {
    fs::create_directories(dir);
    char name[32];
    for (size_t i = 0; i < frames.frames.size(); ++i) {
        std::snprintf(name, sizeof name, "frame_%02zu.pgm", i + 1);
        write_pgm16(frames.frames[i].image, (dir / name).string());
    }
}

SvgPlot similarity_plot(const CsvTable& table) {
    SvgPlot plot("Similarity of retrieved frames", "frame number", "similarity S");
    plot.add_series("S_N", table.column("frame_index"), table.column("S_N"), SvgPlot::Style::both);
    plot.add_series("S_T", table.column("frame_index"), table.column("S_T"), SvgPlot::Style::both);
    const auto d = table.column("D");
    const auto idx = table.column("frame_index");
    size_t cross = 0;
    for (size_t i = 1; i < d.size(); ++i)
        if (d[i] < d[cross]) cross = i;
    if (!d.empty()) plot.add_vline(idx[cross], "crossing");
    return plot;
}

SvgPlot contrast_plot(const CsvTable& table) {
    SvgPlot plot("Contrast decay", "storage time (us)", "contrast C");
    auto t = table.column("t");
    for (double& v : t) v *= 1e6;
    plot.add_series("simulated", t, table.column("C"), SvgPlot::Style::points);
    plot.add_series("model (no free parameters)", t, table.column("C_pred"), SvgPlot::Style::line);
    return plot;
}

SvgPlot mtf_plot(const CsvTable& table) {
    SvgPlot plot("Modulation transfer function", "spatial frequency (lp/mm)", "contrast C");
    const auto freq = table.column("spatial_frequency");
    const auto times = table.column("t");
    const auto c = table.column("C");
    std::vector<double> distinct;
    for (double t : times) {
        bool seen = false;
        for (double d : distinct) seen |= d == t;
        if (!seen) distinct.push_back(t);
    }
    char label[48];
    for (double t : distinct) {
        std::vector<double> xs, ys;
        for (size_t i = 0; i < times.size(); ++i)
            if (times[i] == t) {
                xs.push_back(freq[i] * 1e-3);
                ys.push_back(c[i]);
            }
        std::snprintf(label, sizeof label, "t = %.2f us", t * 1e6);
        plot.add_series(label, xs, ys, SvgPlot::Style::both);
    }
    return plot;
}

int run_scenario(const std::string& name, const std::string& config_path,
                 const std::vector<std::string>& overrides, const std::string& out_flag,
                 int threads, bool dry_run, bool regen_golden, const std::string& golden_dir) {
    static const std::set<std::string> known = {"two_image_movie", "delay_independence",
                                                "mtf_study"};
    if (!known.count(name)) {
        std::cerr << "unknown scenario '" << name
                  << "' (expected two_image_movie, delay_independence or mtf_study)\n";
        return kExitUsage;
    }

    Settings settings = load_settings(config_path, overrides);

    const auto report = validate_all(settings);
    bool ok = true;
    for (const auto& r : report)
        if (!r.pass) {
            std::cerr << "config check failed: " << r.rule << " (" << r.detail << ")\n";
            ok = false;
        }
    if (!ok) return kExitError;

    if (dry_run) {
        std::cout << settings.echo();
        return kExitOk;
    }

    const fs::path out_dir = fs::path(output_root(out_flag)) / (name + "_" + timestamp());
    fs::create_directories(out_dir);
    write_text(out_dir / "manifest.ini", settings.echo());

    const fs::path golden(golden_dir);
    if (regen_golden) fs::create_directories(golden);

    if (name == "two_image_movie") {
        const auto result = run_two_image_movie(settings, threads);
        movie_csv(result).write((out_dir / "similarity.csv").string());
        trace_csv(result.combined).write((out_dir / "trace_combined.csv").string());
        trace_csv(result.trace_n).write((out_dir / "trace_N.csv").string());
        trace_csv(result.trace_t).write((out_dir / "trace_T.csv").string());
        spinwave_csv(result.spin_at_flip).write((out_dir / "spinwave_at_flip.csv").string());
        write_pgm16(result.ref_n, (out_dir / "ref_N.pgm").string());
        write_pgm16(result.ref_t, (out_dir / "ref_T.pgm").string());
        write_frames(result.frames, out_dir / "frames");
        similarity_plot(csv_read((out_dir / "similarity.csv").string()))
            .write((out_dir / "similarity.svg").string());
        if (regen_golden) movie_csv(result).write((golden / "movie_similarity.csv").string());
        int first_echo_end = 0;
        for (size_t i = 0; i < result.t_fraction.size(); ++i)
            if (result.t_fraction[i] >= 0.9) first_echo_end = static_cast<int>(i);
        const double rate =
            first_echo_end > 0
                ? (result.series.s_t.front() - result.series.s_t[first_echo_end]) / first_echo_end
                : 0.0;
        std::cout << "two_image_movie: " << result.frames.frames.size()
                  << " frames, crossing at frame " << result.series.crossing_frame
                  << ", S_T decays " << 100.0 * rate << " %/frame over the first echo\n";
    } else if (name == "delay_independence") {
        const auto result = run_delay_independence(settings, threads);
        char fname[64];
        for (const auto& curve : result.curves) {
            std::snprintf(fname, sizeof fname, "contrast_delay_%.1fus_%s.csv",
                          curve.flip_delay * 1e6,
                          curve.orientation == Orientation::vertical ? "V" : "H");
            contrast_csv(curve).write((out_dir / fname).string());
        }
        SvgPlot plot("Contrast vs storage time for three flip delays", "storage time (us)",
                     "contrast C");
        char label[48];
        for (size_t i = 0; i < settings.scenario.flip_delays.size(); ++i) {
            const auto& c = result.curves[i];
            std::vector<double> t_us(c.t_storage);
            for (double& v : t_us) v *= 1e6;
            std::snprintf(label, sizeof label, "delay %.1f us", c.flip_delay * 1e6);
            plot.add_series(label, t_us, c.c, SvgPlot::Style::points);
        }
        {
            const auto& c = result.curves[0];
            std::vector<double> t_us(c.t_storage);
            for (double& v : t_us) v *= 1e6;
            plot.add_series("model", t_us, c.c_model, SvgPlot::Style::line);
        }
        plot.write((out_dir / "contrast.svg").string());
        if (regen_golden) {
            const size_t mid = settings.scenario.flip_delays.size() / 2;
            contrast_csv(result.curves[mid]).write((golden / "delay_contrast.csv").string());
        }
        std::cout << "delay_independence: rms across delays " << result.rms_across_delays
                  << ", orientation rms " << result.rms_orientation << "\n";
    } else {
        const auto result = run_mtf_study(settings, threads);
        char fname[64];
        for (const auto& mask : result.masks) {
            std::snprintf(fname, sizeof fname, "contrast_mask_%.0fum.csv", mask.a_cell * 1e6);
            contrast_csv(mask).write((out_dir / fname).string());
        }
        mtf_csv(result.table).write((out_dir / "mtf_table.csv").string());
        mtf_plot(csv_read((out_dir / "mtf_table.csv").string()))
            .write((out_dir / "mtf.svg").string());
        SvgPlot decay("Contrast decay per line width", "storage time (us)", "contrast C");
        char label[48];
        for (const auto& mask : result.masks) {
            std::vector<double> t_us(mask.t_storage);
            for (double& v : t_us) v *= 1e6;
            std::snprintf(label, sizeof label, "a = %.0f um", mask.a_cell * 1e6);
            decay.add_series(label, t_us, mask.c, SvgPlot::Style::points);
            std::snprintf(label, sizeof label, "model %.0f um", mask.a_cell * 1e6);
            decay.add_series(label, t_us, mask.c_model, SvgPlot::Style::line);
        }
        decay.write((out_dir / "contrast_decay.svg").string());
        if (regen_golden) mtf_csv(result.table).write((golden / "mtf_table.csv").string());
        double worst = 0.0;
        for (double r : result.rms_residual) worst = std::max(worst, r);
        std::cout << "mtf_study: worst model residual rms " << worst << "\n";
    }

    std::cout << "results in " << out_dir.string() << "\n";
    return kExitOk;
}

int run_plot(const std::string& csv_path, const std::string& kind, std::string out_path) {
    const CsvTable table = csv_read(csv_path);
    if (table.rows.empty()) {
        std::cerr << "no data: " << csv_path << " has a header but no rows\n";
        return kExitError;
    }
    auto require_columns = [&](std::initializer_list<const char*> names) {
        for (const char* n : names)
            if (table.column_index(n) < 0)
                throw std::invalid_argument("csv schema mismatch for kind '" + kind +
                                            "': missing column " + n);
    };
    if (out_path.empty()) out_path = csv_path + ".svg";
    if (kind == "similarity") {
        require_columns({"frame_index", "t", "S_N", "S_T", "D"});
        similarity_plot(table).write(out_path);
    } else if (kind == "contrast") {
        require_columns({"a", "t", "C", "C_pred"});
        contrast_plot(table).write(out_path);
    } else if (kind == "mtf") {
        require_columns({"spatial_frequency", "t", "C"});
        mtf_plot(table).write(out_path);
    } else {
        std::cerr << "unknown plot kind '" << kind << "'\n";
        return kExitUsage;
    }
    std::cout << "wrote " << out_path << "\n";
    return kExitOk;
}

int run_validate(const std::string& config_path) {
    Settings settings = load_settings(config_path, {});
    const auto report = validate_all(settings);
    bool all_pass = true;
    for (const auto& r : report) {
        std::printf("%-45s %s  %s\n", r.rule.c_str(), r.pass ? "PASS" : "FAIL", r.detail.c_str());
        all_pass &= r.pass;
    }
    return all_pass ? kExitOk : kExitError;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gradient echo memory image-storage simulator"};
    app.require_subcommand(1);

    std::string scenario, config_path, out_dir, golden_dir = "tests/golden";
    std::vector<std::string> overrides;
    int threads = 1;
    bool dry_run = false, regen_golden = false;

    auto* run = app.add_subcommand("run", "run a scenario and write its results directory");
    run->add_option("scenario", scenario, "two_image_movie | delay_independence | mtf_study")
        ->required();
    run->add_option("--config", config_path, "config file (defaults apply when omitted)");
    run->add_option("--out", out_dir, "output root (default $GEMSIM_RESULTS_ROOT or ./results)");
    run->add_option("--set", overrides, "override a key, e.g. --set memory.expansion_ratio=1.4");
    run->add_option("--threads", threads, "worker threads for image convolutions")
        ->check(CLI::Range(1, 64));
    run->add_flag("--dry-run", dry_run, "print the resolved config and exit");
    run->add_flag("--regen-golden", regen_golden, "rewrite golden CSVs under --golden-dir");
    run->add_option("--golden-dir", golden_dir, "golden file directory (with --regen-golden)");

    std::string csv_path, kind, plot_out;
    auto* plot = app.add_subcommand("plot", "render a metrics CSV as a standalone SVG");
    plot->add_option("csv", csv_path, "input CSV")->required();
    plot->add_option("--kind", kind, "similarity | contrast | mtf")->required();
    plot->add_option("--out", plot_out, "output SVG path (default <csv>.svg)");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "check a config against every constraint");
    validate->add_option("config", validate_path, "config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (run->parsed())
            return run_scenario(scenario, config_path, overrides, out_dir, threads, dry_run,
                                regen_golden, golden_dir);
        if (plot->parsed()) return run_plot(csv_path, kind, plot_out);
        if (validate->parsed()) return run_validate(validate_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitUsage;
}
