#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "gemsim/csv.hpp"
#include "gemsim/svgplot.hpp"

using namespace gemsim;

namespace fs = std::filesystem;

TEST_CASE("csv writer output round-trips exactly through the reader") {
    CsvWriter csv({"t", "value"});
    csv.add_row({1.0e-7, 0.33145001167617422});
    csv.add_row({2.0e-7, -4.0});
    const fs::path path = fs::temp_directory_path() / "gemsim_report.csv";
    csv.write(path.string());

    const CsvTable table = csv_read(path.string());
    REQUIRE(table.columns == std::vector<std::string>{"t", "value"});
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0][1] == 0.33145001167617422);  // %.17g is lossless
    CHECK(table.column("value")[1] == -4.0);
    CHECK(table.column_index("missing") == -1);
    CHECK_THROWS_AS(table.column("missing"), std::invalid_argument);
    fs::remove(path);
}

TEST_CASE("csv writer rejects ragged rows; reader rejects ragged files") {
    CsvWriter csv({"a", "b"});
    CHECK_THROWS_AS(csv.add_row({1.0}), std::invalid_argument);

    const fs::path path = fs::temp_directory_path() / "gemsim_ragged.csv";
    std::ofstream(path) << "a,b\n1,2\n3\n";
    CHECK_THROWS_WITH(csv_read(path.string()), Catch::Matchers::ContainsSubstring("ragged"));
    fs::remove(path);
}

TEST_CASE("svg plots carry the data and the furniture") {
    SvgPlot plot("Echo decay", "time (us)", "intensity");
    plot.add_series("data", {0.0, 1.0, 2.0, 3.0}, {1.0, 0.6, 0.3, 0.1}, SvgPlot::Style::both);
    plot.add_series("model", {0.0, 3.0}, {1.0, 0.05}, SvgPlot::Style::line);
    plot.add_vline(1.5, "flip");
    const std::string svg = plot.render();

    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK(svg.find("<circle") != std::string::npos);
    CHECK(svg.find("Echo decay") != std::string::npos);
    CHECK(svg.find("time (us)") != std::string::npos);
    CHECK(svg.find("flip") != std::string::npos);
    // both series named in the legend
    CHECK(svg.find(">data<") != std::string::npos);
    CHECK(svg.find(">model<") != std::string::npos);
}

TEST_CASE("svg plotting copes with degenerate inputs") {
    SECTION("a single point still renders") {
        SvgPlot plot("one", "x", "y");
        plot.add_series("p", {2.0}, {5.0}, SvgPlot::Style::points);
        const std::string svg = plot.render();
        CHECK(svg.find("<circle") != std::string::npos);
    }
    SECTION("mismatched series lengths are rejected") {
        SvgPlot plot("bad", "x", "y");
        CHECK_THROWS_AS(plot.add_series("p", {1.0, 2.0}, {1.0}), std::invalid_argument);
    }
    SECTION("labels are xml-escaped") {
        SvgPlot plot("a < b & c", "x", "y");
        plot.add_series("s", {0.0, 1.0}, {0.0, 1.0});
        const std::string svg = plot.render();
        CHECK(svg.find("a &lt; b &amp; c") != std::string::npos);
    }
}
