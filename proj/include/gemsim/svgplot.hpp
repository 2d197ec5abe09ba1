#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gemsim {

/// Minimal standalone SVG plots: axes, 1-2-5 ticks, polylines, point
/// markers, vertical markers, a small legend. Enough to render the
/// similarity, contrast-decay and MTF figures without a plotting
/// dependency.
class SvgPlot {
public:
    SvgPlot(std::string title, std::string xlabel, std::string ylabel, int width = 720,
            int height = 480)
        : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)),
          width_(width), height_(height) {}

    enum class Style { line, points, both };

    void add_series(std::string name, std::vector<double> x, std::vector<double> y,
                    Style style = Style::line) {
        if (x.size() != y.size()) throw std::invalid_argument("SvgPlot: x/y size mismatch");
        series_.push_back({std::move(name), std::move(x), std::move(y), style});
    }

    void add_vline(double x, std::string label) { vlines_.push_back({x, std::move(label)}); }

    std::string render() const {
        double xmin = HUGE_VAL, xmax = -HUGE_VAL, ymin = HUGE_VAL, ymax = -HUGE_VAL;
        for (const auto& s : series_) {
            for (double v : s.x) { xmin = std::min(xmin, v); xmax = std::max(xmax, v); }
            for (double v : s.y) { ymin = std::min(ymin, v); ymax = std::max(ymax, v); }
        }
        if (!(xmin < xmax)) { xmin -= 0.5; xmax += 0.5; }
        if (!(ymin < ymax)) { ymin -= 0.5; ymax += 0.5; }
        const double ypad = 0.06 * (ymax - ymin);
        ymin -= ypad;
        ymax += ypad;

        const double left = 70, right = 20, top = 40, bottom = 50;
        const double pw = width_ - left - right, ph = height_ - top - bottom;
        auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
        auto py = [&](double y) { return top + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };

        std::ostringstream svg;
        svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\""
            << height_ << "\" viewBox=\"0 0 " << width_ << " " << height_ << "\">\n"
            << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

        svg << "<text x=\"" << width_ / 2 << "\" y=\"22\" text-anchor=\"middle\" "
            << "font-family=\"sans-serif\" font-size=\"15\">" << escape(title_) << "</text>\n";

        // frame
        svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\""
            << ph << "\" fill=\"none\" stroke=\"black\"/>\n";

        for (double t : ticks(xmin, xmax)) {
            svg << "<line x1=\"" << px(t) << "\" y1=\"" << top + ph << "\" x2=\"" << px(t)
                << "\" y2=\"" << top + ph + 5 << "\" stroke=\"black\"/>\n"
                << "<text x=\"" << px(t) << "\" y=\"" << top + ph + 20
                << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
                << fmt(t) << "</text>\n";
        }
        for (double t : ticks(ymin, ymax)) {
            svg << "<line x1=\"" << left - 5 << "\" y1=\"" << py(t) << "\" x2=\"" << left
                << "\" y2=\"" << py(t) << "\" stroke=\"black\"/>\n"
                << "<text x=\"" << left - 8 << "\" y=\"" << py(t) + 4
                << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(t)
                << "</text>\n";
        }
        svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << height_ - 10
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
            << escape(xlabel_) << "</text>\n";
        svg << "<text x=\"16\" y=\"" << top + ph / 2
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
            << "transform=\"rotate(-90 16 " << top + ph / 2 << ")\">" << escape(ylabel_)
            << "</text>\n";

        for (const auto& [x, label] : vlines_) {
            svg << "<line x1=\"" << px(x) << "\" y1=\"" << top << "\" x2=\"" << px(x) << "\" y2=\""
                << top + ph << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
            if (!label.empty())
                svg << "<text x=\"" << px(x) + 4 << "\" y=\"" << top + 14
                    << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"gray\">"
                    << escape(label) << "</text>\n";
        }

        for (size_t i = 0; i < series_.size(); ++i) {
            const auto& s = series_[i];
            const std::string color = palette(i);
            if (s.style != Style::points && s.x.size() > 1) {
                svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\" points=\"";
                for (size_t k = 0; k < s.x.size(); ++k)
                    svg << px(s.x[k]) << "," << py(s.y[k]) << " ";
                svg << "\"/>\n";
            }
            if (s.style != Style::line) {
                for (size_t k = 0; k < s.x.size(); ++k)
                    svg << "<circle cx=\"" << px(s.x[k]) << "\" cy=\"" << py(s.y[k])
                        << "\" r=\"2.6\" fill=\"" << color << "\"/>\n";
            }
            svg << "<text x=\"" << left + pw - 8 << "\" y=\"" << top + 16 + 15 * i
                << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\""
                << color << "\">" << escape(s.name) << "</text>\n";
        }

        svg << "</svg>\n";
        return svg.str();
    }

    void write(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("SvgPlot: cannot open " + path);
        f << render();
    }

private:
    struct Series {
        std::string name;
        std::vector<double> x, y;
        Style style;
    };

    static std::string fmt(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", v + 0.0);  // normalize -0
        return buf;
    }

    static std::string escape(const std::string& s) {
        std::string out;
        for (char c : s) {
            if (c == '&') out += "&amp;";
            else if (c == '<') out += "&lt;";
            else if (c == '>') out += "&gt;";
            else out += c;
        }
        return out;
    }

    static std::string palette(size_t i) {
        static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                       "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
        return colors[i % 8];
    }

    /// 1-2-5 tick positions covering [lo, hi].
    static std::vector<double> ticks(double lo, double hi) {
        const double span = hi - lo;
        double step = std::pow(10.0, std::floor(std::log10(span / 5.0)));
        for (double m : {1.0, 2.0, 5.0, 10.0}) {
            if (span / (step * m) <= 6.5) { step *= m; break; }
        }
        std::vector<double> out;
        for (double t = std::ceil(lo / step) * step; t <= hi + 1e-12 * span; t += step)
            out.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
        return out;
    }

    std::string title_, xlabel_, ylabel_;
    int width_, height_;
    std::vector<Series> series_;
    std::vector<std::pair<double, std::string>> vlines_;
};

}  // namespace gemsim
