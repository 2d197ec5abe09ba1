#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "gemsim/gem1d.hpp"
#include "gemsim/image.hpp"

namespace gemsim {

enum class Orientation { vertical, horizontal };  // direction the stripes run

/// Three-bar resolution chart. `a` is the line width (half period); the
/// spatial frequency is 1/(2a) line pairs per metre. Bars of length
/// `extent` run along the orientation axis. The default renders bright
/// bars on a dark field; `inverted` renders dark bars on a finite
/// bright field one line width wider than the bar group, the chrome-
/// on-glass layout of physical test charts. Only the inverted layout
/// lets the contrast swing negative once diffusion floods the central
/// dark bar.
struct BarChart {
    double a = 375e-6;
    int n_lines = 3;
    Orientation orientation = Orientation::vertical;
    double extent = 1.2e-3;
    bool inverted = false;

    double spatial_frequency() const { return 1.0 / (2.0 * a); }
};

/// Binary chart raster. Bright bars of width a separated by dark gaps of
/// width a, centred so the middle bar's centre lies exactly on the
/// centre column (index width/2); a pixel is bright when its centre
/// falls in [c - a/2, c + a/2) around a bar centre. The comparison is
/// carried out in pixel units with a 1e-9 px bias so that edges landing
/// exactly between or on pixel centres resolve the same way regardless
/// of rounding in the physical inputs.
inline ImageField make_barchart(const BarChart& chart, double pitch, int width_px = 256,
                                int height_px = 256) {
    if (!(chart.a >= 4.0 * pitch))
        throw std::invalid_argument("make_barchart: line width under-resolved, need a >= 4*pitch (a = " +
                                    std::to_string(chart.a) + ", pitch = " + std::to_string(pitch) + ")");
    if (chart.n_lines < 1) throw std::invalid_argument("make_barchart: need at least one line");

    ImageField img(width_px, height_px, pitch);
    const bool vertical = chart.orientation == Orientation::vertical;
    const int n_across = vertical ? width_px : height_px;
    const int n_along = vertical ? height_px : width_px;

    constexpr double eps = 1e-9;  // pixel units
    const double a_px = chart.a / pitch;
    const double half_extent_px = chart.extent / (2.0 * pitch);

    std::vector<bool> stripe(n_across, false);
    const double field_half_px = chart.n_lines * a_px;  // bar group plus one line width
    for (int i = 0; i < n_across; ++i) {
        const double u = i - n_across / 2;
        bool on_bar = false;
        for (int k = 0; k < chart.n_lines; ++k) {
            const double c = (2.0 * k - (chart.n_lines - 1)) * a_px;
            if (u >= c - a_px / 2.0 - eps && u < c + a_px / 2.0 - eps) {
                on_bar = true;
                break;
            }
        }
        if (chart.inverted)
            stripe[i] = !on_bar && u >= -field_half_px - eps && u < field_half_px - eps;
        else
            stripe[i] = on_bar;
    }
    for (int j = 0; j < n_along; ++j) {
        const double v = j - n_along / 2;
        if (std::abs(v) > half_extent_px + eps) continue;
        for (int i = 0; i < n_across; ++i) {
            if (!stripe[i]) continue;
            if (vertical)
                img.at(i, j) = 1.0;
            else
                img.at(j, i) = 1.0;
        }
    }
    return img;
}

/// Stroke-drawn letter mask. Geometry is fixed here so results are
/// reproducible: box aspect 1:1.2 (width:height), stroke width 15% of
/// the height unless overridden.
struct LetterMask {
    char glyph = 'T';
    double height = 1.2e-3;
    double stroke_width = 0.0;  // 0 selects 0.15 * height

    double width() const { return height / 1.2; }
    double stroke() const { return stroke_width > 0.0 ? stroke_width : 0.15 * height; }
};

namespace detail {

struct Segment {
    double x0, y0, x1, y1, half_width;

    bool contains(double x, double y) const {
        const double dx = x1 - x0, dy = y1 - y0;
        const double len2 = dx * dx + dy * dy;
        double t = len2 > 0.0 ? ((x - x0) * dx + (y - y0) * dy) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        const double px = x0 + t * dx, py = y0 + t * dy;
        const double d2 = (x - px) * (x - px) + (y - py) * (y - py);
        // small relative slack so stroke edges that graze pixel centres
        // rasterize the same way independent of rounding upstream
        return d2 <= half_width * half_width * (1.0 + 1e-9);
    }
};

inline std::vector<Segment> letter_strokes(char glyph, double W, double H, double sw) {
    const double hw = sw / 2.0;
    // y grows upward; segments centred on the stroke axis, so the glyph
    // fits the box [-W/2, W/2] x [-H/2, H/2].
    switch (glyph) {
        case 'T':
            return {
                {-W / 2 + hw, H / 2 - hw, W / 2 - hw, H / 2 - hw, hw},  // top bar
                {0.0, H / 2 - hw, 0.0, -H / 2 + hw, hw},                // stem
            };
        case 'N':
            return {
                {-W / 2 + hw, -H / 2 + hw, -W / 2 + hw, H / 2 - hw, hw},  // left bar
                {W / 2 - hw, -H / 2 + hw, W / 2 - hw, H / 2 - hw, hw},    // right bar
                {-W / 2 + hw, H / 2 - hw, W / 2 - hw, -H / 2 + hw, hw},   // diagonal
            };
        default:
            throw std::invalid_argument(std::string("make_letter: unsupported glyph '") + glyph +
                                        "' (only N and T are defined)");
    }
}

}  // namespace detail

/// Binary letter raster; a pixel is bright when its centre lies within
/// any stroke capsule.
inline ImageField make_letter(const LetterMask& mask, double pitch, int width_px = 256,
                              int height_px = 256) {
    if (!(mask.stroke() >= 3.0 * pitch))
        throw std::invalid_argument("make_letter: stroke under-resolved, need stroke >= 3*pitch");
    const auto strokes = detail::letter_strokes(mask.glyph, mask.width(), mask.height, mask.stroke());
    ImageField img(width_px, height_px, pitch);
    for (int j = 0; j < height_px; ++j) {
        const double y = -(j - height_px / 2) * pitch;  // row 0 on top
        for (int i = 0; i < width_px; ++i) {
            const double x = (i - width_px / 2) * pitch;
            for (const auto& s : strokes)
                if (s.contains(x, y)) {
                    img.at(i, j) = 1.0;
                    break;
                }
        }
    }
    return img;
}

/// One camera frame: time-integrated intensity over [t_start, t_start + duration].
struct Frame {
    double t_start = 0.0;
    double duration = 0.0;
    ImageField image;
};

struct FrameSet {
    std::vector<Frame> frames;

    void check() const {
        for (size_t i = 0; i < frames.size(); ++i) {
            if (!(frames[i].duration > 0.0)) throw std::runtime_error("FrameSet: non-positive duration");
            if (i > 0) {
                const auto& prev = frames[i - 1];
                if (frames[i].t_start + 1e-15 < prev.t_start + prev.duration)
                    throw std::runtime_error("FrameSet: overlapping frames");
                if (!frames[i].image.same_shape(prev.image) ||
                    frames[i].image.pitch() != prev.image.pitch())
                    throw std::runtime_error("FrameSet: frames must share one grid");
            }
        }
    }
};

struct FrameSpec {
    double t0 = 100e-9;      // first frame start, relative to the flip
    double width = 100e-9;   // integration window
    int count = 28;
};

/// Integrate an instantaneous image field over contiguous gated
/// windows. `image_at(t)` supplies the instantaneous intensity map;
/// integration is trapezoidal on the sample grid, so frame boundaries
/// must land on sample times and adjacent sub-frames add exactly.
template <class ImageAt>
FrameSet gate_frames(ImageAt&& image_at, double sample_dt, TimeSpan valid, const FrameSpec& spec) {
    if (!(spec.width > 0.0)) throw std::invalid_argument("gate_frames: frame width must be > 0");
    if (spec.count < 1) throw std::invalid_argument("gate_frames: need at least one frame");
    if (!(sample_dt > 0.0)) throw std::invalid_argument("gate_frames: sample_dt must be > 0");

    const double steps_f = spec.width / sample_dt;
    const long steps = std::lround(steps_f);
    if (steps < 1 || std::abs(steps_f - steps) > 1e-9 * steps_f)
        throw std::invalid_argument("gate_frames: frame width must be a multiple of sample_dt");

    const double t_end = spec.t0 + spec.count * spec.width;
    if (spec.t0 < valid.start - 1e-15 || t_end > valid.end + 1e-15)
        throw std::invalid_argument("gate_frames: requested windows lie outside the simulated span");

    FrameSet set;
    set.frames.reserve(spec.count);
    for (int f = 0; f < spec.count; ++f) {
        const double start = spec.t0 + f * spec.width;
        ImageField acc;
        for (long k = 0; k <= steps; ++k) {
            const double t = start + k * sample_dt;
            const double w = (k == 0 || k == steps) ? 0.5 * sample_dt : sample_dt;
            ImageField sample = image_at(t);
            if (acc.empty()) {
                acc = ImageField(sample.width(), sample.height(), sample.pitch());
            }
            accumulate(acc, sample, w);
        }
        set.frames.push_back({start, spec.width, std::move(acc)});
    }
    set.check();
    return set;
}

}  // namespace gemsim
