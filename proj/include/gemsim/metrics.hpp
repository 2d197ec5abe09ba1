#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "gemsim/diffusion.hpp"
#include "gemsim/image.hpp"
#include "gemsim/imaging.hpp"

namespace gemsim {

/// Normalized cross-correlation of a frame against a reference:
/// S = sum(N_in * N_echo) / sqrt(sum(N_in^2) * sum(N_echo^2)).
/// Scale invariant; 1 exactly when the frame is proportional to the
/// reference; defined as 0 for a zero-power frame.
inline double similarity(const ImageField& frame, const ImageField& ref) {
    if (!frame.same_shape(ref)) throw std::invalid_argument("similarity: shape mismatch");
    double cross = 0.0, auto_f = 0.0, auto_r = 0.0;
    for (size_t i = 0; i < frame.values().size(); ++i) {
        const double a = frame.values()[i];
        const double b = ref.values()[i];
        cross += a * b;
        auto_f += a * a;
        auto_r += b * b;
    }
    if (!(auto_r > 0.0)) throw std::invalid_argument("similarity: reference has zero power");
    if (auto_f == 0.0) return 0.0;
    // evaluated via S^2 so S(A, A) is exactly 1
    const double s = std::sqrt(cross * cross / (auto_f * auto_r));
    return cross < 0.0 ? -s : s;
}

struct SimilarityResult {
    double S = 0.0;
    std::string reference_id;
    int frame_index = -1;
};

inline SimilarityResult score_frame(const ImageField& frame, const ImageField& ref,
                                    std::string reference_id, int frame_index) {
    return {similarity(frame, ref), std::move(reference_id), frame_index};
}

inline double distinguishability(double s_a, double s_b) {
    auto in_range = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_range(s_a) || !in_range(s_b))
        throw std::invalid_argument("distinguishability: similarities must lie in [0, 1]");
    return std::abs(s_a - s_b);
}

struct ContrastOptions {
    int sampling_columns = 1;  // 1 or 3 columns averaged around each centre line
};

namespace metric_detail {

// y-integrated intensity profile along the chart's modulation axis.
inline std::vector<double> integrated_profile(const ImageField& frame, Orientation orientation) {
    const bool vertical = orientation == Orientation::vertical;
    const int n = vertical ? frame.width() : frame.height();
    std::vector<double> profile(n, 0.0);
    for (int y = 0; y < frame.height(); ++y)
        for (int x = 0; x < frame.width(); ++x)
            profile[vertical ? x : y] += frame.at(x, y);
    return profile;
}

inline double sample_columns(const std::vector<double>& profile, int index, int columns) {
    double acc = 0.0;
    int used = 0;
    for (int k = -(columns / 2); k <= columns / 2; ++k) {
        const int i = index + k;
        if (i < 0 || i >= static_cast<int>(profile.size())) continue;
        acc += profile[i];
        ++used;
    }
    if (used == 0) throw std::invalid_argument("contrast: sample column outside the frame");
    return acc / used;
}

}  // namespace metric_detail

/// Bar-chart contrast, C = (I(a) - I(0)) / (I(a) + I(0)), sampled at
/// the ideal centre-line coordinates of the generating spec
/// (registration by construction, rounded to the nearest column). For
/// the default bright-bar layout I(a) is the central bright bar and
/// I(0) the dark line one line width to its left; for the inverted
/// layout I(0) is the central dark bar and I(a) the adjacent bright
/// line. Negative values mean diffusion has filled the dark line past
/// its bright neighbour.
inline double contrast(const ImageField& frame, const BarChart& chart,
                       const ContrastOptions& opts = {}) {
    const auto profile = metric_detail::integrated_profile(frame, chart.orientation);
    const int n = static_cast<int>(profile.size());
    const int centre = n / 2;
    const int offset = static_cast<int>(std::lround(chart.a / frame.pitch()));
    const int bright = chart.inverted ? centre - offset : centre;
    const int dark = chart.inverted ? centre : centre - offset;
    if (centre - offset < 0 || centre >= n)
        throw std::invalid_argument("contrast: chart does not fit the frame");

    const double bright_i = metric_detail::sample_columns(profile, bright, opts.sampling_columns);
    const double dark_i = metric_detail::sample_columns(profile, dark, opts.sampling_columns);
    const double denom = bright_i + dark_i;
    if (denom == 0.0) throw std::invalid_argument("contrast: undefined, I(a) + I(0) = 0");
    return (bright_i - dark_i) / denom;
}

/// Contrast of an ideal chart propagated analytically for time t and
/// scaled by the measured input contrast C0. This is the
/// zero-free-parameter model curve: D fixed, C0 measured, nothing
/// fitted.
inline double predicted_contrast(const BarChart& chart, double D, double t, double C0,
                                 double pitch, int width_px = 256, int height_px = 256,
                                 const ContrastOptions& opts = {}) {
    const ImageField ideal = make_barchart(chart, pitch, width_px, height_px);
    const ImageField blurred = propagate(ideal, D, t);
    return C0 * contrast(blurred, chart, opts);
}

/// Closed-form contrast decay of an infinite periodic chart of line
/// width a under the heat kernel:
///   C(t) = (4/pi) sum_m (-1)^m/(2m+1) exp(-(2m+1)^2 pi^2 D t / a^2),
/// the square-wave Fourier series with each harmonic damped by its
/// decay factor. Terms below 1e-12 are dropped.
inline double periodic_chart_contrast(double a, double D, double t) {
    if (!(a > 0.0)) throw std::invalid_argument("periodic_chart_contrast: a must be > 0");
    if (D < 0.0 || t < 0.0) throw std::invalid_argument("periodic_chart_contrast: negative D or t");
    if (D * t == 0.0) return 1.0;  // undamped square wave
    double c = 0.0;
    for (int m = 0; m < 1000000; ++m) {
        const double k = (2.0 * m + 1.0) * M_PI / a;
        const double term = ((m % 2 == 0) ? 1.0 : -1.0) / (2.0 * m + 1.0) * std::exp(-k * k * D * t);
        c += term;
        if (std::abs(term) < 1e-12) break;
    }
    return 4.0 / M_PI * c;
}

struct MtfPoint {
    double spatial_frequency = 0.0;  // 1/(2a), line pairs per metre
    double t = 0.0;
    double contrast = 0.0;
};

struct MtfTable {
    std::vector<MtfPoint> points;
};

/// Modulation transfer function: contrast versus spatial frequency for
/// each storage time, from analytic propagation of the ideal charts.
inline MtfTable mtf(const std::vector<BarChart>& charts, double D, const std::vector<double>& times,
                    double pitch, int width_px = 256, int height_px = 256) {
    if (charts.size() < 2) throw std::invalid_argument("mtf: need at least two spatial frequencies");
    if (times.empty()) throw std::invalid_argument("mtf: need at least one storage time");
    MtfTable table;
    for (double t : times)
        for (const auto& chart : charts)
            table.points.push_back(
                {chart.spatial_frequency(), t, predicted_contrast(chart, D, t, 1.0, pitch, width_px, height_px)});
    return table;
}

struct SimilaritySeries {
    std::vector<int> frame_index;
    std::vector<double> t;    // frame start, relative to the flip
    std::vector<double> s_n;
    std::vector<double> s_t;
    std::vector<double> difference;  // |S_N - S_T|
    int crossing_frame = -1;         // first frame where the leader flips
};

/// Per-frame similarity against the two references plus the
/// distinguishability track and the crossing frame.
inline SimilaritySeries similarity_decay(const FrameSet& frames, const ImageField& ref_n,
                                         const ImageField& ref_t) {
    SimilaritySeries series;
    for (size_t i = 0; i < frames.frames.size(); ++i) {
        const auto& frame = frames.frames[i];
        const double sn = score_frame(frame.image, ref_n, "N", static_cast<int>(i) + 1).S;
        const double st = score_frame(frame.image, ref_t, "T", static_cast<int>(i) + 1).S;
        series.frame_index.push_back(static_cast<int>(i) + 1);
        series.t.push_back(frame.t_start);
        series.s_n.push_back(sn);
        series.s_t.push_back(st);
        series.difference.push_back(std::abs(sn - st));
        if (series.crossing_frame < 0 && i > 0) {
            const double prev = series.s_n[i - 1] - series.s_t[i - 1];
            const double cur = sn - st;
            if (prev < 0.0 && cur >= 0.0) series.crossing_frame = static_cast<int>(i) + 1;
        }
    }
    return series;
}

}  // namespace gemsim
