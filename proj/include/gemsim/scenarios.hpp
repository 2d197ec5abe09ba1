#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gemsim/configfile.hpp"
#include "gemsim/csv.hpp"
#include "gemsim/diffusion.hpp"
#include "gemsim/gem1d.hpp"
#include "gemsim/imaging.hpp"
#include "gemsim/metrics.hpp"

namespace gemsim {

// End-to-end reproductions of the three experiments: the two-image
// movie, the flip-delay independence of the contrast decay, and the
// per-frequency contrast decay with its zero-free-parameter overlay.
// Each scenario is deterministic for a fixed Settings value.

namespace scenario_detail {

/// Linear interpolation on a sampled trace.
class Envelope {
public:
    Envelope() = default;
    Envelope(const EchoTrace& trace) : t_(trace.t), v_(trace.intensity) {
        for (double x : v_) peak_ = std::max(peak_, x);
    }

    double operator()(double t) const {
        if (t_.empty() || t <= t_.front() || t >= t_.back()) return 0.0;
        const auto it = std::upper_bound(t_.begin(), t_.end(), t);
        const size_t i = static_cast<size_t>(it - t_.begin());
        const double f = (t - t_[i - 1]) / (t_[i] - t_[i - 1]);
        return v_[i - 1] + f * (v_[i] - v_[i - 1]);
    }

    double peak() const { return peak_; }
    double span_start() const { return t_.empty() ? 0.0 : t_.front(); }
    double span_end() const { return t_.empty() ? 0.0 : t_.back(); }

    /// Intensity-weighted centroid over [t0, t1] (trapezoid on the
    /// sample grid); falls back to the window centre for dark windows.
    double centroid(double t0, double t1) const {
        double w = 0.0, wt = 0.0;
        for (size_t i = 0; i + 1 < t_.size(); ++i) {
            if (t_[i] < t0 || t_[i + 1] > t1) continue;
            const double seg = 0.5 * (v_[i] + v_[i + 1]) * (t_[i + 1] - t_[i]);
            w += seg;
            wt += seg * 0.5 * (t_[i] + t_[i + 1]);
        }
        if (w <= 0.0) return 0.5 * (t0 + t1);
        return wt / w;
    }

    /// Trapezoid integral over [t0, t1] on the sample grid.
    double integral(double t0, double t1) const {
        double w = 0.0;
        for (size_t i = 0; i + 1 < t_.size(); ++i) {
            if (t_[i] < t0 || t_[i + 1] > t1) continue;
            w += 0.5 * (v_[i] + v_[i + 1]) * (t_[i + 1] - t_[i]);
        }
        return w;
    }

private:
    std::vector<double> t_, v_;
    double peak_ = 0.0;
};

/// One retrieved image channel: a stored transverse image re-emitted
/// with its own temporal envelope, blurred for deposit_time + t by the
/// time it exits. Blurs are cached on a uniform time-node grid and
/// interpolated quadratically between nodes (the map is smooth in
/// sigma^2, which is linear in t).
class BlurredChannel {
public:
    BlurredChannel(ImageField base, double deposit_time, double D, Envelope env, double node_t0,
                   double node_dt, int node_count, int threads)
        : base_(std::move(base)), deposit_(deposit_time), diffusion_(D), env_(std::move(env)),
          node_t0_(node_t0), node_dt_(node_dt), node_count_(node_count), threads_(threads) {}

    double envelope(double t) const { return env_(t); }

    void add_contribution(ImageField& acc, double t) const {
        const double e = env_(t);
        if (e <= 1e-12 * env_.peak()) return;

        int j = static_cast<int>(std::lround((t - node_t0_) / node_dt_));
        j = std::clamp(j, 1, node_count_ - 1);
        const double u = (t - (node_t0_ + j * node_dt_)) / node_dt_;
        const double w_prev = 0.5 * u * (u - 1.0);
        const double w_mid = 1.0 - u * u;
        const double w_next = 0.5 * u * (u + 1.0);
        accumulate(acc, node_image(j - 1), e * w_prev);
        accumulate(acc, node_image(j), e * w_mid);
        accumulate(acc, node_image(j + 1), e * w_next);
    }

    const ImageField& base() const { return base_; }
    double deposit_time() const { return deposit_; }

private:
    const ImageField& node_image(int j) const {
        auto it = cache_.find(j);
        if (it == cache_.end()) {
            const double t_store = deposit_ + node_t0_ + j * node_dt_;
            it = cache_.emplace(j, propagate(base_, diffusion_, t_store, ConvolutionPath::separable,
                                             BoundaryMode::fixed, threads_)).first;
        }
        return it->second;
    }

    ImageField base_;
    double deposit_ = 0.0;
    double diffusion_ = 0.0;
    Envelope env_;
    double node_t0_ = 0.0, node_dt_ = 0.0;
    int node_count_ = 0;
    int threads_ = 1;
    mutable std::map<int, ImageField> cache_;
};

struct PreparedRun {
    MemoryConfig memory;
    double dt = 0.0;
    TimeSpan span;
};

/// Resolve coupling, align the solver step with the camera gating, and
/// size the simulated span to cover pulses and frames.
inline PreparedRun prepare_run(const Settings& s, double earliest_peak) {
    PreparedRun run;
    run.memory = s.memory;
    run.memory.set_expansion(s.scenario.expansion_ratio);
    if (run.memory.coupling == 0.0)
        run.memory.coupling = calibrate_coupling(run.memory, s.scenario.pulse_width, -1.0, s.grid.z_cells);

    const double eta_max =
        std::max(std::abs(run.memory.gradient_write), std::abs(run.memory.gradient_read));
    const double dt_auto =
        std::min(0.08 / (eta_max * run.memory.cell_length), s.scenario.pulse_width / 50.0);
    const long per_frame = std::lround(std::ceil(s.scenario.frame_width / dt_auto));
    run.dt = s.scenario.frame_width / static_cast<double>(per_frame);

    const double start_raw = earliest_peak - 1.5 * s.scenario.pulse_width;
    run.span.start = -std::ceil(-start_raw / run.dt) * run.dt;
    const double end_raw = s.scenario.frame_t0 + (s.scenario.frame_count + 1) * s.scenario.frame_width;
    run.span.end = std::ceil(end_raw / run.dt) * run.dt;
    return run;
}

inline FrameSpec frame_spec(const Settings& s, int count) {
    return FrameSpec{s.scenario.frame_t0, s.scenario.frame_width, count};
}

/// Gate frames from a set of channels over the prepared run.
inline FrameSet synthesize_frames(const std::vector<const BlurredChannel*>& channels,
                                  const PreparedRun& run, const FrameSpec& spec, int image_px,
                                  double pitch) {
    auto provider = [&](double t) {
        ImageField acc(image_px, image_px, pitch);
        for (const auto* ch : channels) ch->add_contribution(acc, t);
        // the blur interpolation can undershoot zero by rounding noise
        // in dark regions; instantaneous intensity is non-negative
        for (double& v : acc.values())
            if (v < 0.0) v = 0.0;
        return acc;
    };
    return gate_frames(provider, run.dt, run.span, spec);
}

}  // namespace scenario_detail

// -------------------------------------------------------------------
// Two-image movie
// -------------------------------------------------------------------

struct TwoImageMovieResult {
    EchoTrace combined;                 // both pulses stored together
    EchoTrace trace_n, trace_t;         // single-image runs
    SpinWave spin_at_flip;              // stored coherence when the gradient flips
    ImageField ref_n, ref_t;            // stored-plane references
    FrameSet frames;
    SimilaritySeries series;
    std::vector<double> t_fraction;     // per frame: T-channel share of the gated energy
    double coupling = 0.0;
};

/// Store letters N then T (1 us apart), retrieve with the expansion
/// gradient, gate 28 frames, and track S_N / S_T. FILO ordering makes
/// the T echo come out first.
inline TwoImageMovieResult run_two_image_movie(const Settings& s, int threads = 1) {
    using namespace scenario_detail;
    const double mag = s.scenario.magnification;
    const double mask_pitch = s.grid.pitch / mag;

    LetterMask mask_n{'N', s.scenario.letter_height, 0.0};
    LetterMask mask_t{'T', s.scenario.letter_height, 0.0};
    ImageField stored_n = resample(make_letter(mask_n, mask_pitch, s.grid.image_px, s.grid.image_px), mag);
    ImageField stored_t = resample(make_letter(mask_t, mask_pitch, s.grid.image_px, s.grid.image_px), mag);

    const double peak_t = -s.scenario.last_pulse_delay;
    const double peak_n = peak_t - s.scenario.pulse_spacing;
    const PreparedRun run = prepare_run(s, peak_n);
    EvolveOptions opts;
    opts.grid.z_cells = s.grid.z_cells;
    opts.grid.dt = run.dt;

    const Pulse pulse_n{peak_n, s.scenario.pulse_width, 1.0, {}};
    const Pulse pulse_t{peak_t, s.scenario.pulse_width, 1.0, {}};

    TwoImageMovieResult result;
    result.coupling = run.memory.coupling;
    EvolveOptions combined_opts = opts;
    combined_opts.snapshot_times = {0.0};
    auto combined = evolve(run.memory, PulseSequence({pulse_n, pulse_t}), run.span, combined_opts);
    result.combined = std::move(combined.trace);
    result.spin_at_flip = std::move(combined.snapshots.front());
    result.trace_n = evolve(run.memory, PulseSequence({pulse_n}), run.span, opts).trace;
    result.trace_t = evolve(run.memory, PulseSequence({pulse_t}), run.span, opts).trace;
    result.ref_n = stored_n;
    result.ref_t = stored_t;

    const double node_dt = s.scenario.frame_width / 2.0;
    const int node_count = 2 * (s.scenario.frame_count + 1);
    BlurredChannel ch_n(stored_n, -peak_n, run.memory.diffusion_D, Envelope(result.trace_n),
                        s.scenario.frame_t0, node_dt, node_count, threads);
    BlurredChannel ch_t(stored_t, -peak_t, run.memory.diffusion_D, Envelope(result.trace_t),
                        s.scenario.frame_t0, node_dt, node_count, threads);

    result.frames = synthesize_frames({&ch_n, &ch_t}, run, frame_spec(s, s.scenario.frame_count),
                                      s.grid.image_px, s.grid.pitch);
    result.series = similarity_decay(result.frames, result.ref_n, result.ref_t);

    const Envelope env_n(result.trace_n), env_t(result.trace_t);
    for (const auto& frame : result.frames.frames) {
        const double en = env_n.integral(frame.t_start, frame.t_start + frame.duration);
        const double et = env_t.integral(frame.t_start, frame.t_start + frame.duration);
        result.t_fraction.push_back(en + et > 0.0 ? et / (en + et) : 0.0);
    }
    return result;
}

// -------------------------------------------------------------------
// Contrast studies
// -------------------------------------------------------------------

struct ContrastCurve {
    double flip_delay = 0.0;
    Orientation orientation = Orientation::vertical;
    double a_cell = 0.0;      // line width at the cell plane
    double c0 = 0.0;          // measured input contrast
    std::vector<int> frame_index;
    std::vector<double> t_storage;
    std::vector<double> c;        // gated-frame contrast
    std::vector<double> c_model;  // C0 * analytic decay at the same storage time
};

namespace scenario_detail {

/// Contrast decay of one stored chart retrieved after one flip delay.
inline ContrastCurve contrast_curve(const Settings& s, double flip_delay, const BarChart& mask_chart,
                                    const PreparedRun& run, const EchoTrace& trace, int threads) {
    const double mag = s.scenario.magnification;
    const double mask_pitch = s.grid.pitch / mag;
    BarChart cell_chart{mask_chart.a * mag, mask_chart.n_lines, mask_chart.orientation,
                        mask_chart.extent * mag};

    ImageField stored =
        resample(make_barchart(mask_chart, mask_pitch, s.grid.image_px, s.grid.image_px), mag);

    ContrastCurve curve;
    curve.flip_delay = flip_delay;
    curve.orientation = mask_chart.orientation;
    curve.a_cell = cell_chart.a;
    curve.c0 = contrast(stored, cell_chart);

    const double node_dt = s.scenario.frame_width / 2.0;
    const int node_count = 2 * (s.scenario.contrast_frame_count + 1);
    Envelope env(trace);
    BlurredChannel channel(stored, flip_delay, run.memory.diffusion_D, env, s.scenario.frame_t0,
                           node_dt, node_count, threads);

    FrameSet frames = synthesize_frames({&channel}, run, frame_spec(s, s.scenario.contrast_frame_count),
                                        s.grid.image_px, s.grid.pitch);

    double max_sum = 0.0;
    for (const auto& f : frames.frames) max_sum = std::max(max_sum, f.image.sum());
    for (size_t i = 0; i < frames.frames.size(); ++i) {
        const auto& frame = frames.frames[i];
        if (frame.image.sum() < 1e-9 * max_sum) continue;  // dark frame, no echo light
        const double t_out = env.centroid(frame.t_start, frame.t_start + frame.duration);
        const double t_store = flip_delay + t_out;
        curve.frame_index.push_back(static_cast<int>(i) + 1);
        curve.t_storage.push_back(t_store);
        curve.c.push_back(contrast(frame.image, cell_chart));
        curve.c_model.push_back(predicted_contrast(cell_chart, run.memory.diffusion_D, t_store,
                                                   curve.c0, s.grid.pitch, s.grid.image_px,
                                                   s.grid.image_px));
    }
    return curve;
}

/// RMS spread of a family of curves, evaluated by linear interpolation
/// on the storage-time range all of them cover.
inline double curve_family_rms(const std::vector<const ContrastCurve*>& curves, int samples = 64) {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (const auto* c : curves) {
        if (c->t_storage.size() < 2) throw std::invalid_argument("curve_family_rms: empty curve");
        lo = std::max(lo, c->t_storage.front());
        hi = std::min(hi, c->t_storage.back());
    }
    if (!(hi > lo)) throw std::invalid_argument("curve_family_rms: curves do not overlap");

    auto value_at = [](const ContrastCurve& c, double t) {
        const auto it = std::upper_bound(c.t_storage.begin(), c.t_storage.end(), t);
        size_t i = std::clamp<size_t>(static_cast<size_t>(it - c.t_storage.begin()), 1,
                                      c.t_storage.size() - 1);
        const double f = (t - c.t_storage[i - 1]) / (c.t_storage[i] - c.t_storage[i - 1]);
        return c.c[i - 1] + f * (c.c[i] - c.c[i - 1]);
    };

    double acc = 0.0;
    for (int k = 0; k < samples; ++k) {
        const double t = lo + (hi - lo) * (k + 0.5) / samples;
        double mean = 0.0;
        for (const auto* c : curves) mean += value_at(*c, t);
        mean /= curves.size();
        for (const auto* c : curves) acc += std::pow(value_at(*c, t) - mean, 2);
    }
    return std::sqrt(acc / (samples * curves.size()));
}

}  // namespace scenario_detail

struct DelayIndependenceResult {
    std::vector<ContrastCurve> curves;  // vertical, one per delay, then horizontal partners
    double rms_across_delays = 0.0;     // vertical curves against their mean
    double rms_orientation = 0.0;       // max over delays of V-vs-H pointwise RMS
    double coupling = 0.0;
};

/// One chart stored at three flip delays: the contrast depends only on
/// the total storage time, so the three curves collapse onto one.
inline DelayIndependenceResult run_delay_independence(const Settings& s, int threads = 1) {
    using namespace scenario_detail;
    DelayIndependenceResult result;

    const double mask_a = s.scenario.bar_widths.front();
    const double earliest =
        -(*std::max_element(s.scenario.flip_delays.begin(), s.scenario.flip_delays.end()));
    Settings run_settings = s;
    run_settings.scenario.frame_count = s.scenario.contrast_frame_count;
    const PreparedRun run = prepare_run(run_settings, earliest);
    result.coupling = run.memory.coupling;

    EvolveOptions opts;
    opts.grid.z_cells = s.grid.z_cells;
    opts.grid.dt = run.dt;

    for (Orientation orient : {Orientation::vertical, Orientation::horizontal}) {
        for (double delay : s.scenario.flip_delays) {
            const Pulse pulse{-delay, s.scenario.pulse_width, 1.0, {}};
            const EchoTrace trace = evolve(run.memory, PulseSequence({pulse}), run.span, opts).trace;
            BarChart mask_chart{mask_a, 3, orient, s.scenario.chart_extent};
            result.curves.push_back(contrast_curve(s, delay, mask_chart, run, trace, threads));
        }
    }

    const size_t n = s.scenario.flip_delays.size();
    std::vector<const ContrastCurve*> vertical;
    for (size_t i = 0; i < n; ++i) vertical.push_back(&result.curves[i]);
    result.rms_across_delays = curve_family_rms(vertical);

    for (size_t i = 0; i < n; ++i) {
        const auto& v = result.curves[i];
        const auto& h = result.curves[i + n];
        if (v.c.size() != h.c.size())
            throw std::runtime_error("delay_independence: V/H frame sets diverged");
        double acc = 0.0;
        for (size_t k = 0; k < v.c.size(); ++k) acc += std::pow(v.c[k] - h.c[k], 2);
        result.rms_orientation = std::max(result.rms_orientation, std::sqrt(acc / v.c.size()));
    }
    return result;
}

struct MtfStudyResult {
    std::vector<ContrastCurve> masks;   // one decay curve per line width
    std::vector<double> rms_residual;   // per mask, simulated vs model
    MtfTable table;                     // contrast vs frequency at the requested times
    double coupling = 0.0;
};

/// Contrast decay for every mask width with the no-free-parameter
/// overlay (D fixed, C0 measured), plus the MTF sampled at the
/// requested storage times.
inline MtfStudyResult run_mtf_study(const Settings& s, int threads = 1) {
    using namespace scenario_detail;
    MtfStudyResult result;

    Settings run_settings = s;
    run_settings.scenario.frame_count = s.scenario.contrast_frame_count;
    const PreparedRun run = prepare_run(run_settings, -s.scenario.last_pulse_delay);
    result.coupling = run.memory.coupling;

    EvolveOptions opts;
    opts.grid.z_cells = s.grid.z_cells;
    opts.grid.dt = run.dt;
    const Pulse pulse{-s.scenario.last_pulse_delay, s.scenario.pulse_width, 1.0, {}};
    const EchoTrace trace = evolve(run.memory, PulseSequence({pulse}), run.span, opts).trace;

    for (double mask_a : s.scenario.bar_widths) {
        BarChart mask_chart{mask_a, 3, Orientation::vertical, s.scenario.chart_extent};
        ContrastCurve curve =
            contrast_curve(s, s.scenario.last_pulse_delay, mask_chart, run, trace, threads);
        double acc = 0.0;
        for (size_t k = 0; k < curve.c.size(); ++k) acc += std::pow(curve.c[k] - curve.c_model[k], 2);
        result.rms_residual.push_back(curve.c.empty() ? 0.0 : std::sqrt(acc / curve.c.size()));
        result.masks.push_back(std::move(curve));
    }

    for (double t_req : s.scenario.mtf_times) {
        for (const auto& mask : result.masks) {
            size_t best = 0;
            for (size_t k = 1; k < mask.t_storage.size(); ++k)
                if (std::abs(mask.t_storage[k] - t_req) < std::abs(mask.t_storage[best] - t_req))
                    best = k;
            result.table.points.push_back(
                {1.0 / (2.0 * mask.a_cell), mask.t_storage[best], mask.c[best]});
        }
    }
    return result;
}

/// Full constraint check: the flat settings rules plus the diffusion
/// padding rule, which rasterizes the configured patterns and bounds
/// the power a worst-case blur would push past the canvas.
inline std::vector<RuleResult> validate_all(const Settings& s) {
    auto results = validate_settings(s);
    char buf[256];

    const double mag = s.scenario.magnification;
    const double mask_pitch = s.grid.pitch / mag;
    const double t_out_movie = s.scenario.frame_t0 + s.scenario.frame_count * s.scenario.frame_width;
    const double t_out_contrast =
        s.scenario.frame_t0 + s.scenario.contrast_frame_count * s.scenario.frame_width;

    double escape = 0.0;
    std::string detail = "patterns unresolved";
    try {
        const double t_letter =
            s.scenario.last_pulse_delay + s.scenario.pulse_spacing + t_out_movie;
        const double sigma_letter = std::sqrt(2.0 * s.memory.diffusion_D * t_letter);
        for (char glyph : {'N', 'T'}) {
            LetterMask mask{glyph, s.scenario.letter_height, 0.0};
            const ImageField stored =
                resample(make_letter(mask, mask_pitch, s.grid.image_px, s.grid.image_px), mag);
            escape = std::max(escape, escaping_power_bound(stored, sigma_letter));
        }

        double delay_max = s.scenario.last_pulse_delay;
        for (double d : s.scenario.flip_delays) delay_max = std::max(delay_max, d);
        const double sigma_chart =
            std::sqrt(2.0 * s.memory.diffusion_D * (delay_max + t_out_contrast));
        for (double a : s.scenario.bar_widths) {
            BarChart chart{a, 3, Orientation::vertical, s.scenario.chart_extent};
            const ImageField stored =
                resample(make_barchart(chart, mask_pitch, s.grid.image_px, s.grid.image_px), mag);
            escape = std::max(escape, escaping_power_bound(stored, sigma_chart));
        }
        std::snprintf(buf, sizeof buf,
                      "worst-case escaping power %.2e of total (limit 1e-4)", escape);
        detail = buf;
    } catch (const std::exception& e) {
        // resolution rules above already flag the root cause
        detail = std::string("skipped: ") + e.what();
    }
    results.push_back({"canvas holds the blurred patterns", escape <= 1e-4, detail});
    return results;
}

// -------------------------------------------------------------------
// CSV serialization (the acceptance surface of every scenario)
// -------------------------------------------------------------------

inline CsvWriter movie_csv(const TwoImageMovieResult& r) {
    CsvWriter csv({"frame_index", "t", "S_N", "S_T", "D"});
    for (size_t i = 0; i < r.series.t.size(); ++i)
        csv.add_row({static_cast<double>(r.series.frame_index[i]), r.series.t[i], r.series.s_n[i],
                     r.series.s_t[i], r.series.difference[i]});
    return csv;
}

inline CsvWriter contrast_csv(const ContrastCurve& c) {
    CsvWriter csv({"a", "t", "C", "C_pred"});
    for (size_t i = 0; i < c.t_storage.size(); ++i)
        csv.add_row({c.a_cell, c.t_storage[i], c.c[i], c.c_model[i]});
    return csv;
}

inline CsvWriter mtf_csv(const MtfTable& table) {
    CsvWriter csv({"spatial_frequency", "t", "C"});
    for (const auto& p : table.points) csv.add_row({p.spatial_frequency, p.t, p.contrast});
    return csv;
}

inline CsvWriter trace_csv(const EchoTrace& trace) {
    CsvWriter csv({"t_seconds", "intensity"});
    for (size_t i = 0; i < trace.t.size(); ++i) csv.add_row({trace.t[i], trace.intensity[i]});
    return csv;
}

inline CsvWriter spinwave_csv(const SpinWave& w) {
    CsvWriter csv({"z", "re_s", "im_s"});
    for (size_t i = 0; i < w.z.size(); ++i) csv.add_row({w.z[i], w.s[i].real(), w.s[i].imag()});
    return csv;
}

}  // namespace gemsim
