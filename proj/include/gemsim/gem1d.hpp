#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "gemsim/memory_config.hpp"
#include "gemsim/pulse.hpp"

namespace gemsim {

/// Longitudinal collective coherence s(z) on the cell grid, plus the
/// attribution of each z band to the input pulse that wrote it.
struct SpinWave {
    double time = 0.0;                      // sample time relative to the flip
    std::vector<double> z;                  // cell centres in [0, L]
    std::vector<std::complex<double>> s;    // coherence amplitude per cell
    std::vector<int> slice_tags;            // pulse index per cell, -1 if unwritten

    double stored_energy(double dz) const {
        double w = 0.0;
        for (const auto& v : s) w += std::norm(v);
        return w * dz;
    }
};

/// Output intensity versus time plus the energy ledger of a run.
struct EchoTrace {
    std::vector<double> t;          // relative to the flip
    std::vector<double> intensity;  // |E(L, t)|^2
    double dt = 0.0;

    double input_energy = 0.0;
    double transmitted_energy = 0.0;  // output while t < 0
    double retrieved_energy = 0.0;    // output while t >= 0
    double stored_energy = 0.0;       // left in the medium at span end
    double decayed_energy = 0.0;      // lost to decoherence

    double absorbed_fraction = 0.0;   // 1 - transmitted/input
    double efficiency = 0.0;          // retrieved/input

    /// Relative defect of input = transmitted + retrieved + stored + decayed.
    double energy_residual() const {
        if (input_energy <= 0.0) return 0.0;
        const double rhs = transmitted_energy + retrieved_energy + stored_energy + decayed_energy;
        return std::abs(input_energy - rhs) / input_energy;
    }
};

struct GemGrid {
    int z_cells = 512;
    double dt = 0.0;  // 0 selects a step from the phase-winding rule
};

struct TimeSpan {
    double start = 0.0;
    double end = 0.0;
};

struct EvolveOptions {
    GemGrid grid;
    std::vector<double> snapshot_times;  // spin-wave snapshots, relative to flip
};

struct GemResult {
    EchoTrace trace;
    SpinWave spin;                    // state at span end
    std::vector<SpinWave> snapshots;  // at the requested times
};

namespace gem_detail {

/// Integral of the gradient from 0 to t for the linear-ramp flip
/// (write value for t <= -T/2, read value for t >= T/2).
inline double gradient_integral(const MemoryConfig& cfg, double t) {
    const double gw = cfg.gradient_write;
    const double gr = cfg.gradient_read;
    if (cfg.step_flip || cfg.flip_duration == 0.0) return t < 0.0 ? gw * t : gr * t;
    const double T = cfg.flip_duration;
    const double half = T / 2.0;
    if (t >= half) return T * (gw + 3.0 * gr) / 8.0 + gr * (t - half);
    if (t <= -half) return -T * (3.0 * gw + gr) / 8.0 + gw * (t + half);
    return 0.5 * (gw + gr) * t + (gr - gw) * t * t / (2.0 * T);
}

inline double gradient_at(const MemoryConfig& cfg, double t) {
    const double gw = cfg.gradient_write;
    const double gr = cfg.gradient_read;
    if (cfg.step_flip || cfg.flip_duration == 0.0) return t < 0.0 ? gw : gr;
    const double half = cfg.flip_duration / 2.0;
    if (t <= -half) return gw;
    if (t >= half) return gr;
    return gw + (gr - gw) * (t + half) / cfg.flip_duration;
}

}  // namespace gem_detail

/// Integrate the linear GEM pair
///
///   ds/dt = -(i eta(t) (z - L/2) + gamma) s + i g E
///   dE/dz = i g s,  E(0, t) = E_in(t)
///
/// with the field following adiabatically. Per step: exact phase
/// rotation of the gradient term (split symmetrically around the
/// coupling), then an explicit trapezoidal (Heun) coupling exchange
/// with first-order upwind integration of dE/dz. Spins are driven by
/// the cell-averaged field, which closes the discrete energy balance.
inline GemResult evolve(const MemoryConfig& cfg, const PulseSequence& seq, TimeSpan span,
                        const EvolveOptions& opts = {}) {
    cfg.check();
    if (seq.empty()) throw std::invalid_argument("evolve: empty pulse sequence");
    for (const auto& p : seq.pulses())
        if (!(p.peak_time < 0.0))
            throw std::invalid_argument("evolve: input pulses must peak before the flip (t < 0)");
    if (!(span.end > span.start)) throw std::invalid_argument("evolve: empty time span");
    if (cfg.coupling < 0.0)
        throw std::invalid_argument("evolve: coupling must be >= 0; use calibrate_coupling to set it");

    const int nz = opts.grid.z_cells;
    if (nz < 8) throw std::invalid_argument("evolve: need at least 8 z cells");
    const double L = cfg.cell_length;
    const double dz = L / nz;
    const double g = cfg.coupling;
    const double gamma = cfg.decoherence_rate;

    const double eta_max = std::max(std::abs(cfg.gradient_write), std::abs(cfg.gradient_read));
    double min_width = std::numeric_limits<double>::infinity();
    for (const auto& p : seq.pulses()) min_width = std::min(min_width, p.width_1e2);

    double dt = opts.grid.dt;
    if (dt == 0.0) dt = std::min(0.08 / (eta_max * L), min_width / 50.0);
    const double winding = dt * eta_max * L;
    if (!(winding < 0.1))
        throw std::invalid_argument(
            "evolve: dt too large, dt*|eta|*L = " + std::to_string(winding) +
            " rad (must be < 0.1); reduce dt below " + std::to_string(0.1 / (eta_max * L)));

    const int steps = static_cast<int>(std::ceil((span.end - span.start) / dt - 1e-9));

    std::vector<std::complex<double>> s(nz, 0.0);
    std::vector<std::complex<double>> s_stage(nz), k1(nz);
    std::vector<double> zc(nz);
    for (int j = 0; j < nz; ++j) zc[j] = (j + 0.5) * dz;

    const size_t n_pulses = seq.size();
    std::vector<std::vector<double>> deposit(n_pulses, std::vector<double>(nz, 0.0));

    GemResult result;
    EchoTrace& trace = result.trace;
    trace.dt = dt;
    trace.t.reserve(steps + 1);
    trace.intensity.reserve(steps + 1);

    // Sweep the field through the medium for a frozen spin state;
    // returns the output amplitude and fills the cell-averaged field.
    std::vector<std::complex<double>> e_bar(nz);
    const std::complex<double> ig(0.0, g);
    auto sweep = [&](const std::vector<std::complex<double>>& spins, double e_in) {
        std::complex<double> e(e_in, 0.0);
        for (int j = 0; j < nz; ++j) {
            const std::complex<double> de = ig * dz * spins[j];
            e_bar[j] = e + 0.5 * de;
            e += de;
        }
        return e;
    };

    auto rotate = [&](double t0, double t1) {
        const double dtheta = gem_detail::gradient_integral(cfg, t1) -
                              gem_detail::gradient_integral(cfg, t0);
        const double damp = std::exp(-gamma * (t1 - t0));
        if (gamma > 0.0) {
            double before = 0.0;
            for (const auto& v : s) before += std::norm(v);
            trace.decayed_energy += before * dz * (1.0 - damp * damp);
        }
        for (int j = 0; j < nz; ++j) {
            const double phi = -dtheta * (zc[j] - L / 2.0);
            s[j] *= std::polar(damp, phi);
        }
    };

    const double flip_start = cfg.step_flip ? 0.0 : -cfg.flip_duration / 2.0;
    size_t next_snapshot = 0;
    std::vector<double> snap_times = opts.snapshot_times;
    std::sort(snap_times.begin(), snap_times.end());

    auto take_snapshot = [&](double t_now) {
        SpinWave w;
        w.time = t_now;
        w.z = zc;
        w.s = s;
        w.slice_tags.assign(nz, -1);
        for (int j = 0; j < nz; ++j) {
            double best = 0.0;
            for (size_t p = 0; p < n_pulses; ++p)
                if (deposit[p][j] > best) {
                    best = deposit[p][j];
                    w.slice_tags[j] = static_cast<int>(p);
                }
        }
        return w;
    };

    for (int k = 0; k < steps; ++k) {
        const double t0 = span.start + k * dt;
        const double t1 = t0 + dt;
        const double e_in0 = seq.field(t0);
        const double e_in1 = seq.field(t1);

        rotate(t0, t0 + dt / 2.0);

        // Heun exchange over [t0, t1]
        const std::complex<double> out0 = sweep(s, e_in0);
        for (int j = 0; j < nz; ++j) {
            k1[j] = ig * e_bar[j];
            s_stage[j] = s[j] + dt * k1[j];
        }
        const std::complex<double> out1 = sweep(s_stage, e_in1);
        const int active = seq.dominant_pulse(t0 + dt / 2.0);
        for (int j = 0; j < nz; ++j) {
            const std::complex<double> ds = 0.5 * dt * (k1[j] + ig * e_bar[j]);
            if (active >= 0 && t0 + dt / 2.0 < flip_start)
                deposit[active][j] += std::norm(ds);
            s[j] += ds;
        }

        rotate(t0 + dt / 2.0, t1);

        trace.t.push_back(t0);
        trace.intensity.push_back(std::norm(out0));
        trace.input_energy += 0.5 * dt * (e_in0 * e_in0 + e_in1 * e_in1);
        const double out_step = 0.5 * dt * (std::norm(out0) + std::norm(out1));
        if (t0 + dt / 2.0 < 0.0)
            trace.transmitted_energy += out_step;
        else
            trace.retrieved_energy += out_step;

        while (next_snapshot < snap_times.size() && snap_times[next_snapshot] <= t1) {
            result.snapshots.push_back(take_snapshot(t1));
            ++next_snapshot;
        }
    }

    const double t_end = span.start + steps * dt;
    trace.t.push_back(t_end);
    trace.intensity.push_back(std::norm(sweep(s, seq.field(t_end))));

    for (const auto& v : s) trace.stored_energy += std::norm(v);
    trace.stored_energy *= dz;

    if (trace.input_energy > 0.0) {
        trace.absorbed_fraction =
            std::clamp(1.0 - trace.transmitted_energy / trace.input_energy, 0.0, 1.0);
        trace.efficiency = std::clamp(trace.retrieved_energy / trace.input_energy, 0.0, 1.0);
    }

    result.spin = take_snapshot(t_end);
    return result;
}

/// Retrieval with a read gradient weaker than the write gradient by the
/// expansion ratio r; the echo is stretched in time by r.
inline EchoTrace expansion_retrieval(const MemoryConfig& cfg, const PulseSequence& seq,
                                     TimeSpan span, const EvolveOptions& opts = {}) {
    if (!(cfg.expansion_ratio() > 0.0))
        throw std::invalid_argument("expansion_retrieval: expansion ratio must be > 0");
    return evolve(cfg, seq, span, opts).trace;
}

/// Maximum theoretical retrieval efficiency for forward recall given
/// the single-pass absorbed fraction.
inline double efficiency_bound(double absorbed_fraction) {
    if (!(absorbed_fraction >= 0.0) || !(absorbed_fraction <= 1.0))
        throw std::invalid_argument("efficiency_bound: absorbed fraction must lie in [0, 1]");
    return absorbed_fraction * absorbed_fraction;
}

/// Total diffusion time of a slice written flip_delay before the flip
/// and retrieved at r * flip_delay after it: t_in + t_out.
inline double storage_time(double flip_delay, double r) {
    if (!(flip_delay > 0.0)) throw std::invalid_argument("storage_time: flip_delay must be > 0");
    if (!(r > 0.0)) throw std::invalid_argument("storage_time: expansion ratio must be > 0");
    return flip_delay * (1.0 + r);
}

/// Same accounting keyed on the retrieval time: a slice seen t_out
/// after the flip was written t_out / r before it.
inline double storage_time_from_echo(double t_out, double r) {
    if (!(t_out >= 0.0)) throw std::invalid_argument("storage_time_from_echo: t_out must be >= 0");
    if (!(r > 0.0)) throw std::invalid_argument("storage_time_from_echo: ratio must be > 0");
    return t_out * (1.0 + 1.0 / r);
}

/// Choose the effective coupling so the measured single-pass absorption
/// of a reference pulse matches the target. Bisection against the
/// solver itself, so discretization bias is absorbed into the value.
inline double calibrate_coupling(MemoryConfig cfg, double pulse_width = 1.1e-6,
                                 double target = -1.0, int z_cells = 512) {
    if (target < 0.0) target = cfg.target_absorption;
    if (!(target >= 0.0) || !(target >= 0.0 && target < 1.0))
        throw std::invalid_argument("calibrate_coupling: target absorption must lie in [0, 1)");
    if (target == 0.0) return 0.0;

    const double tau = pulse_width / 2.0;
    const double peak = -(4.0 * tau + cfg.flip_duration + 1e-7);
    PulseSequence probe(std::vector<Pulse>{{peak, pulse_width, 1.0, {}}});
    // end before the ramp so only the write pass is measured
    const TimeSpan span{peak - 4.0 * tau, -cfg.flip_duration / 2.0 - 1e-9};

    EvolveOptions opts;
    opts.grid.z_cells = z_cells;

    auto absorption = [&](double g) {
        MemoryConfig c = cfg;
        c.coupling = g;
        c.decoherence_rate = 0.0;
        return evolve(c, probe, span, opts).trace.absorbed_fraction;
    };

    // analytic seed: intensity absorption 1 - exp(-2 pi g^2 / |eta|)
    const double beta = -std::log(1.0 - target) / (2.0 * M_PI);
    double hi = 3.0 * std::sqrt(beta * std::abs(cfg.gradient_write));
    double lo = 0.0;
    while (absorption(hi) < target) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) throw std::runtime_error("calibrate_coupling: target absorption unreachable");
    }
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (absorption(mid) < target)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-9 * hi) break;
    }
    return 0.5 * (lo + hi);
}

/// Peak position, 1/e^2 intensity full width, and energy of the trace
/// restricted to [t_from, t_to]. Peak and width use local interpolation.
struct PulseMetrics {
    double peak_time = 0.0;
    double peak_intensity = 0.0;
    double width_1e2 = 0.0;
    double energy = 0.0;
};

inline PulseMetrics measure_pulse(const EchoTrace& trace, double t_from, double t_to) {
    const auto& t = trace.t;
    const auto& I = trace.intensity;
    int best = -1;
    for (size_t i = 0; i < t.size(); ++i)
        if (t[i] >= t_from && t[i] <= t_to && (best < 0 || I[i] > I[best]))
            best = static_cast<int>(i);
    if (best < 0) throw std::invalid_argument("measure_pulse: window outside trace");

    PulseMetrics m;
    m.peak_time = t[best];
    m.peak_intensity = I[best];
    if (best > 0 && best + 1 < static_cast<int>(t.size())) {
        // parabolic refinement on three samples
        const double y0 = I[best - 1], y1 = I[best], y2 = I[best + 1];
        const double denom = y0 - 2.0 * y1 + y2;
        if (denom < 0.0) {
            const double delta = 0.5 * (y0 - y2) / denom;
            m.peak_time = t[best] + delta * trace.dt;
            m.peak_intensity = y1 - 0.25 * (y0 - y2) * delta;
        }
    }

    const double level = m.peak_intensity / (M_E * M_E);
    auto cross = [&](int from, int dir) {
        for (int i = from; i + dir >= 0 && i + dir < static_cast<int>(t.size()); i += dir) {
            const int n = i + dir;
            if (t[n] < t_from || t[n] > t_to) break;
            if ((I[i] - level) > 0.0 && (I[n] - level) <= 0.0) {
                const double f = (I[i] - level) / (I[i] - I[n]);
                return t[i] + f * (t[n] - t[i]);
            }
        }
        return dir < 0 ? t_from : t_to;
    };
    m.width_1e2 = cross(best, +1) - cross(best, -1);

    for (size_t i = 0; i + 1 < t.size(); ++i)
        if (t[i] >= t_from && t[i + 1] <= t_to)
            m.energy += 0.5 * (I[i] + I[i + 1]) * (t[i + 1] - t[i]);
    return m;
}

}  // namespace gemsim
