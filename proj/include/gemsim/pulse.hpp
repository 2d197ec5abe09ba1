#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "gemsim/image.hpp"

namespace gemsim {

/// One input pulse: a Gaussian temporal envelope bound to a transverse
/// image. Times are relative to the gradient flip (negative for
/// inputs); width_1e2 is the full width at 1/e^2 of the intensity.
struct Pulse {
    double peak_time = 0.0;
    double width_1e2 = 0.0;
    double amplitude = 1.0;
    ImageField image;  // may be empty for purely longitudinal runs

    /// Field envelope amplitude at time t.
    double envelope(double t) const {
        const double tau = width_1e2 / 2.0;
        const double u = (t - peak_time) / tau;
        return amplitude * std::exp(-u * u);
    }
};

class PulseSequence {
public:
    PulseSequence() = default;

    explicit PulseSequence(std::vector<Pulse> pulses) : pulses_(std::move(pulses)) {
        for (size_t i = 0; i < pulses_.size(); ++i) {
            if (!(pulses_[i].width_1e2 > 0.0))
                throw std::invalid_argument("PulseSequence: widths must be > 0");
            if (i > 0 && pulses_[i].peak_time < pulses_[i - 1].peak_time)
                throw std::invalid_argument("PulseSequence: pulses must be sorted by peak_time");
        }
    }

    const std::vector<Pulse>& pulses() const { return pulses_; }
    size_t size() const { return pulses_.size(); }
    bool empty() const { return pulses_.empty(); }
    const Pulse& operator[](size_t i) const { return pulses_[i]; }

    /// Coherent input field: pulses share one carrier and add in
    /// amplitude.
    double field(double t) const {
        double e = 0.0;
        for (const auto& p : pulses_) e += p.envelope(t);
        return e;
    }

    /// Index of the pulse dominating the input at time t, or -1 when
    /// every envelope is negligible.
    int dominant_pulse(double t) const {
        int best = -1;
        double best_env = 0.0;
        double max_amp = 0.0;
        for (const auto& p : pulses_) max_amp = std::max(max_amp, std::abs(p.amplitude));
        for (size_t i = 0; i < pulses_.size(); ++i) {
            const double e = std::abs(pulses_[i].envelope(t));
            if (e > best_env) {
                best_env = e;
                best = static_cast<int>(i);
            }
        }
        if (best_env < 1e-9 * max_amp) return -1;
        return best;
    }

private:
    std::vector<Pulse> pulses_;
};

}  // namespace gemsim
