#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "gemsim/units.hpp"

namespace gemsim {

/// All physical parameters of the memory. Everything is SI; file and
/// CLI interfaces convert on the way in.
struct MemoryConfig {
    double cell_length = 0.05;  // m

    // Detuning gradients in rad s^-1 m^-1. Write and read must have
    // opposite signs; the expansion ratio is |write| / |read|.
    double gradient_write = zeeman_gradient(1.5e-3, 2.0);  // 15 uT/cm, g_eff = 2
    double gradient_read = -zeeman_gradient(1.5e-3, 2.0);

    double flip_time = 0.0;      // s; t = 0 is the flip centre
    double flip_duration = 1e-6; // s; linear ramp width
    bool step_flip = false;      // replace the ramp by an instantaneous flip

    // Effective coupling g in sqrt(1/(m s)): the single parameter the
    // atom number and Raman coupling collapse into. Zero means
    // "calibrate so single-pass absorption hits target_absorption".
    double coupling = 0.0;
    double target_absorption = 0.30;
    double optical_depth = 200.0;  // resonant OD, reported only

    double diffusion_D = 1.05e-2;    // m^2/s (105 cm^2/s)
    double decoherence_rate = 0.0;   // 1/s
    double tau_longitudinal = std::numeric_limits<double>::infinity();  // s

    double expansion_ratio() const {
        return std::abs(gradient_write) / std::abs(gradient_read);
    }

    void check() const {
        if (!(cell_length > 0.0)) throw std::invalid_argument("MemoryConfig: cell_length must be > 0");
        if (diffusion_D < 0.0) throw std::invalid_argument("MemoryConfig: diffusion_D must be >= 0");
        if (optical_depth < 0.0) throw std::invalid_argument("MemoryConfig: optical_depth must be >= 0");
        if (gradient_write == 0.0 || gradient_read == 0.0)
            throw std::invalid_argument("MemoryConfig: gradients must be nonzero");
        if (std::signbit(gradient_write) == std::signbit(gradient_read))
            throw std::invalid_argument("MemoryConfig: write and read gradients must have opposite signs");
        if (decoherence_rate < 0.0)
            throw std::invalid_argument("MemoryConfig: decoherence_rate must be >= 0");
        if (!(flip_duration >= 0.0))
            throw std::invalid_argument("MemoryConfig: flip_duration must be >= 0");
    }

    /// Set the read gradient from an expansion ratio r = |write|/|read|.
    MemoryConfig& set_expansion(double r) {
        if (!(r > 0.0)) throw std::invalid_argument("set_expansion: ratio must be > 0");
        gradient_read = -gradient_write / r;
        return *this;
    }
};

}  // namespace gemsim
