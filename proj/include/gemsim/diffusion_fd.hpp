#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "gemsim/image.hpp"

namespace gemsim {

// Finite-difference integration of d(rho)/dt = D laplacian(rho) with the
// 5-point stencil and reflecting (zero-flux) boundaries. This is the
// independent check on the analytic Gaussian path and shares no code
// with it beyond the image type.

enum class FdScheme { explicit_euler, backward_euler };

namespace fd_detail {

// 5-point Laplacian scaled by 1/h^2. Ghost cells clamp to the edge
// value (zero-flux faces), so the discrete mass sum is conserved
// exactly.
inline void laplacian(const ImageField& u, std::vector<double>& out) {
    const int w = u.width(), h = u.height();
    const double inv_h2 = 1.0 / (u.pitch() * u.pitch());
    for (int y = 0; y < h; ++y) {
        const int ym = y > 0 ? y - 1 : 0;
        const int yp = y < h - 1 ? y + 1 : h - 1;
        for (int x = 0; x < w; ++x) {
            const int xm = x > 0 ? x - 1 : 0;
            const int xp = x < w - 1 ? x + 1 : w - 1;
            out[static_cast<size_t>(y) * w + x] =
                inv_h2 * (u.at(xm, y) + u.at(xp, y) + u.at(x, ym) + u.at(x, yp) - 4.0 * u.at(x, y));
        }
    }
}

// Conjugate gradient solve of (I - c*Lap) x = b for backward Euler.
// The operator is symmetric positive definite for c >= 0.
inline void solve_backward_step(ImageField& u, double c, double rtol = 1e-13,
                                int max_iter = 4000) {
    const size_t n = u.values().size();
    std::vector<double> b = u.values();
    std::vector<double> r(n), p(n), ap(n), lap(n);

    auto apply = [&](const std::vector<double>& x, std::vector<double>& out) {
        ImageField tmp = u;
        tmp.values() = x;
        laplacian(tmp, lap);
        for (size_t i = 0; i < n; ++i) out[i] = x[i] - c * lap[i];
    };

    // start from b (the previous state)
    std::vector<double> x = b;
    apply(x, ap);
    double bnorm2 = 0.0;
    for (size_t i = 0; i < n; ++i) {
        r[i] = b[i] - ap[i];
        bnorm2 += b[i] * b[i];
    }
    p = r;
    double rs = 0.0;
    for (size_t i = 0; i < n; ++i) rs += r[i] * r[i];
    const double stop = rtol * rtol * (bnorm2 > 0 ? bnorm2 : 1.0);

    for (int it = 0; it < max_iter && rs > stop; ++it) {
        apply(p, ap);
        double pap = 0.0;
        for (size_t i = 0; i < n; ++i) pap += p[i] * ap[i];
        const double alpha = rs / pap;
        for (size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        double rs_new = 0.0;
        for (size_t i = 0; i < n; ++i) rs_new += r[i] * r[i];
        const double beta = rs_new / rs;
        rs = rs_new;
        for (size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    }
    u.values() = x;
}

}  // namespace fd_detail

/// Time-step the diffusion equation from the given image over total time
/// t with step dt. The explicit scheme requires D*dt/pitch^2 <= 0.25;
/// backward Euler is unconditionally stable. The final step is shortened
/// to land exactly on t.
inline ImageField fd_oracle(const ImageField& img, double D, double t, double dt,
                            FdScheme scheme = FdScheme::explicit_euler) {
    if (D < 0.0 || t < 0.0) throw std::invalid_argument("fd_oracle: negative D or t");
    if (t > 0.0 && !(dt > 0.0)) throw std::invalid_argument("fd_oracle: dt must be > 0");
    const double h2 = img.pitch() * img.pitch();
    if (scheme == FdScheme::explicit_euler) {
        const double stability = D * dt / h2;
        if (stability > 0.25)
            throw std::invalid_argument("fd_oracle: explicit step unstable, D*dt/pitch^2 = " +
                                        std::to_string(stability) + " > 0.25");
    }

    ImageField u = img;
    if (D == 0.0 || t == 0.0) return u;

    std::vector<double> lap(u.values().size());
    double elapsed = 0.0;
    while (elapsed < t) {
        const double step = std::min(dt, t - elapsed);
        if (scheme == FdScheme::explicit_euler) {
            fd_detail::laplacian(u, lap);
            for (size_t i = 0; i < lap.size(); ++i) u.values()[i] += D * step * lap[i];
        } else {
            fd_detail::solve_backward_step(u, D * step);
        }
        elapsed += step;
    }
    return u;
}

}  // namespace gemsim
