#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

#include "gemsim/image.hpp"

namespace gemsim {

/// Heat-kernel propagator for a diffusion coefficient D over a time t.
/// The per-axis standard deviation is sigma = sqrt(2 D t); the 2D kernel
/// is the product of the two axis kernels.
struct DiffusionKernel {
    double D = 0.0;
    double t = 0.0;
    double sigma = 0.0;
    // Truncation radius. 6.5 sigma rather than a bare 6 so the
    // discarded tail (2 Phi_c(6.5) ~ 8e-11) stays below the 1e-9 unit-
    // mass budget of the truncated kernel.
    double support_radius = 0.0;

    DiffusionKernel(double D_, double t_) : D(D_), t(t_) {
        if (D < 0.0 || t < 0.0)
            throw std::invalid_argument("DiffusionKernel: D and t must be >= 0");
        sigma = std::sqrt(2.0 * D * t);
        support_radius = 6.5 * sigma;
    }

    bool is_identity() const { return sigma == 0.0; }

    /// Discrete taps on a pixel grid: the Gaussian sampled at pixel
    /// offsets, truncated at the support radius and normalized to unit sum. For
    /// sigma above a pixel or two the normalized samples reproduce the
    /// continuous transfer exp(-k^2 sigma^2 / 2) to aliasing accuracy,
    /// so repeated application composes exactly like the heat
    /// semigroup.
    std::vector<double> taps(double pitch) const {
        if (is_identity()) return {1.0};
        const int radius = static_cast<int>(std::ceil(support_radius / pitch));
        std::vector<double> w(2 * radius + 1);
        double sum = 0.0;
        for (int j = -radius; j <= radius; ++j) {
            const double u = j * pitch / sigma;
            w[j + radius] = std::exp(-0.5 * u * u);
            sum += w[j + radius];
        }
        for (double& v : w) v /= sum;
        return w;
    }

    /// Raw (pre-renormalization) mass of the truncated kernel; within
    /// 1e-9 of 1 by construction of the support radius.
    double truncated_mass(double pitch) const {
        if (is_identity()) return 1.0;
        const int radius = static_cast<int>(std::ceil(support_radius / pitch));
        const double inv = 1.0 / (sigma * std::sqrt(2.0));
        return 0.5 * (std::erf((radius + 0.5) * pitch * inv) - std::erf(-(radius + 0.5) * pitch * inv));
    }
};

enum class ConvolutionPath { separable, spectral };

/// Domain handling. `pad` grows the canvas by the kernel support, so
/// the output holds the full free-space convolution and conserves
/// power; `fixed` keeps the grid of the input, which requires the
/// content to sit far enough from the border.
enum class BoundaryMode { pad, fixed };

namespace detail {

inline double normal_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

template <class Fn>
inline void parallel_rows(int rows, int threads, Fn&& fn) {
    if (threads <= 1 || rows < 2 * threads) {
        fn(0, rows);
        return;
    }
    std::vector<std::thread> pool;
    const int chunk = (rows + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int lo = t * chunk;
        const int hi = std::min(rows, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([=, &fn] { fn(lo, hi); });
    }
    for (auto& th : pool) th.join();
}

// Zero-extended 1D convolution of each row with symmetric taps.
inline void convolve_rows(const ImageField& src, ImageField& dst,
                          const std::vector<double>& taps, int threads) {
    const int radius = static_cast<int>(taps.size() / 2);
    const int w = src.width();
    parallel_rows(src.height(), threads, [&](int y0, int y1) {
        for (int y = y0; y < y1; ++y) {
            for (int x = 0; x < w; ++x) {
                const int j0 = std::max(-radius, -x);
                const int j1 = std::min(radius, w - 1 - x);
                double acc = 0.0;
                for (int j = j0; j <= j1; ++j) acc += taps[j + radius] * src.at(x + j, y);
                dst.at(x, y) = acc;
            }
        }
    });
}

inline void convolve_cols(const ImageField& src, ImageField& dst,
                          const std::vector<double>& taps, int threads) {
    const int radius = static_cast<int>(taps.size() / 2);
    const int h = src.height();
    parallel_rows(src.width(), threads, [&](int x0, int x1) {
        for (int x = x0; x < x1; ++x) {
            for (int y = 0; y < h; ++y) {
                const int j0 = std::max(-radius, -y);
                const int j1 = std::min(radius, h - 1 - y);
                double acc = 0.0;
                for (int j = j0; j <= j1; ++j) acc += taps[j + radius] * src.at(x, y + j);
                dst.at(x, y) = acc;
            }
        }
    });
}

// Iterative radix-2 complex FFT, in place. Sizes are powers of two.
inline void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
    const size_t n = a.size();
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                const auto u = a[i + k];
                const auto v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse)
        for (auto& v : a) v /= static_cast<double>(n);
}

// FFT-based zero-padded convolution of one line with the same taps as
// the direct path; agrees with it to rounding error.
inline std::vector<double> fft_convolve_line(const std::vector<double>& line,
                                             const std::vector<double>& taps) {
    const int radius = static_cast<int>(taps.size() / 2);
    const size_t need = line.size() + taps.size();
    size_t n = 1;
    while (n < need) n <<= 1;
    std::vector<std::complex<double>> fa(n), fb(n);
    for (size_t i = 0; i < line.size(); ++i) fa[i] = line[i];
    for (size_t i = 0; i < taps.size(); ++i) fb[i] = taps[i];
    fft_pow2(fa, false);
    fft_pow2(fb, false);
    for (size_t i = 0; i < n; ++i) fa[i] *= fb[i];
    fft_pow2(fa, true);
    std::vector<double> out(line.size());
    for (size_t i = 0; i < line.size(); ++i) out[i] = fa[i + radius].real();
    return out;
}

}  // namespace detail

/// Upper bound on the fraction of total power that a blur of width
/// sigma would push past the image border (per-axis Gaussian tails,
/// summed over the four sides).
inline double escaping_power_bound(const ImageField& img, double sigma) {
    if (sigma <= 0.0) return 0.0;
    const double total = img.sum();
    if (total <= 0.0) return 0.0;
    double escape = 0.0;
    std::vector<double> col(img.width(), 0.0), row(img.height(), 0.0);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            col[x] += img.at(x, y);
            row[y] += img.at(x, y);
        }
    for (int x = 0; x < img.width(); ++x) {
        const double dl = (x + 0.5) * img.pitch();
        const double dr = (img.width() - x - 0.5) * img.pitch();
        escape += col[x] * (detail::normal_tail(dl / sigma) + detail::normal_tail(dr / sigma));
    }
    for (int y = 0; y < img.height(); ++y) {
        const double dt = (y + 0.5) * img.pitch();
        const double db = (img.height() - y - 0.5) * img.pitch();
        escape += row[y] * (detail::normal_tail(dt / sigma) + detail::normal_tail(db / sigma));
    }
    return escape / total;
}

/// Transverse diffusion of a stored excitation: 2D convolution with the
/// Gaussian of variance 2 D t per axis (separable heat kernel). In the
/// default pad mode the output grows by the kernel support so the full
/// spread is captured and power is conserved. In fixed mode the grid is
/// kept and a run is rejected when more than 1e-4 of the power would
/// leave it.
inline ImageField propagate(const ImageField& img, double D, double t,
                            ConvolutionPath path = ConvolutionPath::separable,
                            BoundaryMode boundary = BoundaryMode::pad,
                            int threads = 1) {
    if (D < 0.0) throw std::invalid_argument("propagate: negative D");
    if (t < 0.0) throw std::invalid_argument("propagate: negative t");
    const DiffusionKernel kernel(D, t);
    if (kernel.is_identity()) return img;

    const auto taps = kernel.taps(img.pitch());
    const int radius = static_cast<int>(taps.size() / 2);

    const ImageField src = boundary == BoundaryMode::pad ? zero_embed(img, radius) : img;

    const double escape = escaping_power_bound(src, kernel.sigma);
    if (escape > 1e-4)
        throw std::invalid_argument(
            "propagate: estimated " + std::to_string(escape) +
            " of the power would leave the padded domain (limit 1e-4); enlarge the canvas");

    ImageField tmp(src.width(), src.height(), src.pitch());
    ImageField out(src.width(), src.height(), src.pitch());

    if (path == ConvolutionPath::separable) {
        detail::convolve_rows(src, tmp, taps, threads);
        detail::convolve_cols(tmp, out, taps, threads);
    } else {
        for (int y = 0; y < src.height(); ++y) {
            std::vector<double> line(src.width());
            for (int x = 0; x < src.width(); ++x) line[x] = src.at(x, y);
            const auto res = detail::fft_convolve_line(line, taps);
            for (int x = 0; x < src.width(); ++x) tmp.at(x, y) = res[x];
        }
        for (int x = 0; x < src.width(); ++x) {
            std::vector<double> line(src.height());
            for (int y = 0; y < src.height(); ++y) line[y] = tmp.at(x, y);
            const auto res = detail::fft_convolve_line(line, taps);
            for (int y = 0; y < src.height(); ++y) out.at(x, y) = res[y];
        }
    }
    return out;
}

/// One stored transverse slice: which pulse wrote it, how long it sat
/// in the vapor, and its image.
struct StoredSlice {
    int pulse_index = 0;
    double storage_time = std::numeric_limits<double>::quiet_NaN();
    ImageField image;
};

/// Blur each stored slice for its own storage time. Longitudinal
/// diffusion enters only as a uniform loss exp(-t/tau_long); the
/// default tau_long = infinity disables it.
inline std::vector<ImageField> apply_to_storage(
    const std::vector<StoredSlice>& slices, double D,
    double tau_long = std::numeric_limits<double>::infinity(), int threads = 1) {
    std::vector<ImageField> out;
    out.reserve(slices.size());
    for (const auto& slice : slices) {
        if (!std::isfinite(slice.storage_time) || slice.storage_time < 0.0)
            throw std::invalid_argument("apply_to_storage: slice lacks a valid storage time");
        ImageField blurred = propagate(slice.image, D, slice.storage_time,
                                       ConvolutionPath::separable, BoundaryMode::fixed, threads);
        if (std::isfinite(tau_long)) {
            const double loss = std::exp(-slice.storage_time / tau_long);
            for (double& v : blurred.values()) v *= loss;
        }
        out.push_back(std::move(blurred));
    }
    return out;
}

}  // namespace gemsim
