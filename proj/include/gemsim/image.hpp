#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace gemsim {

/// A 2D intensity map on a square-pixel grid with a physical pitch.
///
/// Values are in arbitrary linear units. Stored images are non-negative;
/// intermediate signed buffers reuse the same type. Row-major storage,
/// index (x, y) = column, row.
class ImageField {
public:
    ImageField() = default;

    ImageField(int width_px, int height_px, double pitch_m, double fill = 0.0)
        : width_(width_px), height_(height_px), pitch_(pitch_m),
          values_(static_cast<size_t>(width_px > 0 ? width_px : 0) *
                      static_cast<size_t>(height_px > 0 ? height_px : 0),
                  fill) {
        if (width_px < 1 || height_px < 1)
            throw std::invalid_argument("ImageField: width and height must be >= 1");
        if (!(pitch_m > 0.0))
            throw std::invalid_argument("ImageField: pitch must be > 0");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    double pitch() const { return pitch_; }
    bool empty() const { return values_.empty(); }

    double& at(int x, int y) { return values_[static_cast<size_t>(y) * width_ + x]; }
    double at(int x, int y) const { return values_[static_cast<size_t>(y) * width_ + x]; }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    bool same_shape(const ImageField& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    double sum() const {
        double s = 0.0;
        for (double v : values_) s += v;
        return s;
    }

    /// Integrated power: sum of values times the pixel area.
    double total_power() const { return sum() * pitch_ * pitch_; }

    double max_value() const {
        return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
    }
    double min_value() const {
        return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
    }

    /// Physical x coordinate of a pixel centre, measured from the centre column.
    double coord_x(int x) const { return (x - width_ / 2) * pitch_; }
    double coord_y(int y) const { return (y - height_ / 2) * pitch_; }

    void check_finite() const {
        for (double v : values_)
            if (!std::isfinite(v)) throw std::runtime_error("ImageField: non-finite value");
    }

private:
    int width_ = 0;
    int height_ = 0;
    double pitch_ = 0.0;
    std::vector<double> values_;
};

/// Optical imaging with a given magnification: the pitch scales by the
/// magnification and values rescale so total power is conserved.
/// Pixel count is unchanged.
inline ImageField resample(const ImageField& img, double magnification) {
    if (!(magnification > 0.0))
        throw std::invalid_argument("resample: magnification must be > 0");
    ImageField out(img.width(), img.height(), img.pitch() * magnification);
    const double gain = 1.0 / (magnification * magnification);
    for (size_t i = 0; i < img.values().size(); ++i)
        out.values()[i] = img.values()[i] * gain;
    return out;
}

inline ImageField transpose(const ImageField& img) {
    ImageField out(img.height(), img.width(), img.pitch());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            out.at(y, x) = img.at(x, y);
    return out;
}

/// Rotate by 90 degrees counter-clockwise (pixel-exact).
inline ImageField rotate90(const ImageField& img) {
    ImageField out(img.height(), img.width(), img.pitch());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            out.at(y, img.width() - 1 - x) = img.at(x, y);
    return out;
}

/// Embed into a larger canvas with a zero margin of `pad` pixels.
inline ImageField zero_embed(const ImageField& img, int pad) {
    if (pad < 0) throw std::invalid_argument("zero_embed: negative pad");
    ImageField out(img.width() + 2 * pad, img.height() + 2 * pad, img.pitch());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            out.at(x + pad, y + pad) = img.at(x, y);
    return out;
}

inline ImageField crop(const ImageField& img, int x0, int y0, int w, int h) {
    if (x0 < 0 || y0 < 0 || x0 + w > img.width() || y0 + h > img.height())
        throw std::invalid_argument("crop: window outside image");
    ImageField out(w, h, img.pitch());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out.at(x, y) = img.at(x0 + x, y0 + y);
    return out;
}

inline ImageField scaled(const ImageField& img, double factor) {
    ImageField out = img;
    for (double& v : out.values()) v *= factor;
    return out;
}

inline void accumulate(ImageField& dst, const ImageField& src, double weight) {
    if (!dst.same_shape(src))
        throw std::invalid_argument("accumulate: shape mismatch");
    for (size_t i = 0; i < dst.values().size(); ++i)
        dst.values()[i] += weight * src.values()[i];
}

}  // namespace gemsim
