#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include "gemsim/image.hpp"

namespace gemsim {

// Binary 16-bit PGM (P5, maxval 65535, big-endian samples) plus a
// sidecar "<path>.meta" key/value file carrying the physical pitch and
// the gray-to-value scale. Writing quantizes to 16 bits; a written file
// reads back and rewrites byte-identically.

namespace detail {

inline void skip_pnm_junk(std::istream& in) {
    for (;;) {
        int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            return;
        }
    }
}

inline long read_pnm_int(std::istream& in) {
    skip_pnm_junk(in);
    long v = 0;
    if (!(in >> v)) throw std::runtime_error("pgm: malformed header");
    return v;
}

}  // namespace detail

inline std::string pgm_meta_path(const std::string& pgm_path) { return pgm_path + ".meta"; }

inline void write_pgm16(const ImageField& img, const std::string& path) {
    img.check_finite();
    if (img.min_value() < 0.0)
        throw std::invalid_argument("write_pgm16: stored images must be non-negative");

    const double maxv = img.max_value();
    const double scale = maxv > 0.0 ? maxv / 65535.0 : 1.0;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_pgm16: cannot open " + path);
    out << "P5\n" << img.width() << " " << img.height() << "\n65535\n";
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const long g = std::lround(img.at(x, y) / scale);
            const uint16_t q = static_cast<uint16_t>(std::clamp(g, 0L, 65535L));
            const unsigned char bytes[2] = {static_cast<unsigned char>(q >> 8),
                                            static_cast<unsigned char>(q & 0xFF)};
            out.write(reinterpret_cast<const char*>(bytes), 2);
        }
    }
    if (!out) throw std::runtime_error("write_pgm16: write failed for " + path);

    std::ofstream meta(pgm_meta_path(path));
    if (!meta) throw std::runtime_error("write_pgm16: cannot open " + pgm_meta_path(path));
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", img.pitch());
    meta << "pitch_m = " << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", scale);
    meta << "value_scale = " << buf << "\n";
    meta << "units = arbitrary\n";
}

inline ImageField read_pgm16(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_pgm16: cannot open " + path);
    char m0 = 0, m1 = 0;
    in.get(m0).get(m1);
    if (m0 != 'P' || m1 != '5') throw std::runtime_error("read_pgm16: not a binary PGM (P5): " + path);
    const long w = detail::read_pnm_int(in);
    const long h = detail::read_pnm_int(in);
    const long maxval = detail::read_pnm_int(in);
    if (w < 1 || h < 1 || maxval < 1 || maxval > 65535)
        throw std::runtime_error("read_pgm16: bad dimensions or maxval in " + path);
    in.get();  // the single whitespace after maxval

    double pitch = 0.0, scale = 1.0;
    {
        std::ifstream meta(pgm_meta_path(path));
        if (!meta)
            throw std::runtime_error("read_pgm16: missing sidecar " + pgm_meta_path(path));
        std::string line;
        while (std::getline(meta, line)) {
            std::istringstream ls(line);
            std::string key, eq;
            double value = 0.0;
            if (ls >> key >> eq && eq == "=" && ls >> value) {
                if (key == "pitch_m") pitch = value;
                if (key == "value_scale") scale = value;
            }
        }
        if (!(pitch > 0.0))
            throw std::runtime_error("read_pgm16: sidecar lacks a valid pitch_m in " +
                                     pgm_meta_path(path));
    }

    ImageField img(static_cast<int>(w), static_cast<int>(h), pitch);
    const bool two_byte = maxval > 255;
    for (long y = 0; y < h; ++y) {
        for (long x = 0; x < w; ++x) {
            unsigned char bytes[2] = {0, 0};
            in.read(reinterpret_cast<char*>(bytes), two_byte ? 2 : 1);
            if (!in) throw std::runtime_error("read_pgm16: truncated pixel data in " + path);
            const unsigned g = two_byte ? (bytes[0] << 8 | bytes[1]) : bytes[0];
            img.at(static_cast<int>(x), static_cast<int>(y)) = g * scale;
        }
    }
    return img;
}

}  // namespace gemsim
