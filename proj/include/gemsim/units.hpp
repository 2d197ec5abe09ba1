#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gemsim {

/// Dimension exponents over the SI base quantities this project touches:
/// length (m), time (s), magnetic flux density (T).
struct Dimensions {
    int length = 0;
    int time = 0;
    int field = 0;

    friend bool operator==(const Dimensions&, const Dimensions&) = default;
};

/// A physical unit: a scale factor to SI plus its dimension signature.
///
/// Units are parsed from strings like "um", "cm^2/s", "uT/cm", "MHz".
/// A compound unit is a product of prefixed symbols separated by '*',
/// with at most one '/'; exponents use '^'.
class Unit {
public:
    Unit() = default;
    Unit(double scale, Dimensions dims) : scale_(scale), dims_(dims) {}

    double scale() const { return scale_; }
    const Dimensions& dims() const { return dims_; }

    static Unit parse(std::string_view text);

private:
    double scale_ = 1.0;
    Dimensions dims_{};
};

namespace detail {

struct BaseUnit {
    const char* symbol;
    double scale;
    Dimensions dims;
};

// "rad" and "G" (gauss) appear in lab notation; both reduce onto the
// three base dimensions used here.
inline constexpr BaseUnit kBaseUnits[] = {
    {"m", 1.0, {1, 0, 0}},
    {"s", 1.0, {0, 1, 0}},
    {"T", 1.0, {0, 0, 1}},
    {"G", 1e-4, {0, 0, 1}},
    {"Hz", 1.0, {0, -1, 0}},
    {"rad", 1.0, {0, 0, 0}},
    {"px", 1.0, {0, 0, 0}},
    {"1", 1.0, {0, 0, 0}},
};

inline bool si_prefix(char c, double& factor) {
    switch (c) {
        case 'G': factor = 1e9; return true;
        case 'M': factor = 1e6; return true;
        case 'k': factor = 1e3; return true;
        case 'c': factor = 1e-2; return true;
        case 'm': factor = 1e-3; return true;
        case 'u': factor = 1e-6; return true;
        case 'n': factor = 1e-9; return true;
        case 'p': factor = 1e-12; return true;
        case 'f': factor = 1e-15; return true;
        default: return false;
    }
}

// One token: [prefix]symbol[^exponent]. Bare symbols win over
// prefix+symbol so that "m" is metre and "ms" is millisecond.
inline Unit parse_token(std::string_view tok) {
    if (tok.empty()) throw std::invalid_argument("empty unit token");

    int exponent = 1;
    if (auto caret = tok.find('^'); caret != std::string_view::npos) {
        const auto exp_text = tok.substr(caret + 1);
        if (exp_text.empty()) throw std::invalid_argument("missing exponent in unit: " + std::string(tok));
        try {
            exponent = std::stoi(std::string(exp_text));
        } catch (const std::exception&) {
            throw std::invalid_argument("bad exponent in unit: " + std::string(tok));
        }
        tok = tok.substr(0, caret);
    }

    // Accept the micro sign as an alias for 'u'.
    std::string name(tok);
    if (name.size() >= 2 && static_cast<unsigned char>(name[0]) == 0xC2 &&
        static_cast<unsigned char>(name[1]) == 0xB5) {
        name = "u" + name.substr(2);
    }

    double scale = 0.0;
    Dimensions dims;
    bool found = false;
    for (const auto& base : kBaseUnits) {
        if (name == base.symbol) {
            scale = base.scale;
            dims = base.dims;
            found = true;
            break;
        }
    }
    if (!found && name.size() > 1) {
        double prefix = 1.0;
        if (si_prefix(name[0], prefix)) {
            const std::string_view rest = std::string_view(name).substr(1);
            for (const auto& base : kBaseUnits) {
                if (rest == base.symbol) {
                    scale = prefix * base.scale;
                    dims = base.dims;
                    found = true;
                    break;
                }
            }
        }
    }
    if (!found) throw std::invalid_argument("unknown unit: " + std::string(tok));

    double total = 1.0;
    for (int i = 0; i < std::abs(exponent); ++i) total *= scale;
    if (exponent < 0) total = 1.0 / total;
    return Unit(total, Dimensions{dims.length * exponent, dims.time * exponent, dims.field * exponent});
}

}  // namespace detail

inline Unit Unit::parse(std::string_view text) {
    // strip spaces
    std::string clean;
    clean.reserve(text.size());
    for (char c : text)
        if (c != ' ') clean.push_back(c);
    if (clean.empty()) throw std::invalid_argument("empty unit");

    double scale = 1.0;
    Dimensions dims;
    const auto slash = clean.find('/');
    if (clean.find('/', slash + 1) != std::string::npos)
        throw std::invalid_argument("at most one '/' in a unit: " + clean);

    auto accumulate = [&](std::string_view part, int sign) {
        size_t start = 0;
        while (start <= part.size()) {
            auto star = part.find('*', start);
            if (star == std::string_view::npos) star = part.size();
            const Unit u = detail::parse_token(part.substr(start, star - start));
            if (sign > 0) {
                scale *= u.scale();
                dims.length += u.dims().length;
                dims.time += u.dims().time;
                dims.field += u.dims().field;
            } else {
                scale /= u.scale();
                dims.length -= u.dims().length;
                dims.time -= u.dims().time;
                dims.field -= u.dims().field;
            }
            if (star == part.size()) break;
            start = star + 1;
        }
    };

    if (slash == std::string::npos) {
        accumulate(clean, +1);
    } else {
        accumulate(std::string_view(clean).substr(0, slash), +1);
        accumulate(std::string_view(clean).substr(slash + 1), -1);
    }
    return Unit(scale, dims);
}

/// Exact scale conversion between dimensionally compatible units.
/// Throws std::invalid_argument on a dimension mismatch.
inline double unit_convert(double value, const Unit& from, const Unit& to) {
    if (!(from.dims() == to.dims()))
        throw std::invalid_argument("incompatible dimensions in unit conversion");
    return value * (from.scale() / to.scale());
}

inline double unit_convert(double value, std::string_view from, std::string_view to) {
    return unit_convert(value, Unit::parse(from), Unit::parse(to));
}

/// Convert a value in unit `from` to SI.
inline double to_si(double value, std::string_view from) {
    return value * Unit::parse(from).scale();
}

// Physical constants used by the Zeeman conversion.
inline constexpr double kBohrMagneton = 9.2740100783e-24;  // J/T
inline constexpr double kHbar = 1.054571817e-34;           // J s

/// Detuning-gradient slope (rad s^-1 m^-1) from a magnetic field
/// gradient (T/m) via an effective g-factor.
inline double zeeman_gradient(double field_gradient_T_per_m, double g_eff) {
    return g_eff * kBohrMagneton / kHbar * field_gradient_T_per_m;
}

}  // namespace gemsim
