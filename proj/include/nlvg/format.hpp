#pragma once

#include <cstdio>
#include <string>
#include <string_view>

namespace nlvg {

/// CSV number format: scientific with 9 significant digits, e.g. 1.23456789e+00.
inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.8e", v);
    return buf;
}

inline std::string format_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

inline std::string pad_left(std::string_view s, std::size_t width) {
    std::string out(width > s.size() ? width - s.size() : 0, ' ');
    out += s;
    return out;
}

inline std::string pad_right(std::string_view s, std::size_t width) {
    std::string out(s);
    if (out.size() < width) {
        out.append(width - out.size(), ' ');
    }
    return out;
}

} // namespace nlvg
