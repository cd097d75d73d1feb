#pragma once

#include <charconv>
#include <cstdio>
#include <string>
#include <vector>

#include "fair_curtail/errors.hpp"

namespace fair_curtail::csv {

inline std::vector<std::string> split(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

inline double to_double(const std::string& s, const std::string& context) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ParseError("not a number: '" + s + "' (" + context + ")");
    }
    return v;
}

// Fixed six-decimal formatting keeps generated files byte-reproducible.
inline std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

inline std::string join(const std::vector<std::string>& fields, char sep = ',') {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) out.push_back(sep);
        out += fields[i];
    }
    return out;
}

}  // namespace fair_curtail::csv
