#pragma once

// Minimal CSV helpers.  Doubles are written in the shortest form that reads
// back to the same value, so files are byte-stable and lossless.

#include <charconv>
#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "ddqn/errors.hpp"

namespace ddqn::csv {

inline std::string format(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

inline double parse_double(std::string_view field) {
    double value = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
        throw IoError("csv: cannot parse '" + std::string(field) + "' as a number");
    return value;
}

template <typename Int>
Int parse_int(std::string_view field) {
    Int value{};
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
        throw IoError("csv: cannot parse '" + std::string(field) + "' as an integer");
    return value;
}

// Reads the next non-empty line; false at end of stream.  Strips a trailing '\r'.
inline bool next_line(std::istream& is, std::string& line) {
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) return true;
    }
    return false;
}

}  // namespace ddqn::csv
