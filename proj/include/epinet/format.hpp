#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace epinet {

/// Bad configuration or malformed input data.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shortest text that parses back to the same double.
inline std::string format_exact(double x) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc{}) throw std::runtime_error("to_chars failed");
    return {buf, end};
}

inline std::string format_sig6(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

inline std::string format_fixed(double x, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
    return buf;
}

inline double parse_double(std::string_view s) {
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ConfigError("not a number: '" + std::string(s) + "'");
    return x;
}

template <class Int = std::int64_t>
Int parse_int(std::string_view s) {
    Int x = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ConfigError("not an integer: '" + std::string(s) + "'");
    return x;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

/// Reads a CSV file, checking the header; returns the data lines.
inline std::vector<std::string> read_csv_lines(const std::filesystem::path& path,
                                               std::string_view expected_header) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string header;
    if (!std::getline(in, header)) throw IoError("empty file " + path.string());
    if (header != expected_header)
        throw ConfigError("unexpected header in " + path.string() + ": " + header);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) lines.push_back(std::move(line));
    return lines;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

inline void finish_output(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace epinet
