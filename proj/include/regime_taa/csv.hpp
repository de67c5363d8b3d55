// csv.hpp
// Minimal CSV plumbing: comma-separated, optional double quotes, no embedded
// newlines. Numbers are written in shortest round-trip form so that output
// files are byte-stable across runs.

#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "regime_taa/error.hpp"

namespace regime_taa::csv {

struct Row {
    std::size_t line = 0;  // 1-based line number in the source text
    std::vector<std::string> cells;
};

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> out;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.emplace_back(trim(cell));
            cell.clear();
        } else {
            cell.push_back(c);
        }
    }
    out.emplace_back(trim(cell));
    return out;
}

/// Splits text into rows, skipping lines that are blank or contain only commas.
inline std::vector<Row> parse(std::string_view text) {
    std::vector<Row> rows;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        ++line_no;
        if (trim(line).find_first_not_of(',') != std::string_view::npos) {
            rows.push_back(Row{line_no, split_line(line)});
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return rows;
}

inline std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        if (s == "nan" || s == "NaN" || s == "NA") return std::numeric_limits<double>::quiet_NaN();
        if (s == "inf" || s == "Inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf" || s == "-Inf") return -std::numeric_limits<double>::infinity();
        return std::nullopt;
    }
    return v;
}

/// Shortest representation that parses back to the same double. NaN is
/// written as an empty cell (missing).
inline std::string format(double v) {
    if (std::isnan(v)) return "";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

/// Fixed-point rendering used by human-facing tables.
inline std::string format_fixed(double v, int digits) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
    return std::string(buf, ptr);
}

inline std::string join(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out.push_back(',');
        const auto& c = cells[i];
        if (c.find_first_of(",\"") != std::string::npos) {
            out.push_back('"');
            for (char ch : c) {
                if (ch == '"') out.push_back('"');
                out.push_back(ch);
            }
            out.push_back('"');
        } else {
            out += c;
        }
    }
    return out;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write file: " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace regime_taa::csv
