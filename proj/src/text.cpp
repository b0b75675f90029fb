// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 celltrack contributors

#include "celltrack/text.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace celltrack::text {

namespace {

template <typename T>
std::string to_chars_string(T v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) return "nan";
    return std::string(buf.data(), ptr);
}

template <typename T>
bool from_chars_full(std::string_view s, T& out) {
    s = trim(s);
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

std::string format(double v) {
    if (v == 0.0) return "0";  // folds -0
    return to_chars_string(v);
}

std::string format(float v) {
    if (v == 0.0f) return "0";
    return to_chars_string(v);
}

std::string format(long long v) { return to_chars_string(v); }

bool parse(std::string_view s, double& out) { return from_chars_full(s, out) && std::isfinite(out); }
bool parse(std::string_view s, float& out) { return from_chars_full(s, out) && std::isfinite(out); }
bool parse(std::string_view s, long long& out) { return from_chars_full(s, out); }
bool parse(std::string_view s, int& out) { return from_chars_full(s, out); }

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace celltrack::text
