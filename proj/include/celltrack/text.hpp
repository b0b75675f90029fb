// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 celltrack contributors

#pragma once

#include <string>
#include <string_view>
#include <vector>

// Shortest round-trip number formatting and strict parsing, shared by every
// text format the library reads or writes.
namespace celltrack::text {

std::string format(double v);
std::string format(float v);
std::string format(long long v);

bool parse(std::string_view s, double& out);
bool parse(std::string_view s, float& out);
bool parse(std::string_view s, long long& out);
bool parse(std::string_view s, int& out);

std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

}  // namespace celltrack::text
