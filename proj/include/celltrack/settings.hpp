// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 celltrack contributors

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "celltrack/analysis.hpp"
#include "celltrack/config.hpp"
#include "celltrack/metrics.hpp"
#include "celltrack/simulator.hpp"

namespace celltrack {

// Everything a command can be configured with, addressable by dotted key
// (`tracker.tau_high`, `sim.frames`, ...). Defaults are the reference setup.
struct Settings {
    TrackerConfig tracker;
    bool embedding_dim_set = false;  // false: adopt the dimension of the input video
    SimulationConfig sim;
    int sim_videos = 1;
    CorruptionConfig corrupt;
    analysis::AnalysisFilter analysis;
    AOGMWeights aogm;
    std::uint64_t seed = 0;

    void validate() const;
};

// Throws InvalidArgument for unknown keys, Parse for malformed values.
void set_setting(Settings& s, std::string_view key, std::string_view value);
std::string get_setting(const Settings& s, std::string_view key);
std::vector<std::string> setting_keys();

// Flat `key=value` lines; blank lines and `#` comments are skipped, `run.*`
// keys (manifest bookkeeping) are ignored.
void load_settings(Settings& s, std::istream& in, const std::string& source_name = "<stream>");
void load_settings_file(Settings& s, const std::string& path);
void write_settings(std::ostream& out, const Settings& s);

}  // namespace celltrack
