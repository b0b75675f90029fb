// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 celltrack contributors

#include "celltrack/settings.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>

#include "celltrack/error.hpp"
#include "celltrack/text.hpp"

namespace celltrack {

namespace {

struct Field {
    const char* key;
    std::function<void(Settings&, std::string_view)> set;
    std::function<std::string(const Settings&)> get;
};

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expected) {
    fail(ErrorKind::Parse, "setting '" + std::string(key) + "': '" + std::string(value) + "' is not " + expected);
}

template <typename Member>
Field real(const char* key, Member member) {
    return {key,
            [key, member](Settings& s, std::string_view v) {
                double d = 0.0;
                if (!text::parse(v, d)) bad_value(key, v, "a finite number");
                member(s) = d;
            },
            [member](const Settings& s) { return text::format(member(s)); }};
}

template <typename Member>
Field integer(const char* key, Member member) {
    return {key,
            [key, member](Settings& s, std::string_view v) {
                int i = 0;
                if (!text::parse(v, i)) bad_value(key, v, "an integer");
                member(s) = i;
            },
            [member](const Settings& s) { return std::to_string(member(s)); }};
}

template <typename Member>
Field boolean(const char* key, Member member) {
    return {key,
            [key, member](Settings& s, std::string_view v) {
                if (v == "true" || v == "1") member(s) = true;
                else if (v == "false" || v == "0") member(s) = false;
                else bad_value(key, v, "a boolean (true/false)");
            },
            [member](const Settings& s) { return std::string(member(s) ? "true" : "false"); }};
}

template <typename Member>
Field unsigned64(const char* key, Member member) {
    return {key,
            [key, member](Settings& s, std::string_view v) {
                std::uint64_t u = 0;
                auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), u);
                if (ec != std::errc() || p != v.data() + v.size() || v.empty()) bad_value(key, v, "an unsigned integer");
                member(s) = u;
            },
            [member](const Settings& s) { return std::to_string(member(s)); }};
}

template <typename Member>
Field string(const char* key, Member member) {
    return {key, [member](Settings& s, std::string_view v) { member(s) = std::string(v); },
            [member](const Settings& s) { return member(s); }};
}

#define CT_FIELD(kind, key, expr) kind(key, [](auto& s) -> auto& { return expr; })

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        CT_FIELD(unsigned64, "seed", s.seed),

        CT_FIELD(real, "tracker.tau_high", s.tracker.tau_high),
        CT_FIELD(real, "tracker.tau_low", s.tracker.tau_low),
        CT_FIELD(real, "tracker.tau_dst", s.tracker.tau_dst),
        CT_FIELD(real, "tracker.tau_sim", s.tracker.tau_sim),
        CT_FIELD(real, "tracker.lambda", s.tracker.lambda),
        CT_FIELD(integer, "tracker.memory_frames", s.tracker.memory_frames),
        {"tracker.embedding_dim",
         [](Settings& s, std::string_view v) {
             int i = 0;
             if (!text::parse(v, i)) bad_value("tracker.embedding_dim", v, "an integer");
             s.tracker.embedding_dim = i;
             s.embedding_dim_set = true;
         },
         [](const Settings& s) { return s.embedding_dim_set ? std::to_string(s.tracker.embedding_dim) : std::string("auto"); }},
        CT_FIELD(integer, "tracker.max_daughters", s.tracker.max_daughters),
        CT_FIELD(real, "tracker.kalman_process_noise", s.tracker.kalman_process_noise),
        CT_FIELD(real, "tracker.kalman_measurement_noise", s.tracker.kalman_measurement_noise),
        CT_FIELD(real, "tracker.kalman_initial_velocity_variance", s.tracker.kalman_initial_velocity_variance),
        CT_FIELD(boolean, "tracker.use_low_confidence", s.tracker.use_low_confidence),
        CT_FIELD(boolean, "tracker.use_kalman", s.tracker.use_kalman),

        CT_FIELD(integer, "sim.videos", s.sim_videos),
        CT_FIELD(integer, "sim.frames", s.sim.frames),
        CT_FIELD(integer, "sim.image_width", s.sim.image_width),
        CT_FIELD(integer, "sim.image_height", s.sim.image_height),
        CT_FIELD(integer, "sim.initial_cells", s.sim.initial_cells),
        CT_FIELD(integer, "sim.treatment_frame", s.sim.treatment_frame),
        CT_FIELD(boolean, "sim.treated", s.sim.treated),
        CT_FIELD(string, "sim.video_id", s.sim.video_id),
        CT_FIELD(string, "sim.dosage", s.sim.dosage),
        CT_FIELD(real, "sim.motion_sigma", s.sim.motion_sigma),
        CT_FIELD(real, "sim.velocity_persistence", s.sim.velocity_persistence),
        CT_FIELD(real, "sim.cell_diameter", s.sim.cell_diameter),
        CT_FIELD(real, "sim.diameter_sigma", s.sim.diameter_sigma),
        CT_FIELD(real, "sim.aspect_sigma", s.sim.aspect_sigma),
        CT_FIELD(real, "sim.size_walk_sigma", s.sim.size_walk_sigma),
        CT_FIELD(real, "sim.sister_shared_weight", s.sim.sister_shared_weight),
        {"sim.size_model",
         [](Settings& s, std::string_view v) {
             if (v == "heritable") s.sim.size_model = SizeModel::Heritable;
             else if (v == "independent") s.sim.size_model = SizeModel::Independent;
             else bad_value("sim.size_model", v, "heritable or independent");
         },
         [](const Settings& s) {
             return std::string(s.sim.size_model == SizeModel::Heritable ? "heritable" : "independent");
         }},
        CT_FIELD(real, "sim.daughter_size_noise", s.sim.daughter_size_noise),
        CT_FIELD(integer, "sim.min_cycle_frames", s.sim.min_cycle_frames),
        CT_FIELD(real, "sim.division_prob", s.sim.division_prob),
        CT_FIELD(real, "sim.division_prob_treated", s.sim.division_prob_treated),
        CT_FIELD(integer, "sim.cycle_frames", s.sim.cycle_frames),
        CT_FIELD(integer, "sim.division_spike_frame", s.sim.division_spike_frame),
        CT_FIELD(real, "sim.division_spike_prob", s.sim.division_spike_prob),
        CT_FIELD(real, "sim.death_prob", s.sim.death_prob),
        CT_FIELD(real, "sim.death_prob_treated", s.sim.death_prob_treated),
        CT_FIELD(integer, "sim.death_lag_frames", s.sim.death_lag_frames),
        CT_FIELD(real, "sim.dead_jitter", s.sim.dead_jitter),
        CT_FIELD(integer, "sim.max_cells", s.sim.max_cells),
        CT_FIELD(integer, "sim.embedding_dim", s.sim.embedding_dim),
        CT_FIELD(real, "sim.embedding_drift", s.sim.embedding_drift),
        CT_FIELD(real, "sim.daughter_embedding_noise", s.sim.daughter_embedding_noise),

        CT_FIELD(real, "corrupt.box_jitter", s.corrupt.box_jitter),
        CT_FIELD(real, "corrupt.p_drop", s.corrupt.p_drop),
        CT_FIELD(real, "corrupt.miss_fraction", s.corrupt.miss_fraction),
        CT_FIELD(real, "corrupt.fp_rate", s.corrupt.fp_rate),
        CT_FIELD(real, "corrupt.fp_confidence_max", s.corrupt.fp_confidence_max),
        CT_FIELD(real, "corrupt.embedding_noise", s.corrupt.embedding_noise),
        CT_FIELD(real, "corrupt.confidence_spread", s.corrupt.confidence_spread),
        CT_FIELD(real, "corrupt.tau_low", s.corrupt.tau_low),
        CT_FIELD(real, "corrupt.tau_high", s.corrupt.tau_high),

        CT_FIELD(integer, "analysis.min_track_frames", s.analysis.min_track_frames),
        CT_FIELD(integer, "analysis.max_generation", s.analysis.max_generation),
        CT_FIELD(integer, "analysis.max_interdivision_frames", s.analysis.max_interdivision_frames),
        CT_FIELD(boolean, "analysis.median_size", s.analysis.median_size),
        CT_FIELD(integer, "analysis.bin_size", s.analysis.bin_size),
        CT_FIELD(integer, "analysis.sample_size", s.analysis.sample_size),

        CT_FIELD(real, "aogm.ns", s.aogm.ns),
        CT_FIELD(real, "aogm.fn", s.aogm.fn),
        CT_FIELD(real, "aogm.fp", s.aogm.fp),
        CT_FIELD(real, "aogm.ed", s.aogm.ed),
        CT_FIELD(real, "aogm.ea", s.aogm.ea),
        CT_FIELD(real, "aogm.ec", s.aogm.ec),
    };
    return table;
}

#undef CT_FIELD

const Field& find_field(std::string_view key) {
    for (const auto& f : fields()) {
        if (key == f.key) return f;
    }
    fail(ErrorKind::InvalidArgument, "unknown setting '" + std::string(key) + "'");
}

}  // namespace

void Settings::validate() const {
    tracker.validate();
    sim.validate();
    corrupt.validate();
    analysis.validate();
    if (sim_videos < 1) fail(ErrorKind::Validation, "sim.videos must be >= 1");
    for (double w : {aogm.ns, aogm.fn, aogm.fp, aogm.ed, aogm.ea, aogm.ec}) {
        if (!(w >= 0.0)) fail(ErrorKind::Validation, "AOGM weights must be non-negative");
    }
}

void set_setting(Settings& s, std::string_view key, std::string_view value) {
    if (key == "tracker.embedding_dim" && value == "auto") {
        s.embedding_dim_set = false;
        return;
    }
    find_field(key).set(s, value);
}

std::string get_setting(const Settings& s, std::string_view key) { return find_field(key).get(s); }

std::vector<std::string> setting_keys() {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.emplace_back(f.key);
    return out;
}

void load_settings(Settings& s, std::istream& in, const std::string& source_name) {
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto body = text::trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto eq = body.find('=');
        const std::string where = source_name + ":" + std::to_string(number) + ": ";
        if (eq == std::string_view::npos) fail(ErrorKind::Parse, where + "expected key=value");
        const auto key = text::trim(body.substr(0, eq));
        const auto value = text::trim(body.substr(eq + 1));
        if (key.starts_with("run.")) continue;
        try {
            set_setting(s, key, value);
        } catch (const Error& e) {
            fail(e.kind(), where + e.what());
        }
    }
}

void load_settings_file(Settings& s, const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open config file '" + path + "'");
    load_settings(s, in, path);
}

void write_settings(std::ostream& out, const Settings& s) {
    for (const auto& f : fields()) out << f.key << '=' << f.get(s) << '\n';
}

}  // namespace celltrack
