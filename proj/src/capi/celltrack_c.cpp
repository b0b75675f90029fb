// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 celltrack contributors

#include "celltrack/celltrack.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>
#include <string>

#include "celltrack/analysis.hpp"
#include "celltrack/association.hpp"
#include "celltrack/error.hpp"
#include "celltrack/ingest.hpp"
#include "celltrack/metrics.hpp"
#include "celltrack/pipeline.hpp"
#include "celltrack/settings.hpp"
#include "celltrack/simulator.hpp"

#ifndef CELLTRACK_VERSION_STRING
#define CELLTRACK_VERSION_STRING "0.0.0"
#endif

struct ct_config {
    celltrack::Settings settings;
};

struct ct_detections {
    celltrack::DetectionVideo video;
};

struct ct_forest {
    celltrack::LineageForest forest;
};

struct ct_report {
    celltrack::MetricReport report;
};

namespace {

thread_local std::string g_last_error;

ct_status to_status(celltrack::ErrorKind kind) {
    using celltrack::ErrorKind;
    switch (kind) {
        case ErrorKind::InvalidArgument: return CT_ERR_INVALID_ARGUMENT;
        case ErrorKind::Io: return CT_ERR_IO;
        case ErrorKind::Parse: return CT_ERR_PARSE;
        case ErrorKind::Validation: return CT_ERR_VALIDATION;
        case ErrorKind::Dimension: return CT_ERR_DIMENSION;
        case ErrorKind::Undefined: return CT_ERR_UNDEFINED;
    }
    return CT_ERR_INTERNAL;
}

ct_status fail_with(ct_status s, std::string msg) {
    g_last_error = std::move(msg);
    return s;
}

// Runs fn, translating exceptions into status codes.
template <typename Fn>
ct_status guarded(Fn&& fn) {
    try {
        g_last_error.clear();
        fn();
        return CT_OK;
    } catch (const celltrack::Error& e) {
        return fail_with(to_status(e.kind()), e.what());
    } catch (const std::bad_alloc&) {
        return fail_with(CT_ERR_INTERNAL, "out of memory");
    } catch (const std::filesystem::filesystem_error& e) {
        return fail_with(CT_ERR_IO, e.what());
    } catch (const std::exception& e) {
        return fail_with(CT_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail_with(CT_ERR_INTERNAL, "unknown error");
    }
}

void require(bool ok, const char* what) {
    if (!ok) celltrack::fail(celltrack::ErrorKind::InvalidArgument, what);
}

template <typename Writer>
void write_with(const std::filesystem::path& path, Writer&& writer) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) celltrack::fail(celltrack::ErrorKind::Io, "cannot write '" + path.string() + "'");
    writer(out);
    if (!out) celltrack::fail(celltrack::ErrorKind::Io, "write failed for '" + path.string() + "'");
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    write_with(path, [&](std::ostream& out) { out << content; });
}

}  // namespace

extern "C" {

const char* ct_version(void) { return CELLTRACK_VERSION_STRING; }

const char* ct_status_name(ct_status status) {
    switch (status) {
        case CT_OK: return "ok";
        case CT_ERR_INVALID_ARGUMENT: return "invalid argument";
        case CT_ERR_IO: return "i/o error";
        case CT_ERR_PARSE: return "parse error";
        case CT_ERR_VALIDATION: return "validation error";
        case CT_ERR_DIMENSION: return "dimension mismatch";
        case CT_ERR_UNDEFINED: return "undefined value";
        case CT_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* ct_last_error(void) { return g_last_error.c_str(); }

ct_status ct_config_create(ct_config** out) {
    return guarded([&] {
        require(out != nullptr, "ct_config_create: out is NULL");
        *out = new ct_config();
    });
}

ct_status ct_config_clone(const ct_config* config, ct_config** out) {
    return guarded([&] {
        require(config && out, "ct_config_clone: NULL argument");
        *out = new ct_config(*config);
    });
}

void ct_config_destroy(ct_config* config) { delete config; }

ct_status ct_config_load(ct_config* config, const char* path) {
    return guarded([&] {
        require(config && path, "ct_config_load: NULL argument");
        celltrack::Settings s = config->settings;
        celltrack::load_settings_file(s, path);
        config->settings = s;
    });
}

ct_status ct_config_set(ct_config* config, const char* key, const char* value) {
    return guarded([&] {
        require(config && key && value, "ct_config_set: NULL argument");
        celltrack::set_setting(config->settings, key, value);
    });
}

ct_status ct_config_get(const ct_config* config, const char* key, char* buf, size_t cap, size_t* needed) {
    return guarded([&] {
        require(config && key, "ct_config_get: NULL argument");
        const std::string v = celltrack::get_setting(config->settings, key);
        if (needed) *needed = v.size() + 1;
        if (buf && cap > v.size()) std::memcpy(buf, v.c_str(), v.size() + 1);
        else if (buf || !needed) celltrack::fail(celltrack::ErrorKind::InvalidArgument, "ct_config_get: buffer too small");
    });
}

ct_status ct_config_validate(const ct_config* config) {
    return guarded([&] {
        require(config != nullptr, "ct_config_validate: config is NULL");
        config->settings.validate();
    });
}

ct_status ct_config_save(const ct_config* config, const char* path) {
    return guarded([&] {
        require(config && path, "ct_config_save: NULL argument");
        write_with(path, [&](std::ostream& out) { celltrack::write_settings(out, config->settings); });
    });
}

ct_status ct_simulate(const ct_config* config, uint64_t seed, ct_forest** ground_truth, ct_detections** clean,
                      ct_detections** noisy) {
    return guarded([&] {
        require(config != nullptr, "ct_simulate: config is NULL");
        config->settings.sim.validate();
        config->settings.corrupt.validate();
        celltrack::SimulationConfig sim = config->settings.sim;
        sim.seed = seed;
        celltrack::CorruptionConfig cor = config->settings.corrupt;
        cor.seed = seed;
        auto result = celltrack::simulate(sim);
        if (noisy) *noisy = new ct_detections{celltrack::corrupt(result.clean, cor)};
        if (clean) *clean = new ct_detections{std::move(result.clean)};
        if (ground_truth) *ground_truth = new ct_forest{std::move(result.ground_truth)};
    });
}

ct_status ct_detections_load(const char* path, ct_detections** out) {
    return guarded([&] {
        require(path && out, "ct_detections_load: NULL argument");
        *out = new ct_detections{celltrack::load_detections(path)};
    });
}

ct_status ct_detections_save(const ct_detections* detections, const char* path) {
    return guarded([&] {
        require(detections && path, "ct_detections_save: NULL argument");
        celltrack::save_detections(path, detections->video);
    });
}

size_t ct_detections_frame_count(const ct_detections* detections) {
    return detections ? detections->video.frames.size() : 0;
}

size_t ct_detections_count(const ct_detections* detections) {
    return detections ? detections->video.detection_count() : 0;
}

void ct_detections_destroy(ct_detections* detections) { delete detections; }

ct_status ct_track(const ct_config* config, const ct_detections* detections, ct_forest** out) {
    return guarded([&] {
        require(config && detections && out, "ct_track: NULL argument");
        celltrack::TrackerConfig tc = config->settings.tracker;
        if (!config->settings.embedding_dim_set) tc.embedding_dim = detections->video.embedding_dim;
        *out = new ct_forest{celltrack::track_video(detections->video, tc)};
    });
}

ct_status ct_forest_load(const char* dir, int require_contiguous, ct_forest** out) {
    return guarded([&] {
        require(dir && out, "ct_forest_load: NULL argument");
        *out = new ct_forest{celltrack::load_forest(dir, require_contiguous != 0)};
    });
}

ct_status ct_forest_save(const ct_forest* forest, const char* dir) {
    return guarded([&] {
        require(forest && dir, "ct_forest_save: NULL argument");
        celltrack::save_forest(dir, forest->forest);
    });
}

size_t ct_forest_track_count(const ct_forest* forest) { return forest ? forest->forest.tracks.size() : 0; }

ct_status ct_forest_isomorphic(const ct_forest* a, const ct_forest* b, int* out) {
    return guarded([&] {
        require(a && b && out, "ct_forest_isomorphic: NULL argument");
        std::string why;
        *out = celltrack::isomorphic(a->forest, b->forest, &why) ? 1 : 0;
        if (!*out) g_last_error = why;
    });
}

void ct_forest_destroy(ct_forest* forest) { delete forest; }

ct_status ct_evaluate(const ct_config* config, const ct_forest* pred, const ct_forest* gt, ct_report** out) {
    return guarded([&] {
        require(config && pred && gt && out, "ct_evaluate: NULL argument");
        *out = new ct_report{celltrack::evaluate(pred->forest, gt->forest, config->settings.aogm)};
    });
}

ct_status ct_report_get(const ct_report* report, const char* key, double* out) {
    return guarded([&] {
        require(report && key && out, "ct_report_get: NULL argument");
        for (const auto& [k, v] : report->report.scalars()) {
            if (k != key) continue;
            *out = v;
            if (std::isnan(v)) celltrack::fail(celltrack::ErrorKind::Undefined, std::string(key) + " is undefined");
            return;
        }
        celltrack::fail(celltrack::ErrorKind::InvalidArgument, "unknown report key '" + std::string(key) + "'");
    });
}

ct_status ct_report_save_kv(const ct_report* report, const char* path) {
    return guarded([&] {
        require(report && path, "ct_report_save_kv: NULL argument");
        write_file(path, report->report.to_key_value());
    });
}

ct_status ct_report_save_json(const ct_report* report, const char* path) {
    return guarded([&] {
        require(report && path, "ct_report_save_json: NULL argument");
        write_file(path, report->report.to_json());
    });
}

void ct_report_destroy(ct_report* report) { delete report; }

ct_status ct_ablate(const ct_config* config, const char* corpus_dir, const char* detection_file, int workers,
                    const char* out_csv) {
    return guarded([&] {
        require(config && corpus_dir && detection_file && out_csv, "ct_ablate: NULL argument");
        config->settings.tracker.validate();
        const auto corpus = celltrack::load_corpus(corpus_dir, detection_file, workers);
        const auto variants = celltrack::ablation_variants(config->settings.tracker);
        const auto rows = celltrack::run_ablation(corpus, variants, config->settings.aogm, workers);
        write_with(out_csv, [&](std::ostream& out) { celltrack::write_ablation_csv(out, rows); });
    });
}

ct_status ct_analyze(const ct_config* config, const char* const* forest_dirs, size_t count, uint64_t seed,
                     const char* out_dir) {
    return guarded([&] {
        require(config && out_dir && (forest_dirs || count == 0), "ct_analyze: NULL argument");
        namespace an = celltrack::analysis;
        const an::AnalysisFilter& filter = config->settings.analysis;
        filter.validate();
        std::vector<celltrack::LineageForest> forests;
        for (size_t i = 0; i < count; ++i) {
            require(forest_dirs[i] != nullptr, "ct_analyze: NULL forest path");
            forests.push_back(celltrack::load_forest(forest_dirs[i], false));
        }
        const std::filesystem::path dir(out_dir);
        write_with(dir / "event_rates.csv", [&](std::ostream& out) {
            an::write_event_rates_csv(out, an::grouped_event_rates(forests, filter.bin_size));
        });
        write_with(dir / "ancestor_descendant.csv", [&](std::ostream& out) {
            an::write_ancestor_descendant_csv(out, an::ancestor_descendant_correlation(forests, filter));
        });
        write_with(dir / "sister_correlation.csv",
                   [&](std::ostream& out) { an::write_sister_csv(out, an::sister_correlation(forests, filter)); });
        write_with(dir / "interdivision_times.csv", [&](std::ostream& out) {
            an::write_interdivision_csv(out, an::interdivision_times(forests, filter));
        });
        write_with(dir / "division_profiles.csv", [&](std::ostream& out) {
            an::write_profiles_csv(out, an::division_profiles(forests, filter.sample_size, seed));
        });
    });
}

}  // extern "C"
