// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 celltrack contributors

#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "celltrack/config.hpp"
#include "celltrack/ingest.hpp"
#include "celltrack/metrics.hpp"

namespace celltrack {

// Runs fn(0..n-1) on up to `workers` threads. Results are positional, so the
// output does not depend on scheduling. The first exception is rethrown.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

struct CorpusVideo {
    std::string name;
    DetectionVideo detections;
    LineageForest ground_truth;
};

// A corpus directory is either one video (holding `gt/` and the detection
// file) or a parent of such directories, visited in name order.
std::vector<CorpusVideo> load_corpus(const std::filesystem::path& dir, const std::string& detection_file,
                                     int workers = 1);

struct AblationVariant {
    std::string name;
    TrackerConfig config;
};

// full, no-low-conf, no-kalman, neither, then memory=0..max_memory.
std::vector<AblationVariant> ablation_variants(const TrackerConfig& base, int max_memory = 15);

struct AblationRow {
    std::string name;
    std::vector<double> det, lnk, tra;  // per video, corpus order

    double mean(const std::vector<double>& v) const;
    double stddev(const std::vector<double>& v) const;  // sample std, 0 for one video
};

std::vector<AblationRow> run_ablation(const std::vector<CorpusVideo>& corpus,
                                      const std::vector<AblationVariant>& variants, const AOGMWeights& weights,
                                      int workers = 1);

// Tracks one video and scores it; the video's embedding dimension is adopted.
CtcScores track_and_score(const CorpusVideo& video, TrackerConfig config, const AOGMWeights& weights);

void write_ablation_csv(std::ostream& out, const std::vector<AblationRow>& rows);

}  // namespace celltrack
