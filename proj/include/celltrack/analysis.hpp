// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 celltrack contributors

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "celltrack/core.hpp"

// Population-level lineage statistics. Every function is pure; forests are
// grouped by their "dosage" tag (missing tag -> "all").
namespace celltrack::analysis {

struct AnalysisFilter {
    int min_track_frames = 10;  // shorter tracks are ignored by the size analyses
    int max_generation = 5;
    int max_interdivision_frames = 100;
    bool median_size = false;  // per-cell size summary; mean otherwise
    int bin_size = 10;
    int sample_size = 300;  // division profiles per group

    void validate() const;
};

std::string group_of(const LineageForest& forest);

using GenerationIndex = std::map<TrackId, int>;
// 0 for roots, parent + 1 otherwise.
GenerationIndex generation_index(const LineageForest& forest);

struct EventRateBin {
    int start = 0, end = 0;  // [start, end)
    long long divisions = 0, deaths = 0;
    double mean_alive = 0.0, mean_population = 0.0;
    double division_rate = 0.0, death_rate = 0.0;  // events / mean_alive, 0 if nobody is alive
};

struct EventRates {
    std::vector<EventRateBin> bins;
    std::vector<long long> population;  // tracks whose span covers each frame
    std::vector<long long> alive;       // of those, alive-class at that frame
};

// A division is counted at the mother's last frame, a death at the first
// dead-class frame. A forest without tracks gives an empty series.
EventRates event_rates(const LineageForest& forest, int bin_size = 10);
// Counts summed over every forest of a group before normalising.
std::map<std::string, EventRates> grouped_event_rates(std::span<const LineageForest> forests, int bin_size = 10);

// (frame, w*h) for observed entries; interpolated ones are skipped.
std::vector<std::pair<int, double>> cell_size_series(const Track& track);

// Undefined for fewer than 2 points or zero variance in either series.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

struct AncestorPair {
    std::string group;
    TrackId ancestor = 0, descendant = 0;
    int ancestor_generation = 0, descendant_generation = 0;
    double ancestor_size = 0.0, descendant_size = 0.0;
};

// Descendants in generations [2, max_generation], each paired with every
// ancestor at generation >= 1. Both tracks must pass the length filter.
std::vector<AncestorPair> ancestor_descendant_pairs(const LineageForest& forest, const AnalysisFilter& filter);

struct GenerationCorrelation {
    std::string group;
    int ancestor_generation = 0, descendant_generation = 0;
    std::size_t pairs = 0;
    double r = 0.0;
};

struct GapCorrelation {
    std::string group;
    int gap = 0;
    std::size_t pairs = 0;       // pooled over all generation cells with this gap
    std::optional<double> r;     // pooled Pearson
    std::size_t cells = 0;       // generation cells with a defined r
    double median_r = 0.0, min_r = 0.0, max_r = 0.0;
};

struct AncestorDescendantResult {
    std::vector<GenerationCorrelation> by_generation;  // cells with < 2 pairs or no variance omitted
    std::vector<GapCorrelation> by_gap;
};

AncestorDescendantResult ancestor_descendant_correlation(std::span<const AncestorPair> pairs);
AncestorDescendantResult ancestor_descendant_correlation(std::span<const LineageForest> forests,
                                                         const AnalysisFilter& filter);

struct SisterPair {
    std::string group;
    TrackId mother = 0, first = 0, second = 0;
    int generation = 0;
    std::size_t common_frames = 0;
    std::optional<double> r;  // undefined with a constant series
};

// Pairs where both sisters pass the filter and share >= 2 observed frames.
std::vector<SisterPair> sister_correlation(const LineageForest& forest, const AnalysisFilter& filter);
std::vector<SisterPair> sister_correlation(std::span<const LineageForest> forests, const AnalysisFilter& filter);

struct InterdivisionRecord {
    std::string group;
    TrackId track = 0;
    int generation = 0;
    int duration = 0;  // last - start + 1
    bool excluded = false;
};

struct InterdivisionStats {
    std::string group;
    int generation = 0;
    std::size_t count = 0, excluded = 0;
    double mean = 0.0, median = 0.0;
};

struct InterdivisionResult {
    std::vector<InterdivisionRecord> records;
    std::vector<InterdivisionStats> stats;  // every (group, generation) seen, even if fully excluded
};

// Tracks born by division that also end by division.
InterdivisionResult interdivision_times(std::span<const LineageForest> forests, const AnalysisFilter& filter);

enum class ProfileEventKind : std::uint8_t { Division, Death, Censored };
std::string_view to_string(ProfileEventKind k);

struct ProfileEvent {
    int frame = 0;
    ProfileEventKind kind = ProfileEventKind::Censored;
};

// One root-to-leaf lineage path, followed until death or the end of the video.
struct DivisionProfile {
    std::string group;
    TrackId leaf = 0, root = 0;
    int divisions = 0;
    std::vector<ProfileEvent> events;
};

// Eligible paths per group (leaf ends by death or end-of-video), stratified by
// division count with largest-remainder allocation. Groups with no more than
// sample_size paths are returned whole.
std::vector<DivisionProfile> division_profiles(std::span<const LineageForest> forests, int sample_size,
                                               std::uint64_t seed);
std::vector<DivisionProfile> eligible_profiles(const LineageForest& forest);

// Quotas per bucket summing to min(sample, total), each within 1 of the
// proportional share.
std::vector<std::size_t> largest_remainder_allocation(std::span<const std::size_t> counts, std::size_t sample);

void write_event_rates_csv(std::ostream& out, const std::map<std::string, EventRates>& rates);
void write_ancestor_descendant_csv(std::ostream& out, const AncestorDescendantResult& result);
void write_sister_csv(std::ostream& out, std::span<const SisterPair> pairs);
void write_interdivision_csv(std::ostream& out, const InterdivisionResult& result);
void write_profiles_csv(std::ostream& out, std::span<const DivisionProfile> profiles);

}  // namespace celltrack::analysis
