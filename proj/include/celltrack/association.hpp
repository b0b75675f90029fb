// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 celltrack contributors

#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "celltrack/config.hpp"
#include "celltrack/core.hpp"
#include "celltrack/ingest.hpp"
#include "celltrack/kalman.hpp"

namespace celltrack {

// What a track looks like to the matcher in the current frame.
struct TrackReference {
    TrackId id = 0;
    Point position;
    const Embedding* embedding = nullptr;
};

struct CandidatePair {
    TrackId track = 0;
    std::size_t detection = 0;
    double distance = 0.0;
    double similarity = 0.0;
    double cost = 0.0;
};

// lambda * sim / tau_sim + (1 - lambda) * d / tau_dst
double pair_cost(double similarity, double distance, const TrackerConfig& config);
double pair_cost(const TrackReference& track, const Detection& detection, const TrackerConfig& config);

// Pairs with d <= tau_dst and, when gate_similarity is set, sim <= tau_sim.
// `subset` selects which detections of the frame take part.
std::vector<CandidatePair> build_candidates(std::span<const TrackReference> tracks, const FrameDetections& detections,
                                            std::span<const std::size_t> subset, const TrackerConfig& config,
                                            bool gate_similarity);

// Track id -> claimed detection indices, cheapest first.
using Assignment = std::map<TrackId, std::vector<std::size_t>>;

// Globally greedy: pairs are taken in ascending (cost, track id, detection
// index) order; a detection goes to the first track that reaches it, and a
// track stops claiming once it holds `capacity` detections.
Assignment resolve_conflicts(std::span<const CandidatePair> candidates, int capacity);

enum class MatchOutcome { Unmatched, Continued, Divided };

// Outcome per track in `tracks`; tracks absent from the assignment are Unmatched.
std::map<TrackId, MatchOutcome> classify_outcomes(const Assignment& assignment, std::span<const TrackId> tracks);

// Living -> dead transitions: distance gate only, ranked by the full cost.
Assignment match_deaths(std::span<const TrackReference> living_unmatched, const FrameDetections& detections,
                        std::span<const std::size_t> dead_detections, const TrackerConfig& config);

// Per-track motion and appearance memory. Active tracks have
// frames_since_lost == 0; memory-bank entries count missed frames.
struct TrackMemory {
    TrackId track_id = 0;
    int frames_since_lost = 0;
    KalmanState kalman;  // posterior at the last observation
    int last_observed_frame = 0;
    Embedding last_embedding;
    Box last_box;
    CellClass cls = CellClass::Alive;
};

using MemoryBank = std::vector<TrackMemory>;

// Reference position at `frame`: the Kalman prediction when enabled and the
// track has missed frames, otherwise the last observed centroid.
Point reference_position(const TrackMemory& memory, int frame, const TrackerConfig& config);

// Second stage: unmatched tracks and memory-bank entries against
// low-confidence detections of the same class; one detection per track.
Assignment second_stage(std::span<const TrackMemory> pool, int frame, const FrameDetections& detections,
                        std::span<const std::size_t> low_confidence, const TrackerConfig& config);

// Increments every entry's miss counter and removes those exceeding
// memory_frames. Returns the ids of removed tracks in bank order.
std::vector<TrackId> age_memory_bank(MemoryBank& bank, const TrackerConfig& config);

// Frame-by-frame tracker. One instance per video; not thread-safe.
class Tracker {
public:
    Tracker(VideoMeta meta, TrackerConfig config);

    void process_frame(int frame, const FrameDetections& detections);
    // Closes every open track and returns the validated forest.
    LineageForest finish();

    const MemoryBank& memory_bank() const { return bank_; }
    const std::vector<TrackMemory>& active() const { return active_; }

private:
    TrackId open_track(int frame, const Detection& det, std::size_t index, Provenance provenance,
                       std::optional<TrackId> parent);
    void append_observation(TrackMemory& memory, int frame, const Detection& det, std::size_t index,
                            Provenance provenance);
    TrackEntry make_entry(const Detection& det, std::size_t index, Provenance provenance, CellClass cls) const;

    TrackerConfig config_;
    LineageForest forest_;
    std::vector<TrackMemory> active_;
    MemoryBank bank_;
    TrackId next_id_ = 1;
    int last_frame_ = -1;
};

LineageForest track_video(const DetectionVideo& video, const TrackerConfig& config);

}  // namespace celltrack
