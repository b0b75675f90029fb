// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 celltrack contributors

#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "celltrack/core.hpp"
#include "celltrack/error.hpp"
#include "celltrack/ingest.hpp"

namespace celltrack::testing {

// Box of size w x h centred on (cx, cy).
Box box_at(double cx, double cy, double w = 10.0, double h = 10.0);

// n boxes moving at constant velocity from (cx, cy).
std::vector<Box> straight_line(double cx, double cy, double vx, double vy, int n, double w = 10.0, double h = 10.0);

LineageForest empty_forest(int frames, const std::string& video_id = "test");

// Appends a contiguous track starting at `start`. A parent gets the track as a
// child and becomes Divided.
Track& add_track(LineageForest& forest, TrackId id, int start, const std::vector<Box>& boxes,
                 std::optional<TrackId> parent = std::nullopt, EndReason end = EndReason::EndOfVideo);

Detection make_detection(int frame, const Box& box, double confidence = 0.9, CellClass cls = CellClass::Alive,
                         Embedding embedding = {});

DetectionVideo empty_video(int frames, int embedding_dim, const std::string& video_id = "test");

// Embedding with every component equal to `value`.
Embedding flat_embedding(int dim, float value);

// Same forest with track ids mapped through a random permutation onto a
// disjoint id range.
LineageForest relabel(const LineageForest& forest, std::mt19937_64& rng);

// Kind of the celltrack::Error thrown by f, or nullopt when it returns.
template <class F>
std::optional<ErrorKind> error_kind(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return std::nullopt;
}

struct TinyInstance {
    LineageForest gt;
    LineageForest pred;
};

// Random small evaluation case: at most 5 tracks per side, at most 10 frames,
// boxes crowded into a small area so that overlaps, splits, identity swaps,
// gaps, divisions and false positives all occur with useful frequency.
TinyInstance random_tiny_instance(std::mt19937_64& rng);

}  // namespace celltrack::testing
