// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 celltrack contributors

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace celltrack {

using TrackId = std::int64_t;
using Embedding = std::vector<float>;

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

// Top-left anchored pixel rectangle in continuous coordinates.
struct Box {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double area() const { return w * h; }
    bool contains(Point p) const { return p.x >= x && p.x <= x + w && p.y >= y && p.y <= y + h; }

    friend bool operator==(const Box&, const Box&) = default;
};

enum class CellClass : std::uint8_t { Alive, Dead };

struct Detection {
    int frame = 0;
    Box box;
    double confidence = 1.0;
    CellClass cls = CellClass::Alive;
    Embedding embedding;
    std::optional<std::uint64_t> source_id;
};

using FrameDetections = std::vector<Detection>;

enum class Provenance : std::uint8_t { ObservedHigh, ObservedLow, Interpolated, Annotated };

struct TrackEntry {
    Box box;
    CellClass cls = CellClass::Alive;
    Provenance provenance = Provenance::ObservedHigh;
    std::optional<double> confidence;
    std::optional<Embedding> embedding;
    // Index of the consumed detection within its frame; absent for interpolated entries.
    std::optional<std::size_t> detection;

    Point centroid() const;
    bool observed() const { return provenance != Provenance::Interpolated; }
};

enum class TrackStatus : std::uint8_t { Active, Lost, Divided, Dead, Closed };

enum class EndReason : std::uint8_t { None, Division, Death, EndOfVideo, LeftFov, Lost };

struct Track {
    TrackId id = 0;
    std::map<int, TrackEntry> entries;
    TrackStatus status = TrackStatus::Active;
    int frames_since_seen = 0;  // meaningful while status == Lost
    std::optional<TrackId> parent;
    std::vector<TrackId> children;
    CellClass cls = CellClass::Alive;
    EndReason end_reason = EndReason::None;

    bool empty() const { return entries.empty(); }
    int start_frame() const { return entries.begin()->first; }
    int last_frame() const { return entries.rbegin()->first; }
    // Number of frames covered by [start_frame, last_frame].
    int span() const { return last_frame() - start_frame() + 1; }
    // First frame whose entry is Dead-class, if any.
    std::optional<int> death_frame() const;
};

struct VideoMeta {
    std::string video_id;
    int frame_count = 0;
    int image_width = 1024;
    int image_height = 1024;
    // Free-form grouping tags (e.g. "dosage"), kept sorted for stable output.
    std::map<std::string, std::string> tags;

    std::string tag(const std::string& key, const std::string& fallback = {}) const;

    friend bool operator==(const VideoMeta&, const VideoMeta&) = default;
};

struct LineageForest {
    VideoMeta meta;
    std::map<TrackId, Track> tracks;

    const Track& at(TrackId id) const;
    Track& at(TrackId id);

    // Throws Validation on broken parent/child links, intervals out of range,
    // adjacency violations, or (when require_contiguous) frame gaps.
    void validate(bool require_contiguous = true) const;
};

// Equal up to track-id relabelling: same entries (frame, box, class), end
// reasons and parent links. `why` receives the first difference found.
bool isomorphic(const LineageForest& a, const LineageForest& b, std::string* why = nullptr);

// Geometry and embedding arithmetic.
Point centroid(const Box& box);
double euclidean_distance(Point p, Point q);
double embedding_l1(std::span<const float> a, std::span<const float> b);
double iou(const Box& a, const Box& b);
double intersection_area(const Box& a, const Box& b);

std::string_view to_string(CellClass c);
std::string_view to_string(Provenance p);
std::string_view to_string(EndReason r);
std::string_view to_string(TrackStatus s);
std::optional<CellClass> parse_cell_class(std::string_view s);
std::optional<Provenance> parse_provenance(std::string_view s);
std::optional<EndReason> parse_end_reason(std::string_view s);

}  // namespace celltrack
