// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 celltrack contributors

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "celltrack/config.hpp"
#include "celltrack/core.hpp"

namespace celltrack {

// Detection file:
//   #video_id=<id>            header lines, `#key=value`
//   #frame_count=<n>
//   #image_width=<px>
//   #image_height=<px>
//   #embedding_dim=<D>
//   #<tag>=<value>            any other key is kept as a video tag
//   frame,x,y,w,h,confidence,class,emb_0,...,emb_{D-1}
struct DetectionVideo {
    VideoMeta meta;
    int embedding_dim = 0;
    std::vector<FrameDetections> frames;  // size == meta.frame_count

    std::size_t detection_count() const;
};

DetectionVideo parse_detections(std::istream& in, const std::string& source_name = "<stream>");
DetectionVideo load_detections(const std::filesystem::path& path);
void write_detections(std::ostream& out, const DetectionVideo& video);
void save_detections(const std::filesystem::path& path, const DetectionVideo& video);

// Indices into the frame's detection list.
struct ConfidencePartition {
    std::vector<std::size_t> high;
    std::vector<std::size_t> low;
    std::vector<std::size_t> discarded;
};

ConfidencePartition partition_by_confidence(const FrameDetections& frame, const TrackerConfig& config);

// Forest directory layout (ground truth and predictions share it):
//   tracks.txt   `#key=value` video header, then `id,start,end,parent,end_reason`
//                (parent 0 = root)
//   entries.txt  `track_id,frame,x,y,w,h,class,provenance`
inline constexpr const char* kTrackTableFile = "tracks.txt";
inline constexpr const char* kEntriesFile = "entries.txt";

LineageForest parse_forest(std::istream& tracks, std::istream& entries, bool require_contiguous = true,
                           const std::string& source_name = "<stream>");
LineageForest load_forest(const std::filesystem::path& dir, bool require_contiguous = true);
// Ground truth must be gap-free.
LineageForest load_ground_truth(const std::filesystem::path& dir);

void write_track_table(std::ostream& out, const LineageForest& forest);
void write_entries(std::ostream& out, const LineageForest& forest);
void save_forest(const std::filesystem::path& dir, const LineageForest& forest);

}  // namespace celltrack
