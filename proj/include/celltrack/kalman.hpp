// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 celltrack contributors

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "celltrack/config.hpp"
#include "celltrack/core.hpp"

namespace celltrack {

// Constant-velocity centroid filter. State is (cx, cy, vx, vy) in pixels and
// pixels/frame; box extents are carried alongside, never filtered.
struct KalmanState {
    Eigen::Vector4d mean = Eigen::Vector4d::Zero();
    Eigen::Matrix4d covariance = Eigen::Matrix4d::Identity();

    Point position() const { return {mean(0), mean(1)}; }
    Point velocity() const { return {mean(2), mean(3)}; }
};

KalmanState kf_init(Point position, const TrackerConfig& config);
KalmanState kf_predict(const KalmanState& state, const TrackerConfig& config);
KalmanState kf_update(const KalmanState& state, Point measurement, const TrackerConfig& config);

// Fills `gap_frames` consecutive missing frames after the last observation.
// Positions are forward predictions from `at_last_observation`; when the
// track is re-found at frame last+gap+1 (`anchor_after`), the offset between
// the prediction and the anchor is blended in linearly so the filled segment
// joins the anchor exactly. Entries are Interpolated, sized like `last_box`.
std::vector<TrackEntry> interpolate_gap(const KalmanState& at_last_observation, int gap_frames, const Box& last_box,
                                        CellClass cls, std::optional<Point> anchor_after, const TrackerConfig& config);

}  // namespace celltrack
