// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 celltrack contributors

#include "celltrack/kalman.hpp"

namespace celltrack {

namespace {

Eigen::Matrix4d transition() {
    Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
    f(0, 2) = 1.0;
    f(1, 3) = 1.0;
    return f;
}

Eigen::Matrix<double, 2, 4> observation() {
    Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
    h(0, 0) = 1.0;
    h(1, 1) = 1.0;
    return h;
}

Eigen::Matrix4d symmetrized(const Eigen::Matrix4d& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

KalmanState kf_init(Point position, const TrackerConfig& config) {
    KalmanState s;
    s.mean << position.x, position.y, 0.0, 0.0;
    s.covariance = Eigen::Matrix4d::Zero();
    s.covariance(0, 0) = config.kalman_measurement_noise;
    s.covariance(1, 1) = config.kalman_measurement_noise;
    s.covariance(2, 2) = config.kalman_initial_velocity_variance;
    s.covariance(3, 3) = config.kalman_initial_velocity_variance;
    return s;
}

KalmanState kf_predict(const KalmanState& state, const TrackerConfig& config) {
    static const Eigen::Matrix4d f = transition();
    Eigen::Matrix4d q = Eigen::Matrix4d::Zero();
    q(2, 2) = config.kalman_process_noise;
    q(3, 3) = config.kalman_process_noise;
    KalmanState out;
    out.mean = f * state.mean;
    out.covariance = symmetrized(f * state.covariance * f.transpose() + q);
    return out;
}

KalmanState kf_update(const KalmanState& state, Point measurement, const TrackerConfig& config) {
    static const Eigen::Matrix<double, 2, 4> h = observation();
    const Eigen::Matrix2d r = Eigen::Matrix2d::Identity() * config.kalman_measurement_noise;
    const Eigen::Vector2d z(measurement.x, measurement.y);
    const Eigen::Matrix2d s = h * state.covariance * h.transpose() + r;
    const Eigen::Matrix<double, 4, 2> k = state.covariance * h.transpose() * s.inverse();
    const Eigen::Matrix4d i_kh = Eigen::Matrix4d::Identity() - k * h;
    KalmanState out;
    out.mean = state.mean + k * (z - h * state.mean);
    // Joseph form keeps the covariance symmetric PSD under rounding.
    out.covariance = symmetrized(i_kh * state.covariance * i_kh.transpose() + k * r * k.transpose());
    return out;
}

std::vector<TrackEntry> interpolate_gap(const KalmanState& at_last_observation, int gap_frames, const Box& last_box,
                                        CellClass cls, std::optional<Point> anchor_after, const TrackerConfig& config) {
    std::vector<TrackEntry> out;
    if (gap_frames <= 0) return out;
    std::vector<Point> predicted;
    predicted.reserve(static_cast<std::size_t>(gap_frames) + 1);
    KalmanState s = at_last_observation;
    for (int k = 0; k <= gap_frames; ++k) {
        s = kf_predict(s, config);
        predicted.push_back(s.position());
    }
    Point correction{0.0, 0.0};
    if (anchor_after) {
        correction = {anchor_after->x - predicted.back().x, anchor_after->y - predicted.back().y};
    }
    out.reserve(static_cast<std::size_t>(gap_frames));
    for (int k = 0; k < gap_frames; ++k) {
        const double blend = static_cast<double>(k + 1) / static_cast<double>(gap_frames + 1);
        const Point c{predicted[k].x + blend * correction.x, predicted[k].y + blend * correction.y};
        TrackEntry e;
        e.box = {c.x - last_box.w / 2.0, c.y - last_box.h / 2.0, last_box.w, last_box.h};
        e.cls = cls;
        e.provenance = Provenance::Interpolated;
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace celltrack
