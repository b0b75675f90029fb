// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 celltrack contributors

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <random>

#include "celltrack/kalman.hpp"

namespace celltrack {
namespace {

const TrackerConfig kCfg;

void expect_symmetric_psd(const Eigen::Matrix4d& p) {
    EXPECT_LE((p - p.transpose()).cwiseAbs().maxCoeff(), 1e-9 * std::max(1.0, p.cwiseAbs().maxCoeff()));
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(p);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-9 * std::max(1.0, es.eigenvalues().maxCoeff()));
}

TEST(Kalman, InitPlacesTheCellAtRest) {
    const auto s = kf_init({10, 20}, kCfg);
    EXPECT_EQ(s.mean, (Eigen::Vector4d(10, 20, 0, 0)));
    expect_symmetric_psd(s.covariance);
    const auto t = kf_init({10, 20}, kCfg);
    EXPECT_EQ(s.mean, t.mean);
    EXPECT_EQ(s.covariance, t.covariance);
}

TEST(Kalman, PredictStepsAlongVelocity) {
    KalmanState s = kf_init({0, 0}, kCfg);
    s.mean << 0, 0, 1, 2;
    const auto p = kf_predict(s, kCfg);
    EXPECT_EQ(p.position(), (Point{1, 2}));
    EXPECT_GT(p.covariance.trace(), s.covariance.trace());

    const auto still = kf_predict(kf_init({5, 5}, kCfg), kCfg);
    EXPECT_EQ(still.position(), (Point{5, 5}));
}

TEST(Kalman, ZeroInnovationKeepsPosition) {
    KalmanState s = kf_init({3, 4}, kCfg);
    s.mean << 3, 4, 1, -1;
    const auto prior = kf_predict(s, kCfg);
    const auto post = kf_update(prior, prior.position(), kCfg);
    EXPECT_NEAR(post.mean(0), prior.mean(0), 1e-12);
    EXPECT_NEAR(post.mean(1), prior.mean(1), 1e-12);
    EXPECT_LT(post.covariance.trace(), prior.covariance.trace());
}

TEST(Kalman, LearnsVelocityOfAStraightLine) {
    KalmanState s = kf_init({0, 0}, kCfg);
    for (int k = 1; k <= 20; ++k) s = kf_update(kf_predict(s, kCfg), {double(k), 2.0 * k}, kCfg);
    EXPECT_NEAR(s.velocity().x, 1.0, 1e-3);
    EXPECT_NEAR(s.velocity().y, 2.0, 1e-3);
}

TEST(Kalman, ConvergesOnANoiselessTrack) {
    const Point v{3.5, -1.25};
    KalmanState s = kf_init({100, 100}, kCfg);
    for (int k = 1; k <= 10; ++k) {
        const Point z{100 + v.x * k, 100 + v.y * k};
        s = kf_update(kf_predict(s, kCfg), z, kCfg);
        if (k == 10) EXPECT_LT(euclidean_distance(s.position(), z), 1e-3);
    }
}

TEST(Kalman, CovarianceStaysSymmetricPsd) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> pos(-500, 500);
    std::bernoulli_distribution observe(0.6);
    std::uniform_int_distribution<int> len(1, 60);
    for (int seq = 0; seq < 1000; ++seq) {
        KalmanState s = kf_init({pos(rng), pos(rng)}, kCfg);
        const int n = len(rng);
        for (int k = 0; k < n; ++k) {
            s = kf_predict(s, kCfg);
            if (observe(rng)) s = kf_update(s, {pos(rng), pos(rng)}, kCfg);
        }
        expect_symmetric_psd(s.covariance);
        if (::testing::Test::HasFailure()) return;
    }
}

KalmanState warmed_up(Point start, Point velocity, int updates) {
    KalmanState s = kf_init(start, kCfg);
    for (int k = 1; k <= updates; ++k) {
        s = kf_update(kf_predict(s, kCfg), {start.x + velocity.x * k, start.y + velocity.y * k}, kCfg);
    }
    return s;
}

TEST(Interpolation, EmptyGap) {
    EXPECT_TRUE(interpolate_gap(kf_init({0, 0}, kCfg), 0, {0, 0, 4, 4}, CellClass::Alive, std::nullopt, kCfg).empty());
}

TEST(Interpolation, MovingCellFillsMonotonically) {
    // Moving at 2 px/frame, last seen at x = 0, re-found at x = 10 five frames on.
    KalmanState s = warmed_up({-20, 0}, {2, 0}, 10);
    const Box last{-2, -2, 4, 4};
    const auto filled = interpolate_gap(s, 4, last, CellClass::Alive, Point{10, 0}, kCfg);
    ASSERT_EQ(filled.size(), 4u);
    double prev = 0.0;
    for (const auto& e : filled) {
        EXPECT_EQ(e.provenance, Provenance::Interpolated);
        EXPECT_EQ(e.box.w, 4.0);
        EXPECT_GT(e.centroid().x, prev);
        EXPECT_LT(e.centroid().x, 10.0);
        prev = e.centroid().x;
    }
}

TEST(Interpolation, StationaryCellStaysPut) {
    KalmanState s = warmed_up({50, 60}, {0, 0}, 10);
    const auto filled = interpolate_gap(s, 3, {48, 58, 4, 4}, CellClass::Dead, Point{50, 60}, kCfg);
    ASSERT_EQ(filled.size(), 3u);
    for (const auto& e : filled) {
        EXPECT_NEAR(e.centroid().x, 50.0, 1e-6);
        EXPECT_NEAR(e.centroid().y, 60.0, 1e-6);
        EXPECT_EQ(e.cls, CellClass::Dead);
    }
}

TEST(Interpolation, WithoutAnchorFollowsThePrediction) {
    KalmanState s = warmed_up({0, 0}, {1, 1}, 15);
    const auto filled = interpolate_gap(s, 2, {8, 8, 4, 4}, CellClass::Alive, std::nullopt, kCfg);
    ASSERT_EQ(filled.size(), 2u);
    EXPECT_NEAR(filled[0].centroid().x, 16.0, 1e-3);
    EXPECT_NEAR(filled[1].centroid().y, 17.0, 1e-3);
}

}  // namespace
}  // namespace celltrack
