// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 celltrack contributors

#pragma once

#include <cstdint>
#include <string>

#include "celltrack/core.hpp"
#include "celltrack/ingest.hpp"

namespace celltrack {

enum class SizeModel : std::uint8_t {
    Heritable,    // daughters start at the mother's final size, +-daughter_size_noise
    Independent,  // every cell draws a fresh size (null model)
};

// Synthetic time-lapse population. Frame geometry defaults to the 48-hour,
// 30-minute-interval recordings: 234 frames of 1024x1024 px, drug added at
// frame 96.
struct SimulationConfig {
    int frames = 234;
    int image_width = 1024;
    int image_height = 1024;
    int initial_cells = 40;
    int treatment_frame = 96;
    bool treated = false;
    std::string video_id = "sim";
    std::string dosage;  // grouping tag; empty -> "treated" / "control"

    // Persistent random walk: v' = persistence * v + N(0, motion_sigma^2).
    double motion_sigma = 1.0;
    double velocity_persistence = 0.8;

    double cell_diameter = 32.0;
    double diameter_sigma = 3.0;
    double aspect_sigma = 0.05;  // log aspect ratio spread
    // Per-frame log-diameter walk; sisters share a fraction of the noise.
    double size_walk_sigma = 0.003;
    double sister_shared_weight = 0.8;
    SizeModel size_model = SizeModel::Heritable;
    double daughter_size_noise = 0.01;

    int min_cycle_frames = 30;
    double division_prob = 0.04;          // per frame once the cell is old enough
    double division_prob_treated = 0.005;  // after treatment, treated videos only
    int cycle_frames = 0;                  // > 0: deterministic cycle length instead
    int division_spike_frame = -1;         // >= 0: extra division chance at this frame
    double division_spike_prob = 0.0;
    double death_prob = 0.0;  // per frame, any time
    double death_prob_treated = 0.006;
    int death_lag_frames = 40;  // treated deaths start this many frames after treatment
    double dead_jitter = 0.3;
    int max_cells = 4000;  // no divisions while this many cells are alive

    int embedding_dim = 256;
    double embedding_drift = 0.01;  // per component per frame
    double daughter_embedding_noise = 0.05;

    std::uint64_t seed = 0;

    void validate() const;
    std::string dosage_tag() const;
};

// Detector degradation applied to clean detections.
struct CorruptionConfig {
    double box_jitter = 2.0;  // px, on x, y, w, h
    double p_drop = 0.1;
    double miss_fraction = 0.5;  // share of drops pushed below tau_low, rest land in [tau_low, tau_high)
    double fp_rate = 0.5;        // Poisson mean per frame
    double fp_confidence_max = 0.6;
    double embedding_noise = 0.2087;
    double confidence_spread = 0.5;  // true detections score 1 - U[0, spread)
    double tau_low = 0.25;
    double tau_high = 0.45;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SimulationResult {
    LineageForest ground_truth;
    DetectionVideo clean;
};

SimulationResult simulate(const SimulationConfig& config);
DetectionVideo corrupt(const DetectionVideo& clean, const CorruptionConfig& config);

// Per-component embedding noise at which the L1 gate rejects `rejection` of
// true consecutive-frame pairs, using a normal approximation of the L1 sum.
double embedding_noise_for_rejection(int dim, double tau_sim, double drift, double rejection);

}  // namespace celltrack
