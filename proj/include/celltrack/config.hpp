// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 celltrack contributors

#pragma once

#include <cstddef>

namespace celltrack {

// Association thresholds and weights. Defaults reproduce the reference
// hyperparameters, so a default-constructed config is the reference setup.
struct TrackerConfig {
    double tau_high = 0.45;  // confidence >= tau_high: high-confidence set
    double tau_low = 0.25;   // tau_low <= confidence < tau_high: low-confidence set
    double tau_dst = 50.0;   // centroid distance gate, pixels
    double tau_sim = 65.0;   // L1 embedding distance gate
    double lambda = 0.5;     // weight of the similarity term in the pair cost
    int memory_frames = 5;   // frames a lost track stays re-identifiable
    int embedding_dim = 256;
    int max_daughters = 2;
    double kalman_process_noise = 1.0;      // px^2/frame^2, velocity terms
    double kalman_measurement_noise = 1.0;  // px^2
    double kalman_initial_velocity_variance = 1.0e4;

    // Ablation switches.
    bool use_low_confidence = true;  // run the second (low-confidence) stage
    bool use_kalman = true;          // Kalman re-identification and gap interpolation

    bool retain_embeddings = false;  // copy detection embeddings into track entries

    // Throws Validation if any invariant is violated.
    void validate() const;
};

}  // namespace celltrack
