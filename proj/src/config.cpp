// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 celltrack contributors

#include "celltrack/config.hpp"

#include "celltrack/error.hpp"

namespace celltrack {

void TrackerConfig::validate() const {
    auto check = [](bool ok, const char* what) {
        if (!ok) fail(ErrorKind::Validation, std::string("tracker config: ") + what);
    };
    check(tau_low >= 0.0 && tau_low <= tau_high && tau_high <= 1.0, "requires 0 <= tau_low <= tau_high <= 1");
    check(lambda >= 0.0 && lambda <= 1.0, "lambda must lie in [0,1]");
    check(tau_dst > 0.0, "tau_dst must be positive");
    check(tau_sim > 0.0, "tau_sim must be positive");
    check(memory_frames >= 0, "memory_frames must be non-negative");
    check(embedding_dim > 0, "embedding_dim must be positive");
    check(max_daughters > 0, "max_daughters must be positive");
    check(kalman_process_noise > 0.0 && kalman_measurement_noise > 0.0, "Kalman noise terms must be positive");
    check(kalman_initial_velocity_variance > 0.0, "initial velocity variance must be positive");
}

}  // namespace celltrack
