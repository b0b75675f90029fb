// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 celltrack contributors

#include "celltrack/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <unordered_map>

#include "celltrack/error.hpp"

namespace celltrack {

namespace {

using Rng = std::mt19937_64;

double quantize(double v, double step) { return std::round(v / step) * step; }

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

struct Cell {
    TrackId id = 0;
    std::optional<TrackId> parent;
    TrackId noise_group = 0;  // sisters share one
    double cx = 0.0, cy = 0.0, vx = 0.0, vy = 0.0;
    double log_diameter = 0.0;
    double log_aspect = 0.0;
    int born = 0;  // first frame
    bool dead = false;
    double dead_x = 0.0, dead_y = 0.0;  // where the cell died; it only jitters around this
    std::vector<double> latent;
};

class Simulation {
public:
    explicit Simulation(const SimulationConfig& c) : c_(c), rng_(c.seed) {}

    SimulationResult run() {
        result_.ground_truth.meta = meta();
        result_.clean.meta = meta();
        result_.clean.embedding_dim = c_.embedding_dim;
        result_.clean.frames.assign(static_cast<std::size_t>(c_.frames), {});

        dead_prototype_.resize(static_cast<std::size_t>(c_.embedding_dim));
        for (double& v : dead_prototype_) v = normal_(rng_);
        for (int i = 0; i < c_.initial_cells; ++i) cells_.push_back(new_root());

        for (int t = 0; t < c_.frames; ++t) {
            emit(t);
            if (t + 1 == c_.frames) break;
            step_events(t);
            step_motion();
        }
        for (const Cell& cell : cells_) {
            Track& track = result_.ground_truth.at(cell.id);
            track.end_reason = cell.dead ? EndReason::Death : EndReason::EndOfVideo;
            track.status = cell.dead ? TrackStatus::Dead : TrackStatus::Closed;
        }
        result_.ground_truth.validate(true);
        return std::move(result_);
    }

private:
    VideoMeta meta() const {
        VideoMeta m;
        m.video_id = c_.video_id;
        m.frame_count = c_.frames;
        m.image_width = c_.image_width;
        m.image_height = c_.image_height;
        m.tags["dosage"] = c_.dosage_tag();
        m.tags["treatment_frame"] = std::to_string(c_.treatment_frame);
        return m;
    }

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    bool bernoulli(double p) { return p > 0.0 && uniform(0.0, 1.0) < p; }

    double fresh_log_diameter() {
        const double d = std::max(4.0, c_.cell_diameter + c_.diameter_sigma * normal_(rng_));
        return std::log(d);
    }

    double radius(const Cell& cell) const { return 0.5 * std::exp(cell.log_diameter); }

    Cell new_root() {
        Cell cell;
        cell.id = next_id_++;
        cell.noise_group = cell.id;
        cell.log_diameter = fresh_log_diameter();
        cell.log_aspect = c_.aspect_sigma * normal_(rng_);
        const double r = radius(cell);
        cell.cx = uniform(r, std::max(r + 1e-9, c_.image_width - r));
        cell.cy = uniform(r, std::max(r + 1e-9, c_.image_height - r));
        const double v_sd = c_.motion_sigma / std::sqrt(std::max(1e-9, 1.0 - c_.velocity_persistence * c_.velocity_persistence));
        cell.vx = v_sd * normal_(rng_);
        cell.vy = v_sd * normal_(rng_);
        // Roots enter mid-cycle: pretend they were born some time before frame 0.
        const int max_age = c_.cycle_frames > 0 ? c_.cycle_frames - 1
                                                : c_.min_cycle_frames + static_cast<int>(1.0 / std::max(0.01, c_.division_prob));
        cell.born = -std::uniform_int_distribution<int>(0, std::max(0, max_age))(rng_);
        cell.latent.resize(static_cast<std::size_t>(c_.embedding_dim));
        for (double& v : cell.latent) v = normal_(rng_);
        open_track(cell);
        return cell;
    }

    void open_track(const Cell& cell) {
        Track t;
        t.id = cell.id;
        t.parent = cell.parent;
        t.status = TrackStatus::Active;
        result_.ground_truth.tracks.emplace(cell.id, std::move(t));
    }

    Box box_of(const Cell& cell) const {
        const double d = std::exp(cell.log_diameter);
        const double w = quantize(d * std::exp(cell.log_aspect), 1e-3);
        const double h = quantize(d * std::exp(-cell.log_aspect), 1e-3);
        return {quantize(cell.cx - 0.5 * w, 1e-3), quantize(cell.cy - 0.5 * h, 1e-3), w, h};
    }

    void emit(int t) {
        auto& frame = result_.clean.frames[static_cast<std::size_t>(t)];
        for (const Cell& cell : cells_) {
            Detection det;
            det.frame = t;
            det.box = box_of(cell);
            det.confidence = 1.0;
            det.cls = cell.dead ? CellClass::Dead : CellClass::Alive;
            det.embedding.resize(cell.latent.size());
            for (std::size_t k = 0; k < cell.latent.size(); ++k) {
                const double v = cell.dead ? 0.5 * cell.latent[k] + 0.5 * dead_prototype_[k] : cell.latent[k];
                det.embedding[k] = static_cast<float>(quantize(v, 1e-3));
            }
            TrackEntry e;
            e.box = det.box;
            e.cls = det.cls;
            e.provenance = Provenance::Annotated;
            Track& track = result_.ground_truth.at(cell.id);
            track.entries.emplace(t, e);
            track.cls = det.cls;
            frame.push_back(std::move(det));
        }
        std::shuffle(frame.begin(), frame.end(), rng_);
        for (std::size_t i = 0; i < frame.size(); ++i) frame[i].source_id = i;
    }

    bool post_treatment(int t) const { return c_.treated && t >= c_.treatment_frame; }

    bool divides(const Cell& cell, int t, int alive) {
        if (alive >= c_.max_cells) return false;
        const int age = t - cell.born + 1;
        bool d = false;
        if (c_.cycle_frames > 0) {
            d = age >= c_.cycle_frames;
        } else if (age >= c_.min_cycle_frames) {
            d = bernoulli(post_treatment(t) ? c_.division_prob_treated : c_.division_prob);
        }
        if (t == c_.division_spike_frame && bernoulli(c_.division_spike_prob)) d = true;
        return d;
    }

    bool dies(int t) {
        double p = c_.death_prob;
        if (c_.treated && t >= c_.treatment_frame + c_.death_lag_frames) p = std::max(p, c_.death_prob_treated);
        return bernoulli(p);
    }

    // Decides what happens between frame t and t + 1.
    void step_events(int t) {
        int alive = 0;
        for (const Cell& cell : cells_) alive += cell.dead ? 0 : 1;
        std::vector<Cell> next;
        next.reserve(cells_.size() + 16);
        for (Cell& cell : cells_) {
            if (cell.dead) {
                next.push_back(std::move(cell));
                continue;
            }
            if (dies(t)) {
                cell.dead = true;
                cell.dead_x = cell.cx;
                cell.dead_y = cell.cy;
                next.push_back(std::move(cell));
                continue;
            }
            if (!divides(cell, t, alive)) {
                next.push_back(std::move(cell));
                continue;
            }
            Track& mother = result_.ground_truth.at(cell.id);
            mother.end_reason = EndReason::Division;
            mother.status = TrackStatus::Divided;
            const double angle = uniform(0.0, 2.0 * std::numbers::pi);
            const double offset = 0.25 * std::exp(cell.log_diameter);
            for (int side : {-1, 1}) {
                Cell d;
                d.id = next_id_++;
                d.parent = cell.id;
                d.noise_group = cell.id;
                d.born = t + 1;
                d.cx = cell.cx + side * offset * std::cos(angle);
                d.cy = cell.cy + side * offset * std::sin(angle);
                d.vx = cell.vx + side * 0.5 * std::cos(angle);
                d.vy = cell.vy + side * 0.5 * std::sin(angle);
                if (c_.size_model == SizeModel::Heritable) {
                    d.log_diameter = cell.log_diameter + std::log1p(c_.daughter_size_noise * normal_(rng_));
                    d.log_aspect = cell.log_aspect;
                } else {
                    d.log_diameter = fresh_log_diameter();
                    d.log_aspect = c_.aspect_sigma * normal_(rng_);
                }
                d.latent = cell.latent;
                for (double& v : d.latent) v += c_.daughter_embedding_noise * normal_(rng_);
                reflect(d);
                open_track(d);
                mother.children.push_back(d.id);
                next.push_back(std::move(d));
            }
        }
        cells_ = std::move(next);
    }

    void reflect(Cell& cell) const {
        const double r = radius(cell);
        auto axis = [r](double& p, double& v, double extent) {
            const double lo = r, hi = std::max(r, extent - r);
            for (int k = 0; k < 4 && (p < lo || p > hi); ++k) {
                if (p < lo) p = 2.0 * lo - p, v = -v;
                if (p > hi) p = 2.0 * hi - p, v = -v;
            }
            p = std::clamp(p, lo, hi);
        };
        axis(cell.cx, cell.vx, c_.image_width);
        axis(cell.cy, cell.vy, c_.image_height);
    }

    void step_motion() {
        const double own_weight = std::sqrt(std::max(0.0, 1.0 - c_.sister_shared_weight * c_.sister_shared_weight));
        std::unordered_map<TrackId, double> shared;
        for (Cell& cell : cells_) {
            if (cell.dead) {
                // Residual jitter only, around the death position.
                cell.cx = cell.dead_x + c_.dead_jitter * normal_(rng_);
                cell.cy = cell.dead_y + c_.dead_jitter * normal_(rng_);
                continue;
            }
            cell.vx = c_.velocity_persistence * cell.vx + c_.motion_sigma * normal_(rng_);
            cell.vy = c_.velocity_persistence * cell.vy + c_.motion_sigma * normal_(rng_);
            cell.cx += cell.vx;
            cell.cy += cell.vy;
            auto it = shared.find(cell.noise_group);
            if (it == shared.end()) it = shared.emplace(cell.noise_group, normal_(rng_)).first;
            cell.log_diameter += c_.size_walk_sigma * (c_.sister_shared_weight * it->second + own_weight * normal_(rng_));
            reflect(cell);
            for (double& v : cell.latent) v += c_.embedding_drift * normal_(rng_);
        }
    }

    const SimulationConfig& c_;
    Rng rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::vector<Cell> cells_;
    std::vector<double> dead_prototype_;
    TrackId next_id_ = 1;
    SimulationResult result_;
};

}  // namespace

void SimulationConfig::validate() const {
    auto check = [](bool ok, const char* what) {
        if (!ok) fail(ErrorKind::Validation, std::string("simulation config: ") + what);
    };
    check(frames >= 1, "frames must be >= 1");
    check(image_width > 0 && image_height > 0, "image size must be positive");
    check(initial_cells >= 0, "initial_cells must be non-negative");
    check(treatment_frame >= 0 && treatment_frame < frames, "treatment_frame must lie in [0, frames)");
    check(is_probability(division_prob) && is_probability(division_prob_treated) &&
              is_probability(division_spike_prob) && is_probability(death_prob) && is_probability(death_prob_treated),
          "probabilities must lie in [0,1]");
    check(is_probability(sister_shared_weight), "sister_shared_weight must lie in [0,1]");
    check(velocity_persistence >= 0.0 && velocity_persistence < 1.0, "velocity_persistence must lie in [0,1)");
    check(motion_sigma >= 0.0 && size_walk_sigma >= 0.0 && diameter_sigma >= 0.0 && aspect_sigma >= 0.0 &&
              daughter_size_noise >= 0.0 && dead_jitter >= 0.0,
          "noise levels must be non-negative");
    check(cell_diameter > 0.0, "cell_diameter must be positive");
    check(min_cycle_frames >= 1 && cycle_frames >= 0 && death_lag_frames >= 0, "cycle parameters out of range");
    check(max_cells >= 1, "max_cells must be positive");
    check(embedding_dim >= 1, "embedding_dim must be positive");
    check(embedding_drift >= 0.0 && daughter_embedding_noise >= 0.0, "embedding noise must be non-negative");
}

std::string SimulationConfig::dosage_tag() const {
    if (!dosage.empty()) return dosage;
    return treated ? "treated" : "control";
}

void CorruptionConfig::validate() const {
    auto check = [](bool ok, const char* what) {
        if (!ok) fail(ErrorKind::Validation, std::string("corruption config: ") + what);
    };
    check(box_jitter >= 0.0 && embedding_noise >= 0.0 && fp_rate >= 0.0, "noise levels must be non-negative");
    check(is_probability(p_drop) && is_probability(miss_fraction), "probabilities must lie in [0,1]");
    check(is_probability(fp_confidence_max) && is_probability(confidence_spread), "confidence bounds must lie in [0,1]");
    check(tau_low >= 0.0 && tau_low <= tau_high && tau_high <= 1.0, "requires 0 <= tau_low <= tau_high <= 1");
}

SimulationResult simulate(const SimulationConfig& config) {
    config.validate();
    return Simulation(config).run();
}

DetectionVideo corrupt(const DetectionVideo& clean, const CorruptionConfig& config) {
    config.validate();
    Rng rng(config.seed ^ 0x5bd1e995ULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return lo >= hi ? lo : std::uniform_real_distribution<double>(lo, hi)(rng); };

    double mean_w = 32.0, mean_h = 32.0;
    {
        double sw = 0.0, sh = 0.0;
        std::size_t n = 0;
        for (const auto& f : clean.frames) {
            for (const auto& d : f) sw += d.box.w, sh += d.box.h, ++n;
        }
        if (n > 0) mean_w = sw / n, mean_h = sh / n;
    }

    DetectionVideo out = clean;
    for (std::size_t t = 0; t < out.frames.size(); ++t) {
        auto& frame = out.frames[t];
        for (auto& d : frame) {
            if (config.box_jitter > 0.0) {
                d.box.x = quantize(d.box.x + config.box_jitter * normal(rng), 1e-3);
                d.box.y = quantize(d.box.y + config.box_jitter * normal(rng), 1e-3);
                d.box.w = quantize(std::max(1.0, d.box.w + config.box_jitter * normal(rng)), 1e-3);
                d.box.h = quantize(std::max(1.0, d.box.h + config.box_jitter * normal(rng)), 1e-3);
            }
            double conf = 1.0 - uniform(0.0, config.confidence_spread);
            if (config.p_drop > 0.0 && uniform(0.0, 1.0) < config.p_drop) {
                conf = uniform(0.0, 1.0) < config.miss_fraction ? uniform(0.0, config.tau_low)
                                                                 : uniform(config.tau_low, config.tau_high);
            }
            d.confidence = quantize(conf, 1e-4);
            // Rounding must not lift a drop back across a threshold.
            if (d.confidence >= config.tau_high && conf < config.tau_high) d.confidence = conf;
            if (d.confidence >= config.tau_low && conf < config.tau_low) d.confidence = conf;
            if (config.embedding_noise > 0.0) {
                for (float& v : d.embedding) {
                    v = static_cast<float>(quantize(v + config.embedding_noise * normal(rng), 1e-3));
                }
            }
        }
        if (config.fp_rate > 0.0) {
            const int count = std::poisson_distribution<int>(config.fp_rate)(rng);
            for (int k = 0; k < count; ++k) {
                Detection fp;
                fp.frame = static_cast<int>(t);
                const double w = quantize(std::max(4.0, mean_w * (1.0 + 0.1 * normal(rng))), 1e-3);
                const double h = quantize(std::max(4.0, mean_h * (1.0 + 0.1 * normal(rng))), 1e-3);
                fp.box = {quantize(uniform(0.0, std::max(0.0, out.meta.image_width - w)), 1e-3),
                          quantize(uniform(0.0, std::max(0.0, out.meta.image_height - h)), 1e-3), w, h};
                fp.confidence = quantize(uniform(0.0, config.fp_confidence_max), 1e-4);
                fp.cls = CellClass::Alive;
                fp.embedding.resize(static_cast<std::size_t>(out.embedding_dim));
                for (float& v : fp.embedding) v = static_cast<float>(quantize(normal(rng), 1e-3));
                frame.push_back(std::move(fp));
            }
            std::shuffle(frame.begin(), frame.end(), rng);
        }
        for (std::size_t i = 0; i < frame.size(); ++i) frame[i].source_id = i;
    }
    return out;
}

double embedding_noise_for_rejection(int dim, double tau_sim, double drift, double rejection) {
    if (dim <= 0 || tau_sim <= 0.0 || !(rejection > 0.0 && rejection < 1.0)) {
        fail(ErrorKind::InvalidArgument, "embedding_noise_for_rejection: arguments out of range");
    }
    // z with P(N(0,1) > z) = rejection, by bisection on the upper tail.
    double lo = -10.0, hi = 10.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (0.5 * std::erfc(mid / std::numbers::sqrt2) > rejection ? lo : hi) = mid;
    }
    const double z = 0.5 * (lo + hi);
    const double mean_abs = std::sqrt(2.0 / std::numbers::pi);
    const double sd_abs = std::sqrt(1.0 - 2.0 / std::numbers::pi);
    const double d = static_cast<double>(dim);
    const double s = tau_sim / (d * mean_abs + z * std::sqrt(d) * sd_abs);
    const double var = (s * s - drift * drift) / 2.0;
    if (var <= 0.0) return 0.0;
    return std::sqrt(var);
}

}  // namespace celltrack
