// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 celltrack contributors

#include "celltrack/association.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "celltrack/error.hpp"

namespace celltrack {

namespace {

// Uniform grid over detection centroids with cell size tau_dst, so a radius
// query only has to scan the 3x3 neighbourhood.
class CentroidGrid {
public:
    CentroidGrid(const FrameDetections& detections, std::span<const std::size_t> subset, double cell)
        : cell_(cell) {
        for (std::size_t idx : subset) {
            const Point c = centroid(detections[idx].box);
            buckets_[key(cell_index(c.x), cell_index(c.y))].push_back(idx);
        }
    }

    template <typename Fn>
    void for_each_near(Point p, Fn&& fn) const {
        const long long cx = cell_index(p.x);
        const long long cy = cell_index(p.y);
        for (long long dx = -1; dx <= 1; ++dx) {
            for (long long dy = -1; dy <= 1; ++dy) {
                auto it = buckets_.find(key(cx + dx, cy + dy));
                if (it == buckets_.end()) continue;
                for (std::size_t idx : it->second) fn(idx);
            }
        }
    }

private:
    long long cell_index(double v) const { return static_cast<long long>(std::floor(v / cell_)); }
    static long long key(long long a, long long b) { return (a << 32) ^ (b & 0xffffffffLL); }

    double cell_;
    std::unordered_map<long long, std::vector<std::size_t>> buckets_;
};

}  // namespace

double pair_cost(double similarity, double distance, const TrackerConfig& config) {
    return config.lambda * similarity / config.tau_sim + (1.0 - config.lambda) * distance / config.tau_dst;
}

double pair_cost(const TrackReference& track, const Detection& detection, const TrackerConfig& config) {
    if (!track.embedding) fail(ErrorKind::InvalidArgument, "track reference has no embedding");
    const double sim = embedding_l1(*track.embedding, detection.embedding);
    const double d = euclidean_distance(track.position, centroid(detection.box));
    return pair_cost(sim, d, config);
}

std::vector<CandidatePair> build_candidates(std::span<const TrackReference> tracks, const FrameDetections& detections,
                                            std::span<const std::size_t> subset, const TrackerConfig& config,
                                            bool gate_similarity) {
    std::vector<CandidatePair> out;
    if (tracks.empty() || subset.empty()) return out;
    CentroidGrid grid(detections, subset, config.tau_dst);
    std::vector<CandidatePair> local;
    for (const auto& ref : tracks) {
        if (!ref.embedding) fail(ErrorKind::InvalidArgument, "track reference has no embedding");
        local.clear();
        grid.for_each_near(ref.position, [&](std::size_t idx) {
            const Detection& det = detections[idx];
            const double d = euclidean_distance(ref.position, centroid(det.box));
            if (d > config.tau_dst) return;
            const double sim = embedding_l1(*ref.embedding, det.embedding);
            if (gate_similarity && sim > config.tau_sim) return;
            local.push_back({ref.id, idx, d, sim, pair_cost(sim, d, config)});
        });
        std::sort(local.begin(), local.end(), [](const auto& a, const auto& b) { return a.detection < b.detection; });
        out.insert(out.end(), local.begin(), local.end());
    }
    return out;
}

Assignment resolve_conflicts(std::span<const CandidatePair> candidates, int capacity) {
    std::vector<const CandidatePair*> order;
    order.reserve(candidates.size());
    for (const auto& c : candidates) order.push_back(&c);
    std::sort(order.begin(), order.end(), [](const CandidatePair* a, const CandidatePair* b) {
        return std::tie(a->cost, a->track, a->detection) < std::tie(b->cost, b->track, b->detection);
    });
    Assignment assignment;
    std::unordered_set<std::size_t> claimed;
    for (const CandidatePair* c : order) {
        if (claimed.count(c->detection)) continue;
        auto& held = assignment[c->track];
        if (static_cast<int>(held.size()) >= capacity) continue;
        held.push_back(c->detection);
        claimed.insert(c->detection);
    }
    std::erase_if(assignment, [](const auto& kv) { return kv.second.empty(); });
    return assignment;
}

std::map<TrackId, MatchOutcome> classify_outcomes(const Assignment& assignment, std::span<const TrackId> tracks) {
    std::map<TrackId, MatchOutcome> out;
    for (TrackId id : tracks) {
        auto it = assignment.find(id);
        const std::size_t n = it == assignment.end() ? 0 : it->second.size();
        out[id] = n == 0 ? MatchOutcome::Unmatched : n == 1 ? MatchOutcome::Continued : MatchOutcome::Divided;
    }
    return out;
}

Assignment match_deaths(std::span<const TrackReference> living_unmatched, const FrameDetections& detections,
                        std::span<const std::size_t> dead_detections, const TrackerConfig& config) {
    auto candidates = build_candidates(living_unmatched, detections, dead_detections, config, false);
    return resolve_conflicts(candidates, 1);
}

Point reference_position(const TrackMemory& memory, int frame, const TrackerConfig& config) {
    if (!config.use_kalman || frame - memory.last_observed_frame <= 1) return centroid(memory.last_box);
    KalmanState s = memory.kalman;
    for (int f = memory.last_observed_frame; f < frame; ++f) s = kf_predict(s, config);
    return s.position();
}

Assignment second_stage(std::span<const TrackMemory> pool, int frame, const FrameDetections& detections,
                        std::span<const std::size_t> low_confidence, const TrackerConfig& config) {
    Assignment result;
    for (CellClass cls : {CellClass::Alive, CellClass::Dead}) {
        std::vector<TrackReference> refs;
        for (const auto& m : pool) {
            if (m.cls == cls) refs.push_back({m.track_id, reference_position(m, frame, config), &m.last_embedding});
        }
        std::vector<std::size_t> dets;
        for (std::size_t idx : low_confidence) {
            if (detections[idx].cls == cls) dets.push_back(idx);
        }
        auto assigned = resolve_conflicts(build_candidates(refs, detections, dets, config, true), 1);
        result.merge(assigned);
    }
    return result;
}

std::vector<TrackId> age_memory_bank(MemoryBank& bank, const TrackerConfig& config) {
    std::vector<TrackId> expired;
    for (auto& m : bank) {
        ++m.frames_since_lost;
        if (m.frames_since_lost > config.memory_frames) expired.push_back(m.track_id);
    }
    std::erase_if(bank, [&](const TrackMemory& m) { return m.frames_since_lost > config.memory_frames; });
    return expired;
}

Tracker::Tracker(VideoMeta meta, TrackerConfig config) : config_(config) {
    config_.validate();
    forest_.meta = std::move(meta);
}

TrackEntry Tracker::make_entry(const Detection& det, std::size_t index, Provenance provenance, CellClass cls) const {
    TrackEntry e;
    e.box = det.box;
    e.cls = cls;
    e.provenance = provenance;
    e.confidence = det.confidence;
    e.detection = index;
    if (config_.retain_embeddings) e.embedding = det.embedding;
    return e;
}

TrackId Tracker::open_track(int frame, const Detection& det, std::size_t index, Provenance provenance,
                            std::optional<TrackId> parent) {
    const TrackId id = next_id_++;
    Track t;
    t.id = id;
    t.parent = parent;
    t.cls = det.cls;
    t.status = det.cls == CellClass::Dead ? TrackStatus::Dead : TrackStatus::Active;
    if (det.cls == CellClass::Dead) t.end_reason = EndReason::Death;
    t.entries.emplace(frame, make_entry(det, index, provenance, det.cls));
    forest_.tracks.emplace(id, std::move(t));

    TrackMemory m;
    m.track_id = id;
    m.kalman = kf_init(centroid(det.box), config_);
    m.last_observed_frame = frame;
    m.last_embedding = det.embedding;
    m.last_box = det.box;
    m.cls = det.cls;
    active_.push_back(std::move(m));
    return id;
}

void Tracker::append_observation(TrackMemory& memory, int frame, const Detection& det, std::size_t index,
                                 Provenance provenance) {
    Track& track = forest_.at(memory.track_id);
    const int gap = frame - memory.last_observed_frame - 1;
    if (gap > 0 && config_.use_kalman) {
        auto filled = interpolate_gap(memory.kalman, gap, memory.last_box, memory.cls, centroid(det.box), config_);
        for (int k = 0; k < gap; ++k) track.entries.emplace(memory.last_observed_frame + 1 + k, std::move(filled[k]));
    }
    const bool dies = memory.cls == CellClass::Alive && det.cls == CellClass::Dead;
    if (memory.cls == CellClass::Dead && det.cls == CellClass::Alive) {
        fail(ErrorKind::InvalidArgument, "dead track matched to a living detection");
    }
    track.entries.emplace(frame, make_entry(det, index, provenance, det.cls));
    KalmanState s = memory.kalman;
    for (int f = memory.last_observed_frame; f < frame; ++f) s = kf_predict(s, config_);
    memory.kalman = kf_update(s, centroid(det.box), config_);
    memory.last_observed_frame = frame;
    memory.last_embedding = det.embedding;
    memory.last_box = det.box;
    memory.frames_since_lost = 0;
    if (dies) {
        memory.cls = CellClass::Dead;
        track.cls = CellClass::Dead;
        track.status = TrackStatus::Dead;
        track.end_reason = EndReason::Death;
    } else if (track.status == TrackStatus::Lost) {
        track.status = TrackStatus::Active;
    }
    track.frames_since_seen = 0;
}

void Tracker::process_frame(int frame, const FrameDetections& detections) {
    if (frame <= last_frame_) fail(ErrorKind::InvalidArgument, "frames must be processed in increasing order");
    if (frame >= forest_.meta.frame_count) fail(ErrorKind::InvalidArgument, "frame beyond the video frame count");
    last_frame_ = frame;
    for (const auto& d : detections) {
        if (static_cast<int>(d.embedding.size()) != config_.embedding_dim) {
            fail(ErrorKind::Dimension, "detection embedding length " + std::to_string(d.embedding.size()) +
                                           " does not match embedding_dim " + std::to_string(config_.embedding_dim));
        }
    }

    const ConfidencePartition part = partition_by_confidence(detections, config_);
    auto of_class = [&](const std::vector<std::size_t>& idx, CellClass cls) {
        std::vector<std::size_t> out;
        for (std::size_t i : idx) {
            if (detections[i].cls == cls) out.push_back(i);
        }
        return out;
    };
    const auto high_alive = of_class(part.high, CellClass::Alive);
    const auto high_dead = of_class(part.high, CellClass::Dead);
    std::vector<bool> claimed(detections.size(), false);

    // Stage 1: living tracks against living high-confidence detections, dead
    // tracks against dead ones.
    std::vector<TrackReference> living, dead;
    for (const auto& m : active_) {
        TrackReference ref{m.track_id, centroid(m.last_box), &m.last_embedding};
        (m.cls == CellClass::Alive ? living : dead).push_back(ref);
    }
    Assignment stage1 = resolve_conflicts(build_candidates(living, detections, high_alive, config_, true),
                                          config_.max_daughters);
    Assignment dead_cont = resolve_conflicts(build_candidates(dead, detections, high_dead, config_, true), 1);
    for (const auto* a : {&stage1, &dead_cont}) {
        for (const auto& [id, dets] : *a) {
            for (std::size_t d : dets) claimed[d] = true;
        }
    }

    // Death matching for living tracks left without a living candidate.
    std::vector<TrackReference> living_unmatched;
    for (const auto& ref : living) {
        if (!stage1.count(ref.id)) living_unmatched.push_back(ref);
    }
    std::vector<std::size_t> dead_free;
    for (std::size_t i : high_dead) {
        if (!claimed[i]) dead_free.push_back(i);
    }
    Assignment deaths = match_deaths(living_unmatched, detections, dead_free, config_);
    for (const auto& [id, dets] : deaths) claimed[dets.front()] = true;

    std::vector<TrackId> ids;
    ids.reserve(active_.size());
    for (const auto& m : active_) ids.push_back(m.track_id);
    Assignment merged = stage1;
    for (const auto* a : {&dead_cont, &deaths}) {
        for (const auto& [id, dets] : *a) merged[id] = dets;
    }
    const auto outcomes = classify_outcomes(merged, ids);

    std::vector<TrackMemory> still_active;
    std::vector<TrackMemory> unmatched;
    struct PendingDivision {
        TrackId parent;
        std::vector<std::size_t> daughters;
    };
    std::vector<PendingDivision> divisions;
    for (auto& m : active_) {
        switch (outcomes.at(m.track_id)) {
            case MatchOutcome::Continued:
                append_observation(m, frame, detections[merged.at(m.track_id).front()], merged.at(m.track_id).front(),
                                   Provenance::ObservedHigh);
                still_active.push_back(std::move(m));
                break;
            case MatchOutcome::Divided: {
                Track& parent = forest_.at(m.track_id);
                parent.status = TrackStatus::Divided;
                parent.end_reason = EndReason::Division;
                auto dets = merged.at(m.track_id);
                std::sort(dets.begin(), dets.end());
                divisions.push_back({m.track_id, std::move(dets)});
                break;
            }
            case MatchOutcome::Unmatched:
                unmatched.push_back(std::move(m));
                break;
        }
    }
    active_ = std::move(still_active);
    for (const auto& div : divisions) {
        auto& children = forest_.at(div.parent).children;
        for (std::size_t d : div.daughters) {
            children.push_back(open_track(frame, detections[d], d, Provenance::ObservedHigh, div.parent));
        }
    }

    // Stage 2: re-identification from low-confidence detections.
    for (auto& m : unmatched) m.frames_since_lost = 0;
    std::vector<TrackMemory> pool = std::move(unmatched);
    for (auto& m : bank_) pool.push_back(std::move(m));
    bank_.clear();
    if (config_.use_low_confidence) {
        Assignment reid = second_stage(pool, frame, detections, part.low, config_);
        std::vector<TrackMemory> rest;
        for (auto& m : pool) {
            auto it = reid.find(m.track_id);
            if (it == reid.end()) {
                rest.push_back(std::move(m));
                continue;
            }
            const std::size_t d = it->second.front();
            claimed[d] = true;
            append_observation(m, frame, detections[d], d, Provenance::ObservedLow);
            active_.push_back(std::move(m));
        }
        pool = std::move(rest);
    }

    // Remaining high-confidence detections start new tracks.
    for (std::size_t i : part.high) {
        if (!claimed[i]) {
            claimed[i] = true;
            open_track(frame, detections[i], i, Provenance::ObservedHigh, std::nullopt);
        }
    }

    std::sort(active_.begin(), active_.end(), [](const auto& a, const auto& b) { return a.track_id < b.track_id; });

    bank_ = std::move(pool);
    for (const TrackId id : age_memory_bank(bank_, config_)) {
        Track& t = forest_.at(id);
        if (t.cls == CellClass::Alive) {
            t.status = TrackStatus::Closed;
            t.end_reason = EndReason::Lost;
        }
    }
    for (const auto& m : bank_) {
        Track& t = forest_.at(m.track_id);
        t.frames_since_seen = m.frames_since_lost;
        if (t.cls == CellClass::Alive) t.status = TrackStatus::Lost;
    }
}

LineageForest Tracker::finish() {
    for (const auto& m : active_) {
        Track& t = forest_.at(m.track_id);
        if (t.cls == CellClass::Alive) {
            t.status = TrackStatus::Closed;
            t.end_reason = EndReason::EndOfVideo;
        }
    }
    for (const auto& m : bank_) {
        Track& t = forest_.at(m.track_id);
        if (t.cls == CellClass::Alive) {
            t.status = TrackStatus::Closed;
            t.end_reason = EndReason::Lost;
        }
    }
    active_.clear();
    bank_.clear();
    forest_.validate(config_.use_kalman);
    return std::move(forest_);
}

LineageForest track_video(const DetectionVideo& video, const TrackerConfig& config) {
    if (video.embedding_dim != config.embedding_dim) {
        fail(ErrorKind::Dimension, "video embedding_dim " + std::to_string(video.embedding_dim) +
                                       " does not match tracker embedding_dim " + std::to_string(config.embedding_dim));
    }
    Tracker tracker(video.meta, config);
    for (std::size_t f = 0; f < video.frames.size(); ++f) tracker.process_frame(static_cast<int>(f), video.frames[f]);
    return tracker.finish();
}

}  // namespace celltrack
