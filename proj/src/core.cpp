// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 celltrack contributors

#include "celltrack/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "celltrack/error.hpp"

namespace celltrack {

Point TrackEntry::centroid() const { return celltrack::centroid(box); }

std::optional<int> Track::death_frame() const {
    for (const auto& [frame, entry] : entries) {
        if (entry.cls == CellClass::Dead) return frame;
    }
    return std::nullopt;
}

std::string VideoMeta::tag(const std::string& key, const std::string& fallback) const {
    auto it = tags.find(key);
    return it == tags.end() ? fallback : it->second;
}

const Track& LineageForest::at(TrackId id) const {
    auto it = tracks.find(id);
    if (it == tracks.end()) fail(ErrorKind::InvalidArgument, "unknown track id " + std::to_string(id));
    return it->second;
}

Track& LineageForest::at(TrackId id) {
    auto it = tracks.find(id);
    if (it == tracks.end()) fail(ErrorKind::InvalidArgument, "unknown track id " + std::to_string(id));
    return it->second;
}

void LineageForest::validate(bool require_contiguous) const {
    auto bad = [](TrackId id, const std::string& why) {
        fail(ErrorKind::Validation, "track " + std::to_string(id) + ": " + why);
    };
    for (const auto& [id, t] : tracks) {
        if (id <= 0) bad(id, "track ids must be positive");
        if (t.id != id) bad(id, "id does not match its key");
        if (t.empty()) bad(id, "track has no entries");
        if (t.start_frame() < 0 || t.last_frame() >= meta.frame_count) bad(id, "entries outside the video frame range");
        if (require_contiguous && static_cast<std::size_t>(t.span()) != t.entries.size()) bad(id, "frame gap inside the track");
        if (t.parent) {
            if (*t.parent == id) bad(id, "track is its own parent");
            auto p = tracks.find(*t.parent);
            if (p == tracks.end()) bad(id, "dangling parent id " + std::to_string(*t.parent));
            const auto& kids = p->second.children;
            if (std::find(kids.begin(), kids.end(), id) == kids.end()) bad(id, "parent does not list it as a child");
            if (p->second.last_frame() + 1 != t.start_frame()) bad(id, "daughter does not start right after the parent ends");
        }
        std::set<TrackId> seen;
        for (TrackId c : t.children) {
            if (!seen.insert(c).second) bad(id, "duplicate child");
            auto ch = tracks.find(c);
            if (ch == tracks.end()) bad(id, "dangling child id " + std::to_string(c));
            if (ch->second.parent != id) bad(id, "child does not point back at it");
        }
        if (!t.children.empty() && t.status != TrackStatus::Divided) bad(id, "has children but is not Divided");
        if (t.children.empty() && t.status == TrackStatus::Divided) bad(id, "Divided without children");
        bool dead = false;
        for (const auto& [frame, e] : t.entries) {
            if (e.cls == CellClass::Dead) dead = true;
            else if (dead) bad(id, "alive entry after death at frame " + std::to_string(frame));
            if (e.box.w <= 0 || e.box.h <= 0) bad(id, "non-positive box extent");
        }
        if (dead && !t.children.empty()) bad(id, "dead track divided");
    }
}

Point centroid(const Box& box) { return {box.x + box.w / 2.0, box.y + box.h / 2.0}; }

double euclidean_distance(Point p, Point q) { return std::hypot(p.x - q.x, p.y - q.y); }

double embedding_l1(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) {
        fail(ErrorKind::Dimension, "embedding length mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::fabs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
    return sum;
}

double intersection_area(const Box& a, const Box& b) {
    const double iw = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
    const double ih = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    return iw * ih;
}

double iou(const Box& a, const Box& b) {
    if (a.x == b.x && a.y == b.y && a.w == b.w && a.h == b.h && a.area() > 0.0) return 1.0;
    const double inter = intersection_area(a, b);
    if (inter <= 0.0) return 0.0;
    return inter / (a.area() + b.area() - inter);
}

std::string_view to_string(CellClass c) { return c == CellClass::Alive ? "alive" : "dead"; }

std::string_view to_string(Provenance p) {
    switch (p) {
        case Provenance::ObservedHigh: return "high";
        case Provenance::ObservedLow: return "low";
        case Provenance::Interpolated: return "interp";
        case Provenance::Annotated: return "gt";
    }
    return "?";
}

std::string_view to_string(EndReason r) {
    switch (r) {
        case EndReason::None: return "none";
        case EndReason::Division: return "division";
        case EndReason::Death: return "death";
        case EndReason::EndOfVideo: return "end_of_video";
        case EndReason::LeftFov: return "left_fov";
        case EndReason::Lost: return "lost";
    }
    return "?";
}

std::string_view to_string(TrackStatus s) {
    switch (s) {
        case TrackStatus::Active: return "active";
        case TrackStatus::Lost: return "lost";
        case TrackStatus::Divided: return "divided";
        case TrackStatus::Dead: return "dead";
        case TrackStatus::Closed: return "closed";
    }
    return "?";
}

std::optional<CellClass> parse_cell_class(std::string_view s) {
    if (s == "alive") return CellClass::Alive;
    if (s == "dead") return CellClass::Dead;
    return std::nullopt;
}

std::optional<Provenance> parse_provenance(std::string_view s) {
    if (s == "high") return Provenance::ObservedHigh;
    if (s == "low") return Provenance::ObservedLow;
    if (s == "interp") return Provenance::Interpolated;
    if (s == "gt") return Provenance::Annotated;
    return std::nullopt;
}

std::optional<EndReason> parse_end_reason(std::string_view s) {
    for (auto r : {EndReason::None, EndReason::Division, EndReason::Death, EndReason::EndOfVideo, EndReason::LeftFov,
                   EndReason::Lost}) {
        if (to_string(r) == s) return r;
    }
    return std::nullopt;
}

bool isomorphic(const LineageForest& a, const LineageForest& b, std::string* why) {
    auto differ = [why](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    if (a.meta.frame_count != b.meta.frame_count) return differ("frame counts differ");
    if (a.tracks.size() != b.tracks.size()) {
        return differ("track counts differ: " + std::to_string(a.tracks.size()) + " vs " + std::to_string(b.tracks.size()));
    }
    // Tracks are keyed by their first entry; boxes at one frame are distinct
    // in any forest worth comparing.
    using Key = std::tuple<int, double, double, double, double>;
    auto key_of = [](const Track& t) {
        const auto& [f, e] = *t.entries.begin();
        return Key{f, e.box.x, e.box.y, e.box.w, e.box.h};
    };
    std::map<Key, TrackId> b_by_key;
    for (const auto& [id, t] : b.tracks) {
        if (t.empty()) return differ("empty track in second forest");
        if (!b_by_key.emplace(key_of(t), id).second) return differ("ambiguous first entries in second forest");
    }
    std::map<TrackId, TrackId> a_to_b;
    for (const auto& [id, t] : a.tracks) {
        if (t.empty()) return differ("empty track in first forest");
        auto it = b_by_key.find(key_of(t));
        if (it == b_by_key.end()) return differ("track " + std::to_string(id) + " has no counterpart");
        a_to_b[id] = it->second;
    }
    for (const auto& [id, t] : a.tracks) {
        const Track& u = b.tracks.at(a_to_b.at(id));
        const std::string label = "track " + std::to_string(id) + " vs " + std::to_string(u.id) + ": ";
        if (t.entries.size() != u.entries.size()) return differ(label + "entry counts differ");
        for (auto p = t.entries.begin(), q = u.entries.begin(); p != t.entries.end(); ++p, ++q) {
            if (p->first != q->first || !(p->second.box == q->second.box) || p->second.cls != q->second.cls) {
                return differ(label + "entries differ at frame " + std::to_string(p->first));
            }
        }
        if (t.end_reason != u.end_reason) return differ(label + "end reasons differ");
        if (t.parent.has_value() != u.parent.has_value() || (t.parent && a_to_b.at(*t.parent) != *u.parent)) {
            return differ(label + "parents differ");
        }
    }
    return true;
}

}  // namespace celltrack
