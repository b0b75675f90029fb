// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 celltrack contributors

#include "celltrack/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "celltrack/error.hpp"
#include "celltrack/text.hpp"

namespace celltrack {

namespace {

class LineReader {
public:
    LineReader(std::istream& in, std::string name) : in_(in), name_(std::move(name)) {}

    bool next(std::string& line) {
        while (std::getline(in_, line)) {
            ++number_;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!text::trim(line).empty()) return true;
        }
        return false;
    }

    [[noreturn]] void error(ErrorKind kind, const std::string& what) const {
        fail(kind, name_ + ":" + std::to_string(number_) + ": " + what);
    }

    std::size_t number() const { return number_; }

private:
    std::istream& in_;
    std::string name_;
    std::size_t number_ = 0;
};

// Consumes a `#key=value` header line into meta; returns false for unknown
// reserved keys so callers can handle them.
void apply_header(LineReader& reader, std::string_view line, VideoMeta& meta, int* embedding_dim) {
    auto body = line.substr(1);
    auto eq = body.find('=');
    if (eq == std::string_view::npos) reader.error(ErrorKind::Parse, "header line must be #key=value");
    auto key = text::trim(body.substr(0, eq));
    auto value = text::trim(body.substr(eq + 1));
    if (key.empty()) reader.error(ErrorKind::Parse, "empty header key");
    auto int_value = [&](int& dst) {
        if (!text::parse(value, dst)) reader.error(ErrorKind::Parse, "header '" + std::string(key) + "' is not an integer");
    };
    if (key == "video_id") meta.video_id = std::string(value);
    else if (key == "frame_count") int_value(meta.frame_count);
    else if (key == "image_width") int_value(meta.image_width);
    else if (key == "image_height") int_value(meta.image_height);
    else if (key == "embedding_dim") {
        if (!embedding_dim) reader.error(ErrorKind::Parse, "embedding_dim is not a forest header");
        int_value(*embedding_dim);
    } else meta.tags[std::string(key)] = std::string(value);
}

void write_meta(std::ostream& out, const VideoMeta& meta, const int* embedding_dim) {
    out << "#video_id=" << meta.video_id << '\n';
    out << "#frame_count=" << meta.frame_count << '\n';
    out << "#image_width=" << meta.image_width << '\n';
    out << "#image_height=" << meta.image_height << '\n';
    if (embedding_dim) out << "#embedding_dim=" << *embedding_dim << '\n';
    for (const auto& [k, v] : meta.tags) out << '#' << k << '=' << v << '\n';
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    return out;
}

}  // namespace

std::size_t DetectionVideo::detection_count() const {
    std::size_t n = 0;
    for (const auto& f : frames) n += f.size();
    return n;
}

DetectionVideo parse_detections(std::istream& in, const std::string& source_name) {
    LineReader reader(in, source_name);
    DetectionVideo video;
    video.meta.frame_count = -1;
    video.embedding_dim = -1;
    std::string line;
    bool in_records = false;
    std::uint64_t ordinal = 0;
    while (reader.next(line)) {
        std::string_view view = text::trim(line);
        if (view.front() == '#') {
            if (in_records) reader.error(ErrorKind::Parse, "header line after the first record");
            apply_header(reader, view, video.meta, &video.embedding_dim);
            continue;
        }
        if (!in_records) {
            if (video.meta.frame_count < 0) reader.error(ErrorKind::Parse, "missing #frame_count header");
            if (video.embedding_dim <= 0) reader.error(ErrorKind::Parse, "missing or non-positive #embedding_dim header");
            video.frames.assign(static_cast<std::size_t>(video.meta.frame_count), {});
            in_records = true;
        }
        auto fields = text::split(view, ',');
        const std::size_t expected = 7 + static_cast<std::size_t>(video.embedding_dim);
        if (fields.size() < 7) reader.error(ErrorKind::Parse, "record has fewer than 7 fields");
        if (fields.size() != expected) {
            reader.error(ErrorKind::Dimension, "embedding has " + std::to_string(fields.size() - 7) + " values, expected " +
                                                   std::to_string(video.embedding_dim));
        }
        Detection d;
        if (!text::parse(fields[0], d.frame)) reader.error(ErrorKind::Parse, "bad frame index");
        double* coords[] = {&d.box.x, &d.box.y, &d.box.w, &d.box.h};
        for (int i = 0; i < 4; ++i) {
            if (!text::parse(fields[1 + i], *coords[i])) reader.error(ErrorKind::Parse, "bad box coordinate");
        }
        if (!text::parse(fields[5], d.confidence)) reader.error(ErrorKind::Parse, "bad confidence");
        auto cls = parse_cell_class(text::trim(fields[6]));
        if (!cls) reader.error(ErrorKind::Parse, "class must be 'alive' or 'dead'");
        d.cls = *cls;
        d.embedding.resize(static_cast<std::size_t>(video.embedding_dim));
        for (std::size_t i = 0; i < d.embedding.size(); ++i) {
            if (!text::parse(fields[7 + i], d.embedding[i])) reader.error(ErrorKind::Parse, "bad embedding value");
        }
        if (d.frame < 0 || d.frame >= video.meta.frame_count) reader.error(ErrorKind::Validation, "frame index out of range");
        if (!(d.box.w > 0.0) || !(d.box.h > 0.0)) reader.error(ErrorKind::Validation, "box extents must be positive");
        if (d.confidence < 0.0 || d.confidence > 1.0) reader.error(ErrorKind::Validation, "confidence outside [0,1]");
        d.source_id = ordinal++;
        video.frames[static_cast<std::size_t>(d.frame)].push_back(std::move(d));
    }
    if (!in_records) {
        if (video.meta.frame_count < 0) reader.error(ErrorKind::Parse, "missing #frame_count header");
        if (video.embedding_dim <= 0) reader.error(ErrorKind::Parse, "missing or non-positive #embedding_dim header");
        video.frames.assign(static_cast<std::size_t>(video.meta.frame_count), {});
    }
    return video;
}

DetectionVideo load_detections(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_detections(in, path.string());
}

void write_detections(std::ostream& out, const DetectionVideo& video) {
    write_meta(out, video.meta, &video.embedding_dim);
    std::string line;
    for (const auto& frame : video.frames) {
        for (const auto& d : frame) {
            line.clear();
            line += std::to_string(d.frame);
            for (double v : {d.box.x, d.box.y, d.box.w, d.box.h, d.confidence}) {
                line += ',';
                line += text::format(v);
            }
            line += ',';
            line += to_string(d.cls);
            for (float v : d.embedding) {
                line += ',';
                line += text::format(v);
            }
            line += '\n';
            out << line;
        }
    }
}

void save_detections(const std::filesystem::path& path, const DetectionVideo& video) {
    auto out = open_output(path);
    write_detections(out, video);
    if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

ConfidencePartition partition_by_confidence(const FrameDetections& frame, const TrackerConfig& config) {
    ConfidencePartition p;
    for (std::size_t i = 0; i < frame.size(); ++i) {
        const double c = frame[i].confidence;
        if (c >= config.tau_high) p.high.push_back(i);
        else if (c >= config.tau_low) p.low.push_back(i);
        else p.discarded.push_back(i);
    }
    return p;
}

LineageForest parse_forest(std::istream& tracks_in, std::istream& entries_in, bool require_contiguous,
                           const std::string& source_name) {
    LineageForest forest;
    forest.meta.frame_count = -1;
    std::map<TrackId, std::pair<int, int>> intervals;

    {
        LineReader reader(tracks_in, source_name + "/" + kTrackTableFile);
        std::string line;
        bool in_records = false;
        while (reader.next(line)) {
            std::string_view view = text::trim(line);
            if (view.front() == '#') {
                if (in_records) reader.error(ErrorKind::Parse, "header line after the first record");
                apply_header(reader, view, forest.meta, nullptr);
                continue;
            }
            if (forest.meta.frame_count < 0) reader.error(ErrorKind::Parse, "missing #frame_count header");
            in_records = true;
            auto f = text::split(view, ',');
            if (f.size() != 5) reader.error(ErrorKind::Parse, "track row must be id,start,end,parent,end_reason");
            long long id = 0, parent = 0;
            int start = 0, end = 0;
            if (!text::parse(f[0], id) || !text::parse(f[1], start) || !text::parse(f[2], end) || !text::parse(f[3], parent)) {
                reader.error(ErrorKind::Parse, "bad integer in track row");
            }
            auto reason = parse_end_reason(text::trim(f[4]));
            if (!reason) reader.error(ErrorKind::Parse, "unknown end_reason '" + std::string(text::trim(f[4])) + "'");
            if (id <= 0) reader.error(ErrorKind::Validation, "track ids must be positive");
            if (start > end) reader.error(ErrorKind::Validation, "track start after end");
            if (start < 0 || end >= forest.meta.frame_count) reader.error(ErrorKind::Validation, "track interval outside the video");
            if (forest.tracks.count(id)) reader.error(ErrorKind::Validation, "overlapping intervals for track id " + std::to_string(id));
            Track t;
            t.id = id;
            if (parent != 0) t.parent = parent;
            t.end_reason = *reason;
            t.status = *reason == EndReason::Division ? TrackStatus::Divided
                       : *reason == EndReason::Death  ? TrackStatus::Dead
                                                      : TrackStatus::Closed;
            forest.tracks.emplace(id, std::move(t));
            intervals[id] = {start, end};
        }
        if (forest.meta.frame_count < 0) reader.error(ErrorKind::Parse, "missing #frame_count header");
    }

    {
        LineReader reader(entries_in, source_name + "/" + kEntriesFile);
        std::string line;
        while (reader.next(line)) {
            std::string_view view = text::trim(line);
            if (view.front() == '#') continue;
            auto f = text::split(view, ',');
            if (f.size() != 8) reader.error(ErrorKind::Parse, "entry row must be track_id,frame,x,y,w,h,class,provenance");
            long long id = 0;
            int frame = 0;
            TrackEntry e;
            if (!text::parse(f[0], id) || !text::parse(f[1], frame)) reader.error(ErrorKind::Parse, "bad integer in entry row");
            double* coords[] = {&e.box.x, &e.box.y, &e.box.w, &e.box.h};
            for (int i = 0; i < 4; ++i) {
                if (!text::parse(f[2 + i], *coords[i])) reader.error(ErrorKind::Parse, "bad box coordinate");
            }
            auto cls = parse_cell_class(text::trim(f[6]));
            auto prov = parse_provenance(text::trim(f[7]));
            if (!cls) reader.error(ErrorKind::Parse, "class must be 'alive' or 'dead'");
            if (!prov) reader.error(ErrorKind::Parse, "unknown provenance");
            e.cls = *cls;
            e.provenance = *prov;
            auto it = forest.tracks.find(id);
            if (it == forest.tracks.end()) reader.error(ErrorKind::Validation, "entry for unknown track " + std::to_string(id));
            auto [start, end] = intervals[id];
            if (frame < start || frame > end) reader.error(ErrorKind::Validation, "entry outside its track interval");
            if (!(e.box.w > 0.0) || !(e.box.h > 0.0)) reader.error(ErrorKind::Validation, "box extents must be positive");
            if (!it->second.entries.emplace(frame, std::move(e)).second) {
                reader.error(ErrorKind::Validation, "overlapping intervals: duplicate frame for track " + std::to_string(id));
            }
        }
    }

    for (auto& [id, t] : forest.tracks) {
        auto [start, end] = intervals[id];
        if (t.empty() || t.start_frame() != start || t.last_frame() != end) {
            fail(ErrorKind::Validation, source_name + ": track " + std::to_string(id) + " entries do not cover its interval");
        }
        t.cls = t.entries.rbegin()->second.cls;
        if (t.parent) {
            auto p = forest.tracks.find(*t.parent);
            if (p == forest.tracks.end()) {
                fail(ErrorKind::Validation, source_name + ": track " + std::to_string(id) + " has dangling parent id " +
                                                std::to_string(*t.parent));
            }
            p->second.children.push_back(id);
        }
    }
    try {
        forest.validate(require_contiguous);
    } catch (const Error& e) {
        fail(e.kind(), source_name + ": " + e.what());
    }
    return forest;
}

LineageForest load_forest(const std::filesystem::path& dir, bool require_contiguous) {
    auto tracks = open_input(dir / kTrackTableFile);
    auto entries = open_input(dir / kEntriesFile);
    return parse_forest(tracks, entries, require_contiguous, dir.string());
}

LineageForest load_ground_truth(const std::filesystem::path& dir) { return load_forest(dir, true); }

void write_track_table(std::ostream& out, const LineageForest& forest) {
    write_meta(out, forest.meta, nullptr);
    for (const auto& [id, t] : forest.tracks) {
        out << id << ',' << t.start_frame() << ',' << t.last_frame() << ',' << t.parent.value_or(0) << ','
            << to_string(t.end_reason) << '\n';
    }
}

void write_entries(std::ostream& out, const LineageForest& forest) {
    std::string line;
    for (const auto& [id, t] : forest.tracks) {
        for (const auto& [frame, e] : t.entries) {
            line.clear();
            line += std::to_string(id);
            line += ',';
            line += std::to_string(frame);
            for (double v : {e.box.x, e.box.y, e.box.w, e.box.h}) {
                line += ',';
                line += text::format(v);
            }
            line += ',';
            line += to_string(e.cls);
            line += ',';
            line += to_string(e.provenance);
            line += '\n';
            out << line;
        }
    }
}

void save_forest(const std::filesystem::path& dir, const LineageForest& forest) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
    auto tracks = open_output(dir / kTrackTableFile);
    write_track_table(tracks, forest);
    auto entries = open_output(dir / kEntriesFile);
    write_entries(entries, forest);
    if (!tracks || !entries) fail(ErrorKind::Io, "write failed under " + dir.string());
}

}  // namespace celltrack
