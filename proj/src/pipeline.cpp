// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 celltrack contributors

#include "celltrack/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include "celltrack/association.hpp"
#include "celltrack/error.hpp"
#include "celltrack/text.hpp"

namespace celltrack {

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::vector<CorpusVideo> load_corpus(const std::filesystem::path& dir, const std::string& detection_file,
                                     int workers) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) fail(ErrorKind::Io, "corpus directory '" + dir.string() + "' does not exist");
    std::vector<fs::path> videos;
    auto is_video = [&](const fs::path& p) { return fs::is_directory(p / "gt") && fs::exists(p / detection_file); };
    if (is_video(dir)) {
        videos.push_back(dir);
    } else {
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.is_directory() && is_video(entry.path())) videos.push_back(entry.path());
        }
        std::sort(videos.begin(), videos.end());
    }
    if (videos.empty()) {
        fail(ErrorKind::Io, "corpus '" + dir.string() + "' holds no video (expected gt/ and " + detection_file + ")");
    }
    std::vector<CorpusVideo> out(videos.size());
    parallel_for(videos.size(), workers, [&](std::size_t i) {
        out[i].name = videos[i].filename().string();
        out[i].detections = load_detections(videos[i] / detection_file);
        out[i].ground_truth = load_ground_truth(videos[i] / "gt");
    });
    return out;
}

std::vector<AblationVariant> ablation_variants(const TrackerConfig& base, int max_memory) {
    std::vector<AblationVariant> out;
    auto variant = [&](std::string name, bool low, bool kalman) {
        TrackerConfig c = base;
        c.use_low_confidence = low;
        c.use_kalman = kalman;
        out.push_back({std::move(name), c});
    };
    variant("full", true, true);
    variant("no-low-conf", false, true);
    variant("no-kalman", true, false);
    variant("neither", false, false);
    for (int n = 0; n <= max_memory; ++n) {
        TrackerConfig c = base;
        c.memory_frames = n;
        out.push_back({"memory=" + std::to_string(n), c});
    }
    return out;
}

double AblationRow::mean(const std::vector<double>& v) const {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double AblationRow::stddev(const std::vector<double>& v) const {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

CtcScores track_and_score(const CorpusVideo& video, TrackerConfig config, const AOGMWeights& weights) {
    config.embedding_dim = video.detections.embedding_dim;
    const LineageForest pred = track_video(video.detections, config);
    return det_lnk_tra(build_tracking_graph(pred), build_tracking_graph(video.ground_truth), weights);
}

std::vector<AblationRow> run_ablation(const std::vector<CorpusVideo>& corpus,
                                      const std::vector<AblationVariant>& variants, const AOGMWeights& weights,
                                      int workers) {
    const std::size_t nv = corpus.size();
    std::vector<CtcScores> scores(variants.size() * nv);
    parallel_for(scores.size(), workers, [&](std::size_t job) {
        scores[job] = track_and_score(corpus[job % nv], variants[job / nv].config, weights);
    });
    std::vector<AblationRow> rows;
    for (std::size_t v = 0; v < variants.size(); ++v) {
        AblationRow row;
        row.name = variants[v].name;
        for (std::size_t i = 0; i < nv; ++i) {
            const auto& s = scores[v * nv + i];
            row.det.push_back(s.det);
            row.lnk.push_back(s.lnk);
            row.tra.push_back(s.tra);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_ablation_csv(std::ostream& out, const std::vector<AblationRow>& rows) {
    out << "config,videos,det_mean,det_std,lnk_mean,lnk_std,tra_mean,tra_std\n";
    for (const auto& r : rows) {
        out << r.name << ',' << r.tra.size() << ',' << text::format(r.mean(r.det)) << ','
            << text::format(r.stddev(r.det)) << ',' << text::format(r.mean(r.lnk)) << ','
            << text::format(r.stddev(r.lnk)) << ',' << text::format(r.mean(r.tra)) << ','
            << text::format(r.stddev(r.tra)) << '\n';
    }
}

}  // namespace celltrack
