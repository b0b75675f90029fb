// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 celltrack contributors

#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <tuple>

namespace celltrack::oracle {

namespace {

struct Node {
    TrackId track;
    int frame;
    Box box;
};

struct Edge {
    std::size_t from, to;
    bool parent;
};

struct Graph {
    int frames = 0;
    std::vector<Node> nodes;
    std::vector<Edge> edges;
    std::map<std::pair<TrackId, int>, std::size_t> index;

    std::vector<std::size_t> at_frame(int f) const {
        std::vector<std::size_t> out;
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            if (nodes[k].frame == f) out.push_back(k);
        }
        return out;
    }
};

Graph graph_of(const LineageForest& forest) {
    Graph g;
    g.frames = forest.meta.frame_count;
    for (const auto& [id, t] : forest.tracks) {
        for (const auto& [frame, e] : t.entries) {
            g.index[{id, frame}] = g.nodes.size();
            g.nodes.push_back({id, frame, e.box});
        }
    }
    for (const auto& [id, t] : forest.tracks) {
        for (auto it = t.entries.begin(); std::next(it) != t.entries.end(); ++it) {
            g.edges.push_back({g.index.at({id, it->first}), g.index.at({id, std::next(it)->first}), false});
        }
        if (t.parent) {
            const Track& m = forest.tracks.at(*t.parent);
            g.edges.push_back({g.index.at({m.id, m.last_frame()}), g.index.at({id, t.start_frame()}), true});
        }
    }
    return g;
}

std::vector<Box> boxes_of(const Graph& g, const std::vector<std::size_t>& idx) {
    std::vector<Box> out;
    for (std::size_t k : idx) out.push_back(g.nodes[k].box);
    return out;
}

double overlap_1d(double a0, double a1, double b0, double b1) { return std::max(0.0, std::min(a1, b1) - std::max(a0, b0)); }

double inter(const Box& a, const Box& b) {
    return overlap_1d(a.x, a.x + a.w, b.x, b.x + b.w) * overlap_1d(a.y, a.y + a.h, b.y, b.y + b.h);
}

bool centre_inside(const Box& outer, const Box& inner) {
    const double cx = inner.x + inner.w / 2.0, cy = inner.y + inner.h / 2.0;
    return cx >= outer.x && cx <= outer.x + outer.w && cy >= outer.y && cy <= outer.y + outer.h;
}

// Node correspondence gt node -> pred node.
std::vector<std::optional<std::size_t>> ctc_node_map(const Graph& pred, const Graph& gt) {
    std::vector<std::optional<std::size_t>> out(gt.nodes.size());
    for (int f = 0; f < gt.frames; ++f) {
        const auto gi = gt.at_frame(f), pi = pred.at_frame(f);
        const auto local = ctc_match(boxes_of(gt, gi), boxes_of(pred, pi));
        for (std::size_t k = 0; k < gi.size(); ++k) {
            if (local[k]) out[gi[k]] = pi[*local[k]];
        }
    }
    return out;
}

double score(double penalty, double empty) {
    if (empty == 0.0) return penalty == 0.0 ? 1.0 : 0.0;
    return 1.0 - std::min(penalty, empty) / empty;
}

std::map<TrackId, long long> track_sizes(const Graph& g) {
    std::map<TrackId, long long> out;
    for (const auto& n : g.nodes) ++out[n.track];
    return out;
}

// Per frame: matched (gt node, pred node, iou).
std::vector<std::tuple<std::size_t, std::size_t, double>> mot_pairs(const Graph& pred, const Graph& gt, int f,
                                                                   double alpha) {
    const auto gi = gt.at_frame(f), pi = pred.at_frame(f);
    const auto gb = boxes_of(gt, gi), pb = boxes_of(pred, pi);
    std::vector<std::tuple<std::size_t, std::size_t, double>> out;
    for (const auto& [a, b] : mot_match(gb, pb, alpha)) out.emplace_back(gi[a], pi[b], box_iou(gb[a], pb[b]));
    return out;
}

}  // namespace

double box_iou(const Box& a, const Box& b) {
    const double i = inter(a, b);
    const double u = a.w * a.h + b.w * b.h - i;
    return u > 0.0 ? i / u : 0.0;
}

std::vector<std::optional<std::size_t>> ctc_match(const std::vector<Box>& gt, const std::vector<Box>& pred) {
    std::vector<std::optional<std::size_t>> out(gt.size());
    for (std::size_t i = 0; i < gt.size(); ++i) {
        double best_i = -1.0, best_u = -1.0;
        for (std::size_t j = 0; j < pred.size(); ++j) {
            if (!centre_inside(pred[j], gt[i])) continue;
            const double a = inter(gt[i], pred[j]), u = box_iou(gt[i], pred[j]);
            if (a > best_i || (a == best_i && u > best_u)) {
                out[i] = j;
                best_i = a;
                best_u = u;
            }
        }
    }
    return out;
}

AOGMCounts aogm(const LineageForest& pred_forest, const LineageForest& gt_forest, const AOGMWeights& w) {
    const Graph pred = graph_of(pred_forest), gt = graph_of(gt_forest);
    const auto map = ctc_node_map(pred, gt);
    AOGMCounts c;
    c.gt_nodes = static_cast<long long>(gt.nodes.size());
    c.gt_edges = static_cast<long long>(gt.edges.size());
    std::vector<long long> hits(pred.nodes.size(), 0);
    for (const auto& m : map) {
        if (m) ++hits[*m];
        else ++c.fn;
    }
    for (long long h : hits) {
        if (h == 0) ++c.fp;
        if (h > 1) c.ns += h - 1;
    }

    // A GT edge can only be paired with the predicted edge joining the images
    // of its endpoints, so each predicted edge owns a disjoint set of
    // candidates and the total cost splits into independent per-edge terms.
    // Every option of every term is enumerated.
    std::vector<bool> gt_used(gt.edges.size(), false);
    for (const auto& pe : pred.edges) {
        std::vector<std::size_t> cand;
        for (std::size_t k = 0; k < gt.edges.size(); ++k) {
            const auto& ge = gt.edges[k];
            if (map[ge.from] == pe.from && map[ge.to] == pe.to) cand.push_back(k);
        }
        // Option "unpaired": ED for the predicted edge, EA for each candidate.
        double best = w.ed + w.ea * static_cast<double>(cand.size());
        std::optional<std::size_t> pick;
        for (std::size_t k : cand) {
            const bool change = gt.edges[k].parent != pe.parent;
            const double cost = (change ? w.ec : 0.0) + w.ea * static_cast<double>(cand.size() - 1);
            if (cost < best) {
                best = cost;
                pick = k;
            }
        }
        if (!pick) {
            ++c.ed;
            continue;
        }
        gt_used[*pick] = true;
        if (gt.edges[*pick].parent != pe.parent) ++c.ec;
    }
    for (bool u : gt_used) {
        if (!u) ++c.ea;
    }
    return c;
}

double aogm_penalty(const LineageForest& pred, const LineageForest& gt, const AOGMWeights& w) {
    const auto c = aogm(pred, gt, w);
    return w.ns * c.ns + w.fn * c.fn + w.fp * c.fp + w.ed * c.ed + w.ea * c.ea + w.ec * c.ec;
}

CtcScores det_lnk_tra(const LineageForest& pred, const LineageForest& gt, const AOGMWeights& w) {
    LineageForest empty;
    empty.meta = gt.meta;
    const auto c = aogm(pred, gt, w);
    const auto e = aogm(empty, gt, w);
    auto nodes = [&](const AOGMCounts& k) { return w.ns * k.ns + w.fn * k.fn + w.fp * k.fp; };
    auto edges = [&](const AOGMCounts& k) { return w.ed * k.ed + w.ea * k.ea + w.ec * k.ec; };
    CtcScores s;
    s.counts = c;
    s.det = score(nodes(c), nodes(e));
    s.lnk = score(edges(c), edges(e));
    s.tra = score(nodes(c) + edges(c), nodes(e) + edges(e));
    return s;
}

std::vector<std::pair<std::size_t, std::size_t>> mot_match(const std::vector<Box>& gt, const std::vector<Box>& pred,
                                                           double alpha) {
    std::vector<std::pair<std::size_t, std::size_t>> best, cur;
    double best_sum = -1.0;
    std::vector<bool> used(pred.size(), false);
    std::function<void(std::size_t, double)> go = [&](std::size_t i, double sum) {
        if (i == gt.size()) {
            if (sum > best_sum) {
                best_sum = sum;
                best = cur;
            }
            return;
        }
        go(i + 1, sum);
        for (std::size_t j = 0; j < pred.size(); ++j) {
            if (used[j]) continue;
            const double u = box_iou(gt[i], pred[j]);
            if (u < alpha || u <= 0.0) continue;
            used[j] = true;
            cur.emplace_back(i, j);
            go(i + 1, sum + u);
            cur.pop_back();
            used[j] = false;
        }
    };
    go(0, 0.0);
    return best;
}

HotaResult hota(const LineageForest& pred_forest, const LineageForest& gt_forest, std::span<const double> alphas) {
    const Graph pred = graph_of(pred_forest), gt = graph_of(gt_forest);
    const auto gsize = track_sizes(gt), psize = track_sizes(pred);
    HotaResult r;
    r.alphas.assign(alphas.begin(), alphas.end());
    for (double alpha : alphas) {
        std::vector<std::pair<TrackId, TrackId>> tps;
        for (int f = 0; f < gt.frames; ++f) {
            for (const auto& [g, p, u] : mot_pairs(pred, gt, f, alpha)) {
                tps.emplace_back(gt.nodes[g].track, pred.nodes[p].track);
            }
        }
        const double tp = static_cast<double>(tps.size());
        const double fn = static_cast<double>(gt.nodes.size()) - tp;
        const double fp = static_cast<double>(pred.nodes.size()) - tp;
        const double det_a = tp + fn + fp > 0 ? tp / (tp + fn + fp) : 0.0;
        double ass_a = 0.0;
        for (const auto& c : tps) {
            const double tpa = static_cast<double>(std::count(tps.begin(), tps.end(), c));
            const double fna = static_cast<double>(gsize.at(c.first)) - tpa;
            const double fpa = static_cast<double>(psize.at(c.second)) - tpa;
            ass_a += tpa / (tpa + fna + fpa);
        }
        if (!tps.empty()) ass_a /= tp;
        r.det_a_curve.push_back(det_a);
        r.ass_a_curve.push_back(ass_a);
        r.hota_curve.push_back(std::sqrt(det_a * ass_a));
    }
    const double n = static_cast<double>(alphas.size());
    for (std::size_t k = 0; k < alphas.size(); ++k) {
        r.hota += r.hota_curve[k] / n;
        r.det_a += r.det_a_curve[k] / n;
        r.ass_a += r.ass_a_curve[k] / n;
    }
    return r;
}

ClearMotCounts clear_mot(const LineageForest& pred_forest, const LineageForest& gt_forest, double alpha) {
    const Graph pred = graph_of(pred_forest), gt = graph_of(gt_forest);
    ClearMotCounts c;
    c.gt_detections = static_cast<long long>(gt.nodes.size());
    c.pred_detections = static_cast<long long>(pred.nodes.size());
    std::map<TrackId, TrackId> previous;
    for (int f = 0; f < gt.frames; ++f) {
        for (const auto& [g, p, u] : mot_pairs(pred, gt, f, alpha)) {
            ++c.matches;
            c.iou_sum += u;
            const TrackId gid = gt.nodes[g].track, pid = pred.nodes[p].track;
            if (previous.count(gid) && previous[gid] != pid) ++c.idsw;
            previous[gid] = pid;
        }
    }
    c.fn = c.gt_detections - c.matches;
    c.fp = c.pred_detections - c.matches;
    return c;
}

double mota(const LineageForest& pred, const LineageForest& gt, double alpha) {
    const auto c = clear_mot(pred, gt, alpha);
    return 1.0 - static_cast<double>(c.fn + c.fp + c.idsw) / static_cast<double>(c.gt_detections);
}

std::optional<double> motp(const LineageForest& pred, const LineageForest& gt, double alpha) {
    const auto c = clear_mot(pred, gt, alpha);
    if (c.matches == 0) return std::nullopt;
    return c.iou_sum / static_cast<double>(c.matches);
}

IdentityCounts identity(const LineageForest& pred, const LineageForest& gt, double alpha) {
    std::vector<const Track*> gts, preds;
    for (const auto& [id, t] : gt.tracks) gts.push_back(&t);
    for (const auto& [id, t] : pred.tracks) preds.push_back(&t);
    auto overlap = [&](const Track& g, const Track& p) {
        long long n = 0;
        for (const auto& [frame, e] : g.entries) {
            auto it = p.entries.find(frame);
            if (it != p.entries.end() && box_iou(e.box, it->second.box) >= alpha) ++n;
        }
        return n;
    };
    long long best = 0;
    std::vector<bool> used(preds.size(), false);
    std::function<void(std::size_t, long long)> go = [&](std::size_t i, long long sum) {
        if (i == gts.size()) {
            best = std::max(best, sum);
            return;
        }
        go(i + 1, sum);
        for (std::size_t j = 0; j < preds.size(); ++j) {
            if (used[j]) continue;
            used[j] = true;
            go(i + 1, sum + overlap(*gts[i], *preds[j]));
            used[j] = false;
        }
    };
    go(0, 0);
    long long gn = 0, pn = 0;
    for (const auto* t : gts) gn += static_cast<long long>(t->entries.size());
    for (const auto* t : preds) pn += static_cast<long long>(t->entries.size());
    return {best, pn - best, gn - best};
}

double idf1(const LineageForest& pred, const LineageForest& gt, double alpha) {
    const auto c = identity(pred, gt, alpha);
    return 2.0 * static_cast<double>(c.idtp) / static_cast<double>(2 * c.idtp + c.idfp + c.idfn);
}

Assignment greedy_lexmin(std::span<const CandidatePair> candidates, int capacity) {
    using Key = std::tuple<double, TrackId, std::size_t>;
    const std::size_t n = candidates.size();
    std::optional<std::vector<Key>> best;
    auto feasible = [&](std::uint64_t mask) {
        std::map<TrackId, int> load;
        std::set<std::size_t> dets;
        for (std::size_t k = 0; k < n; ++k) {
            if (!(mask >> k & 1U)) continue;
            if (!dets.insert(candidates[k].detection).second) return false;
            if (++load[candidates[k].track] > capacity) return false;
        }
        return true;
    };
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        if (!feasible(mask)) continue;
        bool maximal = true;
        for (std::size_t k = 0; k < n && maximal; ++k) {
            if (!(mask >> k & 1U) && feasible(mask | std::uint64_t{1} << k)) maximal = false;
        }
        if (!maximal) continue;
        std::vector<Key> keys;
        for (std::size_t k = 0; k < n; ++k) {
            if (mask >> k & 1U) keys.emplace_back(candidates[k].cost, candidates[k].track, candidates[k].detection);
        }
        std::sort(keys.begin(), keys.end());
        if (!best || keys < *best) best = keys;
    }
    Assignment out;
    if (!best) return out;
    for (const auto& [cost, track, det] : *best) out[track].push_back(det);
    return out;
}

}  // namespace celltrack::oracle
