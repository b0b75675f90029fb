// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 celltrack contributors

#include "celltrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include <json.hpp>

#include "celltrack/assignment.hpp"
#include "celltrack/error.hpp"
#include "celltrack/text.hpp"

namespace celltrack {

namespace {

struct Overlap {
    std::size_t gt = 0;
    std::size_t pred = 0;
    double intersection = 0.0;
    double iou = 0.0;
};

// All (gt, pred) pairs with positive intersection, via an x-sorted sweep.
std::vector<Overlap> overlapping_pairs(std::span<const Box> gt, std::span<const Box> pred) {
    std::vector<Overlap> out;
    if (gt.empty() || pred.empty()) return out;
    std::vector<std::size_t> order(pred.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pred[a].x < pred[b].x; });
    double max_w = 0.0;
    for (const auto& b : pred) max_w = std::max(max_w, b.w);
    for (std::size_t i = 0; i < gt.size(); ++i) {
        const Box& g = gt[i];
        auto lo = std::lower_bound(order.begin(), order.end(), g.x - max_w,
                                   [&](std::size_t idx, double v) { return pred[idx].x < v; });
        for (auto it = lo; it != order.end() && pred[*it].x < g.x + g.w; ++it) {
            const double inter = intersection_area(g, pred[*it]);
            if (inter > 0.0) out.push_back({i, *it, inter, iou(g, pred[*it])});
        }
    }
    std::sort(out.begin(), out.end(), [](const Overlap& a, const Overlap& b) {
        return std::tie(a.gt, a.pred) < std::tie(b.gt, b.pred);
    });
    return out;
}

std::vector<Box> frame_boxes(const TrackingGraph& g, int frame) {
    std::vector<Box> out;
    for (std::size_t n : g.frame_nodes[static_cast<std::size_t>(frame)]) out.push_back(g.nodes[n].box);
    return out;
}

long long pair_key(long long a, long long b) { return (a << 32) ^ b; }

double normalized_score(double penalty, double empty_penalty) {
    if (empty_penalty <= 0.0) return penalty <= 0.0 ? 1.0 : 0.0;
    return 1.0 - std::min(penalty, empty_penalty) / empty_penalty;
}

void require_same_range(const TrackingGraph& pred, const TrackingGraph& gt) {
    if (pred.frame_count != gt.frame_count) {
        fail(ErrorKind::Validation, "frame-range mismatch: prediction has " + std::to_string(pred.frame_count) +
                                        " frames, ground truth " + std::to_string(gt.frame_count));
    }
}

// Per-frame MOT matches: (gt node, pred node, iou) in global node indices.
struct FrameMatch {
    std::size_t gt_node, pred_node;
    double iou;
};

std::vector<std::vector<Overlap>> all_frame_overlaps(const TrackingGraph& pred, const TrackingGraph& gt) {
    std::vector<std::vector<Overlap>> out(static_cast<std::size_t>(gt.frame_count));
    for (int f = 0; f < gt.frame_count; ++f) {
        out[static_cast<std::size_t>(f)] = overlapping_pairs(frame_boxes(gt, f), frame_boxes(pred, f));
    }
    return out;
}

std::vector<FrameMatch> frame_matches(const TrackingGraph& pred, const TrackingGraph& gt, int frame,
                                      const std::vector<Overlap>& overlaps, double alpha) {
    std::vector<WeightedPair> pairs;
    for (const auto& o : overlaps) {
        if (o.iou >= alpha) pairs.push_back({o.gt, o.pred, o.iou});
    }
    std::vector<FrameMatch> out;
    const auto& gn = gt.frame_nodes[static_cast<std::size_t>(frame)];
    const auto& pn = pred.frame_nodes[static_cast<std::size_t>(frame)];
    for (const auto& m : max_weight_matching(pairs)) out.push_back({gn[m.row], pn[m.col], m.weight});
    return out;
}

std::unordered_map<TrackId, long long> detections_per_track(const TrackingGraph& g) {
    std::unordered_map<TrackId, long long> out;
    for (const auto& n : g.nodes) ++out[n.track];
    return out;
}

}  // namespace

TrackingGraph build_tracking_graph(const LineageForest& forest) {
    TrackingGraph g;
    g.frame_count = forest.meta.frame_count;
    g.frame_nodes.assign(static_cast<std::size_t>(std::max(0, g.frame_count)), {});
    std::unordered_map<TrackId, std::pair<std::size_t, std::size_t>> ends;  // first, last node
    for (const auto& [id, t] : forest.tracks) {
        std::optional<std::size_t> prev;
        for (const auto& [frame, e] : t.entries) {
            const std::size_t idx = g.nodes.size();
            g.nodes.push_back({frame, id, e.box});
            if (frame >= 0 && frame < g.frame_count) g.frame_nodes[static_cast<std::size_t>(frame)].push_back(idx);
            if (prev) g.edges.push_back({*prev, idx, EdgeKind::Link});
            else ends[id].first = idx;
            prev = idx;
        }
        if (prev) ends[id].second = *prev;
    }
    for (const auto& [id, t] : forest.tracks) {
        if (!t.parent || t.empty()) continue;
        auto p = ends.find(*t.parent);
        if (p == ends.end()) continue;
        g.edges.push_back({p->second.second, ends.at(id).first, EdgeKind::Parent});
    }
    return g;
}

std::vector<std::optional<std::size_t>> match_frame_objects_ctc(std::span<const Box> gt, std::span<const Box> pred) {
    std::vector<std::optional<std::size_t>> out(gt.size());
    std::vector<double> best_inter(gt.size(), 0.0), best_iou(gt.size(), 0.0);
    for (const auto& o : overlapping_pairs(gt, pred)) {
        if (!pred[o.pred].contains(centroid(gt[o.gt]))) continue;
        auto& cur = out[o.gt];
        const bool better = !cur || o.intersection > best_inter[o.gt] ||
                            (o.intersection == best_inter[o.gt] &&
                             (o.iou > best_iou[o.gt] || (o.iou == best_iou[o.gt] && o.pred < *cur)));
        if (better) {
            cur = o.pred;
            best_inter[o.gt] = o.intersection;
            best_iou[o.gt] = o.iou;
        }
    }
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> match_frame_objects_iou(std::span<const Box> gt,
                                                                         std::span<const Box> pred, double alpha) {
    std::vector<WeightedPair> pairs;
    for (const auto& o : overlapping_pairs(gt, pred)) {
        if (o.iou >= alpha) pairs.push_back({o.gt, o.pred, o.iou});
    }
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const auto& m : max_weight_matching(pairs)) out.emplace_back(m.row, m.col);
    return out;
}

AOGMCounts aogm_counts(const TrackingGraph& pred, const TrackingGraph& gt) {
    require_same_range(pred, gt);
    AOGMCounts c;
    c.gt_nodes = static_cast<long long>(gt.nodes.size());
    c.gt_edges = static_cast<long long>(gt.edges.size());

    std::vector<std::optional<std::size_t>> gt_to_pred(gt.nodes.size());
    std::vector<int> hits(pred.nodes.size(), 0);
    for (int f = 0; f < gt.frame_count; ++f) {
        const auto& gn = gt.frame_nodes[static_cast<std::size_t>(f)];
        const auto& pn = pred.frame_nodes[static_cast<std::size_t>(f)];
        const auto local = match_frame_objects_ctc(frame_boxes(gt, f), frame_boxes(pred, f));
        for (std::size_t i = 0; i < gn.size(); ++i) {
            if (!local[i]) continue;
            gt_to_pred[gn[i]] = pn[*local[i]];
            ++hits[pn[*local[i]]];
        }
    }
    for (const auto& m : gt_to_pred) {
        if (!m) ++c.fn;
    }
    for (int h : hits) {
        if (h == 0) ++c.fp;
        else c.ns += h - 1;
    }

    // GT edges grouped by the predicted node pair they map onto.
    std::unordered_map<long long, std::vector<std::size_t>> groups;
    long long unmapped = 0;
    for (std::size_t k = 0; k < gt.edges.size(); ++k) {
        const auto& e = gt.edges[k];
        const auto& a = gt_to_pred[e.from];
        const auto& b = gt_to_pred[e.to];
        if (!a || !b) {
            ++unmapped;
            continue;
        }
        groups[pair_key(static_cast<long long>(*a), static_cast<long long>(*b))].push_back(k);
    }
    long long covered_groups_size = 0;
    for (const auto& e : pred.edges) {
        auto it = groups.find(pair_key(static_cast<long long>(e.from), static_cast<long long>(e.to)));
        if (it == groups.end()) {
            ++c.ed;
            continue;
        }
        const auto& members = it->second;
        const bool same_kind = std::any_of(members.begin(), members.end(),
                                           [&](std::size_t k) { return gt.edges[k].kind == e.kind; });
        if (!same_kind) ++c.ec;
        c.ea += static_cast<long long>(members.size()) - 1;
        covered_groups_size += static_cast<long long>(members.size());
    }
    long long grouped = 0;
    for (const auto& [key, members] : groups) grouped += static_cast<long long>(members.size());
    c.ea += unmapped + (grouped - covered_groups_size);
    return c;
}

double aogm_penalty(const TrackingGraph& pred, const TrackingGraph& gt, const AOGMWeights& weights) {
    const auto c = aogm_counts(pred, gt);
    return c.node_penalty(weights) + c.edge_penalty(weights);
}

CtcScores det_lnk_tra(const TrackingGraph& pred, const TrackingGraph& gt, const AOGMWeights& weights) {
    if (gt.nodes.empty()) fail(ErrorKind::Undefined, "ground truth is empty; DET/LNK/TRA undefined");
    CtcScores s;
    s.counts = aogm_counts(pred, gt);
    const double empty_nodes = weights.fn * static_cast<double>(s.counts.gt_nodes);
    const double empty_edges = weights.ea * static_cast<double>(s.counts.gt_edges);
    const double node_pen = s.counts.node_penalty(weights);
    const double edge_pen = s.counts.edge_penalty(weights);
    s.det = normalized_score(node_pen, empty_nodes);
    s.lnk = normalized_score(edge_pen, empty_edges);
    s.tra = normalized_score(node_pen + edge_pen, empty_nodes + empty_edges);
    return s;
}

std::vector<double> default_hota_alphas() {
    std::vector<double> a;
    for (int k = 1; k <= 19; ++k) a.push_back(k / 20.0);
    return a;
}

HotaResult hota(const TrackingGraph& pred, const TrackingGraph& gt, std::span<const double> alphas) {
    require_same_range(pred, gt);
    if (gt.nodes.empty()) fail(ErrorKind::Undefined, "ground truth is empty; HOTA undefined");
    HotaResult r;
    r.alphas.assign(alphas.begin(), alphas.end());
    const auto overlaps = all_frame_overlaps(pred, gt);
    const auto gt_sizes = detections_per_track(gt);
    const auto pred_sizes = detections_per_track(pred);
    const double gt_total = static_cast<double>(gt.nodes.size());
    const double pred_total = static_cast<double>(pred.nodes.size());
    for (double alpha : alphas) {
        std::unordered_map<long long, long long> pair_tp;
        long long tp = 0;
        for (int f = 0; f < gt.frame_count; ++f) {
            for (const auto& m : frame_matches(pred, gt, f, overlaps[static_cast<std::size_t>(f)], alpha)) {
                ++pair_tp[pair_key(gt.nodes[m.gt_node].track, pred.nodes[m.pred_node].track)];
                ++tp;
            }
        }
        const double dtp = static_cast<double>(tp);
        const double det_a = dtp / (gt_total + pred_total - dtp);
        double ass_a = 0.0;
        if (tp > 0) {
            std::vector<std::pair<long long, long long>> keyed(pair_tp.begin(), pair_tp.end());
            std::sort(keyed.begin(), keyed.end());  // fixed summation order
            double sum = 0.0;
            for (const auto& [key, n] : keyed) {
                const TrackId g = key >> 32;
                const TrackId p = key & 0xffffffffLL;
                const double dn = static_cast<double>(n);
                const double denom = static_cast<double>(gt_sizes.at(g) + pred_sizes.at(p)) - dn;
                sum += dn * dn / denom;
            }
            ass_a = sum / dtp;
        }
        r.det_a_curve.push_back(det_a);
        r.ass_a_curve.push_back(ass_a);
        r.hota_curve.push_back(std::sqrt(det_a * ass_a));
    }
    auto mean = [](const std::vector<double>& v) {
        return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    r.hota = mean(r.hota_curve);
    r.det_a = mean(r.det_a_curve);
    r.ass_a = mean(r.ass_a_curve);
    return r;
}

ClearMotCounts clear_mot_counts(const TrackingGraph& pred, const TrackingGraph& gt, double alpha) {
    require_same_range(pred, gt);
    ClearMotCounts c;
    c.gt_detections = static_cast<long long>(gt.nodes.size());
    c.pred_detections = static_cast<long long>(pred.nodes.size());
    std::unordered_map<TrackId, TrackId> last_match;
    for (int f = 0; f < gt.frame_count; ++f) {
        const auto overlaps = overlapping_pairs(frame_boxes(gt, f), frame_boxes(pred, f));
        for (const auto& m : frame_matches(pred, gt, f, overlaps, alpha)) {
            ++c.matches;
            c.iou_sum += m.iou;
            const TrackId g = gt.nodes[m.gt_node].track;
            const TrackId p = pred.nodes[m.pred_node].track;
            auto it = last_match.find(g);
            if (it != last_match.end() && it->second != p) ++c.idsw;
            last_match[g] = p;
        }
    }
    c.fn = c.gt_detections - c.matches;
    c.fp = c.pred_detections - c.matches;
    return c;
}

double mota(const TrackingGraph& pred, const TrackingGraph& gt, double alpha) {
    if (gt.nodes.empty()) fail(ErrorKind::Undefined, "ground truth is empty; MOTA undefined");
    const auto c = clear_mot_counts(pred, gt, alpha);
    return 1.0 - static_cast<double>(c.fn + c.fp + c.idsw) / static_cast<double>(c.gt_detections);
}

double motp(const TrackingGraph& pred, const TrackingGraph& gt, double alpha) {
    const auto c = clear_mot_counts(pred, gt, alpha);
    if (c.matches == 0) fail(ErrorKind::Undefined, "no matched detections; MOTP undefined");
    return c.iou_sum / static_cast<double>(c.matches);
}

IdentityCounts identity_counts(const TrackingGraph& pred, const TrackingGraph& gt, double alpha) {
    require_same_range(pred, gt);
    std::map<TrackId, std::size_t> gt_index, pred_index;
    for (const auto& n : gt.nodes) gt_index.emplace(n.track, 0);
    for (const auto& n : pred.nodes) pred_index.emplace(n.track, 0);
    std::size_t k = 0;
    for (auto& [id, idx] : gt_index) idx = k++;
    k = 0;
    for (auto& [id, idx] : pred_index) idx = k++;

    std::map<std::pair<std::size_t, std::size_t>, long long> cooccur;
    for (int f = 0; f < gt.frame_count; ++f) {
        const auto& gn = gt.frame_nodes[static_cast<std::size_t>(f)];
        const auto& pn = pred.frame_nodes[static_cast<std::size_t>(f)];
        for (const auto& o : overlapping_pairs(frame_boxes(gt, f), frame_boxes(pred, f))) {
            if (o.iou < alpha) continue;
            ++cooccur[{gt_index.at(gt.nodes[gn[o.gt]].track), pred_index.at(pred.nodes[pn[o.pred]].track)}];
        }
    }
    std::vector<WeightedPair> pairs;
    for (const auto& [key, n] : cooccur) pairs.push_back({key.first, key.second, static_cast<double>(n)});
    IdentityCounts c;
    for (const auto& m : max_weight_matching(pairs)) c.idtp += static_cast<long long>(std::llround(m.weight));
    c.idfn = static_cast<long long>(gt.nodes.size()) - c.idtp;
    c.idfp = static_cast<long long>(pred.nodes.size()) - c.idtp;
    return c;
}

double idf1(const TrackingGraph& pred, const TrackingGraph& gt, double alpha) {
    if (gt.nodes.empty()) fail(ErrorKind::Undefined, "ground truth is empty; IDF1 undefined");
    const auto c = identity_counts(pred, gt, alpha);
    return 2.0 * static_cast<double>(c.idtp) / static_cast<double>(2 * c.idtp + c.idfp + c.idfn);
}

MetricReport evaluate(const LineageForest& pred, const LineageForest& gt, const AOGMWeights& weights) {
    if (pred.meta.frame_count != gt.meta.frame_count) {
        fail(ErrorKind::Validation, "frame-range mismatch: prediction has " + std::to_string(pred.meta.frame_count) +
                                        " frames, ground truth " + std::to_string(gt.meta.frame_count));
    }
    const TrackingGraph pg = build_tracking_graph(pred);
    const TrackingGraph gg = build_tracking_graph(gt);
    if (gg.nodes.empty()) fail(ErrorKind::Undefined, "ground truth is empty");
    MetricReport r;
    const auto ctc = det_lnk_tra(pg, gg, weights);
    r.det = ctc.det;
    r.lnk = ctc.lnk;
    r.tra = ctc.tra;
    r.aogm = ctc.counts;
    const auto alphas = default_hota_alphas();
    r.hota_detail = hota(pg, gg, alphas);
    r.hota = r.hota_detail.hota;
    r.det_a = r.hota_detail.det_a;
    r.ass_a = r.hota_detail.ass_a;
    r.clear = clear_mot_counts(pg, gg, 0.5);
    r.mota = 1.0 - static_cast<double>(r.clear.fn + r.clear.fp + r.clear.idsw) / static_cast<double>(r.clear.gt_detections);
    if (r.clear.matches > 0) r.motp = r.clear.iou_sum / static_cast<double>(r.clear.matches);
    r.identity = identity_counts(pg, gg, 0.5);
    r.idf1 = 2.0 * static_cast<double>(r.identity.idtp) /
             static_cast<double>(2 * r.identity.idtp + r.identity.idfp + r.identity.idfn);
    return r;
}

std::vector<std::pair<std::string, double>> MetricReport::scalars() const {
    const double nan = std::nan("");
    return {
        {"det", det},
        {"lnk", lnk},
        {"tra", tra},
        {"hota", hota},
        {"deta", det_a},
        {"assa", ass_a},
        {"mota", mota},
        {"motp", motp.value_or(nan)},
        {"idf1", idf1},
        {"aogm_ns", static_cast<double>(aogm.ns)},
        {"aogm_fn", static_cast<double>(aogm.fn)},
        {"aogm_fp", static_cast<double>(aogm.fp)},
        {"aogm_ed", static_cast<double>(aogm.ed)},
        {"aogm_ea", static_cast<double>(aogm.ea)},
        {"aogm_ec", static_cast<double>(aogm.ec)},
        {"gt_nodes", static_cast<double>(aogm.gt_nodes)},
        {"gt_edges", static_cast<double>(aogm.gt_edges)},
        {"mot_matches", static_cast<double>(clear.matches)},
        {"mot_fn", static_cast<double>(clear.fn)},
        {"mot_fp", static_cast<double>(clear.fp)},
        {"mot_idsw", static_cast<double>(clear.idsw)},
        {"idtp", static_cast<double>(identity.idtp)},
        {"idfp", static_cast<double>(identity.idfp)},
        {"idfn", static_cast<double>(identity.idfn)},
    };
}

std::string MetricReport::to_key_value() const {
    std::ostringstream out;
    for (const auto& [k, v] : scalars()) out << k << '=' << (std::isnan(v) ? std::string("nan") : text::format(v)) << '\n';
    for (std::size_t i = 0; i < hota_detail.alphas.size(); ++i) {
        const std::string a = text::format(hota_detail.alphas[i]);
        out << "hota@" << a << '=' << text::format(hota_detail.hota_curve[i]) << '\n';
        out << "deta@" << a << '=' << text::format(hota_detail.det_a_curve[i]) << '\n';
        out << "assa@" << a << '=' << text::format(hota_detail.ass_a_curve[i]) << '\n';
    }
    return out.str();
}

std::string MetricReport::to_json() const {
    nlohmann::ordered_json j;
    for (const auto& [k, v] : scalars()) {
        if (std::isnan(v)) j[k] = nullptr;
        else j[k] = v;
    }
    nlohmann::ordered_json curve = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < hota_detail.alphas.size(); ++i) {
        curve.push_back({{"alpha", hota_detail.alphas[i]},
                         {"hota", hota_detail.hota_curve[i]},
                         {"deta", hota_detail.det_a_curve[i]},
                         {"assa", hota_detail.ass_a_curve[i]}});
    }
    j["hota_curve"] = curve;
    return j.dump(2) + "\n";
}

}  // namespace celltrack
