// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 celltrack contributors

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "celltrack/core.hpp"

namespace celltrack {

enum class EdgeKind : std::uint8_t { Link, Parent };

struct GraphNode {
    int frame = 0;
    TrackId track = 0;
    Box box;
};

struct GraphEdge {
    std::size_t from = 0;
    std::size_t to = 0;
    EdgeKind kind = EdgeKind::Link;
};

// Node per track entry; link edges join consecutive entries of one track,
// parent edges join a mother's last entry to each daughter's first entry.
struct TrackingGraph {
    int frame_count = 0;
    std::vector<GraphNode> nodes;
    std::vector<GraphEdge> edges;
    std::vector<std::vector<std::size_t>> frame_nodes;  // node indices per frame, track-id order
};

TrackingGraph build_tracking_graph(const LineageForest& forest);

// Cell Tracking Challenge AOGM weights.
struct AOGMWeights {
    double ns = 5.0;   // node split
    double fn = 10.0;  // false-negative node (add)
    double fp = 1.0;   // false-positive node (delete)
    double ed = 1.0;   // redundant edge (delete)
    double ea = 1.5;   // missing edge (add)
    double ec = 1.0;   // edge semantics change
};

// CTC criterion: each GT box goes to the predicted box that contains its
// centre with the largest intersection (ties: larger IoU, then lower index).
// A predicted box may collect several GT boxes (a node split).
std::vector<std::optional<std::size_t>> match_frame_objects_ctc(std::span<const Box> gt, std::span<const Box> pred);

// MOT criterion: one-to-one, pairs need IoU >= alpha, total IoU maximal.
// Returns (gt index, pred index) pairs sorted by gt index.
std::vector<std::pair<std::size_t, std::size_t>> match_frame_objects_iou(std::span<const Box> gt,
                                                                         std::span<const Box> pred, double alpha);

struct AOGMCounts {
    long long ns = 0, fn = 0, fp = 0, ed = 0, ea = 0, ec = 0;
    long long gt_nodes = 0, gt_edges = 0;

    double node_penalty(const AOGMWeights& w) const { return w.ns * ns + w.fn * fn + w.fp * fp; }
    double edge_penalty(const AOGMWeights& w) const { return w.ed * ed + w.ea * ea + w.ec * ec; }
};

AOGMCounts aogm_counts(const TrackingGraph& pred, const TrackingGraph& gt);
double aogm_penalty(const TrackingGraph& pred, const TrackingGraph& gt, const AOGMWeights& weights);

struct CtcScores {
    double det = 0.0, lnk = 0.0, tra = 0.0;
    AOGMCounts counts;
};

// score = 1 - min(AOGM_x, AOGM_x(empty)) / AOGM_x(empty). Throws Undefined
// for an empty ground truth. A zero normaliser (no GT edges, for LNK)
// scores 1 when the penalty is also zero and 0 otherwise.
CtcScores det_lnk_tra(const TrackingGraph& pred, const TrackingGraph& gt, const AOGMWeights& weights);

// alpha = 0.05, 0.10, ..., 0.95
std::vector<double> default_hota_alphas();

struct HotaResult {
    double hota = 0.0, det_a = 0.0, ass_a = 0.0;
    std::vector<double> alphas, hota_curve, det_a_curve, ass_a_curve;
};

HotaResult hota(const TrackingGraph& pred, const TrackingGraph& gt, std::span<const double> alphas);

struct ClearMotCounts {
    long long gt_detections = 0, pred_detections = 0, matches = 0, fn = 0, fp = 0, idsw = 0;
    double iou_sum = 0.0;
};

ClearMotCounts clear_mot_counts(const TrackingGraph& pred, const TrackingGraph& gt, double alpha = 0.5);
double mota(const TrackingGraph& pred, const TrackingGraph& gt, double alpha = 0.5);
// Throws Undefined when nothing matches.
double motp(const TrackingGraph& pred, const TrackingGraph& gt, double alpha = 0.5);

struct IdentityCounts {
    long long idtp = 0, idfp = 0, idfn = 0;
};

IdentityCounts identity_counts(const TrackingGraph& pred, const TrackingGraph& gt, double alpha = 0.5);
double idf1(const TrackingGraph& pred, const TrackingGraph& gt, double alpha = 0.5);

struct MetricReport {
    double det = 0.0, lnk = 0.0, tra = 0.0;
    double hota = 0.0, det_a = 0.0, ass_a = 0.0;
    double mota = 0.0;
    std::optional<double> motp;  // undefined without matches
    double idf1 = 0.0;
    AOGMCounts aogm;
    ClearMotCounts clear;
    IdentityCounts identity;
    HotaResult hota_detail;

    // Flat `key=value` lines in a fixed order; undefined values print "nan".
    std::string to_key_value() const;
    std::string to_json() const;
    // Stable-ordered scalar view, used by the C API.
    std::vector<std::pair<std::string, double>> scalars() const;
};

// Full CTC + MOT evaluation. Throws Validation when frame counts differ and
// Undefined when the ground truth has no nodes.
MetricReport evaluate(const LineageForest& pred, const LineageForest& gt, const AOGMWeights& weights = {});

}  // namespace celltrack
