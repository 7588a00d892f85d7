#pragma once

// Evaluation suite: local contrast gain, background suppression factor,
// Chebyshev ground-truth matching and precision/recall threshold sweeps.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "image.hpp"
#include "pipeline.hpp"

namespace hmerw {

constexpr double kMetricsEpsilon = 1e-7;
constexpr int kMatchDistance = 4;  // true positive iff Chebyshev distance < 4

struct TargetTruth {
    int row = 0;
    int col = 0;
    std::vector<PixelCoord> mask;  // optional exact region; empty = use window
};

struct GroundTruth {
    std::vector<TargetTruth> targets;
};

struct PrPoint {
    int threshold = 0;
    double precision = 0.0;  // NaN where no detections exist (excluded from AUPR)
    double recall = 0.0;
};

struct MetricsReport {
    double lcg = 0.0;
    double bsf = 0.0;
    std::vector<PrPoint> pr_points;
    double aupr = 0.0;
};

// 8-bit quantized saliency map for threshold sweeps.
struct Map8 {
    int rows = 0;
    int cols = 0;
    std::vector<int> values;  // 0..255
};

// Min-max normalization to integer levels 0..255, round half up. A constant
// map quantizes to all zeros.
inline Map8 normalize_to_8bit(const FusionMap& f) {
    Map8 m;
    m.rows = f.rows;
    m.cols = f.cols;
    m.values.resize(f.values.size());
    const auto [mn_it, mx_it] = std::minmax_element(f.values.begin(), f.values.end());
    const double mn = *mn_it, span = *mx_it - *mn_it;
    for (size_t i = 0; i < f.values.size(); ++i)
        m.values[i] = span > 0
                          ? static_cast<int>(std::floor((f.values[i] - mn) / span * 255.0 + 0.5))
                          : 0;
    return m;
}

namespace detail {

// Union of target regions as a pixel mask; window_radius applies when a
// target carries no explicit mask ((2R+1)^2 window clipped to bounds).
inline std::vector<char> target_region(const GroundTruth& gt, int rows, int cols,
                                       int window_radius) {
    std::vector<char> region(static_cast<size_t>(rows) * cols, 0);
    for (const TargetTruth& t : gt.targets) {
        if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
            throw std::invalid_argument("ground truth center outside image bounds");
        if (!t.mask.empty()) {
            for (const PixelCoord& p : t.mask)
                if (p.row >= 0 && p.row < rows && p.col >= 0 && p.col < cols)
                    region[static_cast<size_t>(p.row) * cols + p.col] = 1;
        } else {
            for (int r = std::max(t.row - window_radius, 0);
                 r <= std::min(t.row + window_radius, rows - 1); ++r)
                for (int c = std::max(t.col - window_radius, 0);
                     c <= std::min(t.col + window_radius, cols - 1); ++c)
                    region[static_cast<size_t>(r) * cols + c] = 1;
        }
    }
    return region;
}

struct RegionMeans {
    double target = 0.0;
    double background = 0.0;
};

inline RegionMeans region_means(const std::vector<double>& values, const std::vector<char>& region) {
    double ts = 0.0, bs = 0.0;
    size_t tn = 0, bn = 0;
    for (size_t i = 0; i < values.size(); ++i) {
        if (region[i]) {
            ts += values[i];
            ++tn;
        } else {
            bs += values[i];
            ++bn;
        }
    }
    if (tn == 0) throw std::invalid_argument("lcg: empty target region");
    if (bn == 0) throw std::invalid_argument("lcg: target region covers the whole image");
    return {ts / tn, bs / bn};
}

inline double population_std(const std::vector<double>& values) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    return std::sqrt(var / static_cast<double>(values.size()));
}

}  // namespace detail

// Local contrast gain of an output map against the input image:
// ((uT(O)-uB(O))/(uT(O)+uB(O)+eps)) / ((uT(I)-uB(I))/(uT(I)+uB(I))+eps).
// The background is everything outside the union of target regions.
inline double lcg(const GrayImage& input, const std::vector<double>& output,
                  const GroundTruth& gt, int window_radius = 5) {
    if (output.size() != input.size())
        throw std::invalid_argument("lcg: input/output dimensions differ");
    if (gt.targets.empty()) throw std::invalid_argument("lcg: no targets in ground truth");
    const std::vector<char> region = detail::target_region(gt, input.rows, input.cols, window_radius);
    const auto mo = detail::region_means(output, region);
    const auto mi = detail::region_means(input.data, region);
    const double num = (mo.target - mo.background) / (mo.target + mo.background + kMetricsEpsilon);
    const double den = (mi.target - mi.background) / (mi.target + mi.background) + kMetricsEpsilon;
    return num / den;
}

inline double lcg(const GrayImage& input, const FusionMap& output, const GroundTruth& gt,
                  int window_radius = 5) {
    return lcg(input, output.values, gt, window_radius);
}

// Background suppression factor: std(O) / (std(I) + eps) over all pixels.
inline double bsf(const GrayImage& input, const std::vector<double>& output) {
    if (output.size() != input.size())
        throw std::invalid_argument("bsf: input/output dimensions differ");
    return detail::population_std(output) / (detail::population_std(input.data) + kMetricsEpsilon);
}

inline double bsf(const GrayImage& input, const FusionMap& output) {
    return bsf(input, output.values);
}

struct MatchCounts {
    int tp = 0;
    int fp = 0;
};

// Greedy one-to-one matching in descending peak order: a detection is a true
// positive if its rounded centroid lies within Chebyshev distance < 4 of an
// unmatched truth center (nearest such center wins).
inline MatchCounts match_detections(const DetectionSet& dets, const GroundTruth& gt) {
    std::vector<const Detection*> order;
    order.reserve(dets.detections.size());
    for (const Detection& d : dets.detections) order.push_back(&d);
    std::stable_sort(order.begin(), order.end(),
                     [](const Detection* a, const Detection* b) { return a->peak_value > b->peak_value; });

    std::vector<char> used(gt.targets.size(), 0);
    MatchCounts out;
    for (const Detection* d : order) {
        const int dr = static_cast<int>(std::lround(d->row));
        const int dc = static_cast<int>(std::lround(d->col));
        int best = -1, best_dist = kMatchDistance;
        for (size_t t = 0; t < gt.targets.size(); ++t) {
            if (used[t]) continue;
            const int dist = std::max(std::abs(dr - gt.targets[t].row),
                                      std::abs(dc - gt.targets[t].col));
            if (dist < best_dist) {
                best_dist = dist;
                best = static_cast<int>(t);
            }
        }
        if (best >= 0) {
            used[best] = 1;
            ++out.tp;
        } else {
            ++out.fp;
        }
    }
    return out;
}

// Corpus-wide precision/recall sweep over thresholds 0..255 on 8-bit maps,
// with trapezoidal AUPR over recall-sorted points. Thresholds where the
// corpus produces no detections have undefined precision (NaN) and do not
// enter the integral; equal recalls keep their maximum precision.
inline MetricsReport pr_sweep(const std::vector<Map8>& maps, const std::vector<GroundTruth>& gts) {
    if (maps.size() != gts.size())
        throw std::invalid_argument("pr_sweep: one ground truth per map required");
    size_t total_targets = 0;
    for (const GroundTruth& g : gts) total_targets += g.targets.size();
    if (total_targets == 0) throw std::invalid_argument("pr_sweep: corpus has no targets");

    std::vector<long> tp_at(256, 0), fp_at(256, 0);
    for (size_t m = 0; m < maps.size(); ++m) {
        FusionMap f;
        f.rows = maps[m].rows;
        f.cols = maps[m].cols;
        f.values.assign(maps[m].values.begin(), maps[m].values.end());
        for (int T = 0; T <= 255; ++T) {
            const DetectionSet dets = extract_detections(f, static_cast<double>(T));
            const MatchCounts mc = match_detections(dets, gts[m]);
            tp_at[T] += mc.tp;
            fp_at[T] += mc.fp;
        }
    }
    MetricsReport rep;
    rep.pr_points.reserve(256);
    for (int T = 0; T <= 255; ++T) {
        const long tp = tp_at[T], fp = fp_at[T];
        PrPoint pt;
        pt.threshold = T;
        pt.recall = static_cast<double>(tp) / static_cast<double>(total_targets);
        pt.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp)
                                     : std::numeric_limits<double>::quiet_NaN();
        rep.pr_points.push_back(pt);
    }

    // Collapse to recall-sorted points, max precision per distinct recall.
    std::vector<std::pair<double, double>> pts;
    for (const PrPoint& pt : rep.pr_points)
        if (!std::isnan(pt.precision)) pts.push_back({pt.recall, pt.precision});
    std::sort(pts.begin(), pts.end());
    std::vector<std::pair<double, double>> merged;
    for (const auto& p : pts) {
        if (!merged.empty() && merged.back().first == p.first)
            merged.back().second = std::max(merged.back().second, p.second);
        else
            merged.push_back(p);
    }
    double area = 0.0;
    if (!merged.empty()) {
        // Constant extension down to recall 0 anchors the integral.
        if (merged.front().first > 0.0) area += merged.front().first * merged.front().second;
        for (size_t i = 1; i < merged.size(); ++i)
            area += (merged[i].first - merged[i - 1].first) *
                    0.5 * (merged[i].second + merged[i - 1].second);
    }
    rep.aupr = area;
    return rep;
}

}  // namespace hmerw
